#include "spsb/fluctuations.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spsb/parallel.hpp"

namespace spsb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd input_coupling(const DriftDiffusion& dd) {
  Eigen::VectorXd b(2 * dd.modes());
  for (int m = 0; m < dd.modes(); ++m) b(2 * m) = b(2 * m + 1) = std::sqrt(2.0 * dd.damping[m]);
  return b;
}

Eigen::MatrixXd goldstone_projector(const DriftDiffusion& dd) {
  const Eigen::Index n = dd.drift.rows();
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  if (dd.goldstone) P -= dd.goldstone->right * dd.goldstone->left.transpose();
  return P;
}

// Zero-frequency response G with X = G B X_in on the non-Goldstone subspace:
// (-A)^{-1}, or the group inverse (-A + t l^T)^{-1} P when A has a null pair.
Eigen::MatrixXd zero_frequency_response(const DriftDiffusion& dd) {
  Eigen::MatrixXd M = -dd.drift;
  if (dd.goldstone) M += dd.goldstone->right * dd.goldstone->left.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  return lu.solve(goldstone_projector(dd));
}

struct ZeroFrequency {
  Eigen::MatrixXd transfer_t;  // (B G B - I)^T
  Eigen::VectorXd goldstone_out;  // B t, empty without a Goldstone mode
};

ZeroFrequency zero_frequency(const DriftDiffusion& dd) {
  const Eigen::VectorXd b = input_coupling(dd);
  const Eigen::MatrixXd G = zero_frequency_response(dd);
  const Eigen::Index n = G.rows();
  ZeroFrequency z;
  z.transfer_t = (b.asDiagonal() * G * b.asDiagonal() - Eigen::MatrixXd::Identity(n, n)).transpose();
  if (dd.goldstone) z.goldstone_out = b.cwiseProduct(dd.goldstone->right);
  return z;
}

bool sees_goldstone(const ZeroFrequency& z, const Eigen::VectorXd& c) {
  if (z.goldstone_out.size() == 0) return false;
  return std::abs(c.dot(z.goldstone_out)) > 1e-8 * c.norm() * z.goldstone_out.norm();
}

void check_stationary(const CavityModel& model, const ClassicalState& state) {
  if (!(VectorField(model).residual(state.amplitudes) < 1e-8))
    throw std::invalid_argument("linearize: state is not stationary");
}

double wrap_pi(double phi) {
  phi = std::fmod(phi, std::numbers::pi);
  if (phi < 0.0) phi += std::numbers::pi;
  if (phi >= std::numbers::pi) phi = 0.0;
  return phi;
}

}  // namespace

DriftDiffusion linearize(const CavityModel& model, const ClassicalState& state) {
  check_stationary(model, state);
  DriftDiffusion dd;
  dd.damping = model.damping;
  dd.drift = VectorField(model).quadrature_jacobian(state.amplitudes);
  const int n = 2 * model.modes();
  dd.diffusion = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m < model.modes(); ++m) dd.diffusion(2 * m, 2 * m) = dd.diffusion(2 * m + 1, 2 * m + 1) = 2.0 * model.damping[m];
  dd.normal_diffusion = dd.drift + dd.drift.transpose() + dd.diffusion;

  const auto rep = stability(model, state);
  if (rep.goldstone_index) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dd.drift, Eigen::ComputeFullU | Eigen::ComputeFullV);
    GoldstonePair g;
    g.right = svd.matrixV().col(n - 1);
    g.left = svd.matrixU().col(n - 1);
    const double overlap = g.left.dot(g.right);
    if (std::abs(overlap) < 1e-8) throw std::domain_error("linearize: defective zero eigenvalue");
    g.left /= overlap;
    dd.goldstone = std::move(g);
  }
  return dd;
}

Eigen::MatrixXd covariance_lyapunov(const DriftDiffusion& dd) {
  const Eigen::Index n = dd.drift.rows();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(n, n);
  if (dd.goldstone) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(dd.goldstone->left);
    const Eigen::MatrixXd H = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Q = H.rightCols(n - 1);
  }
  const Eigen::MatrixXd P = goldstone_projector(dd);
  const Eigen::MatrixXd Ar = Q.transpose() * dd.drift * Q;
  const Eigen::MatrixXd Dr = Q.transpose() * P * dd.diffusion * P.transpose() * Q;
  const Eigen::Index r = Ar.rows();

  Eigen::EigenSolver<Eigen::MatrixXd> es(Ar, false);
  if (es.eigenvalues().real().maxCoeff() >= -1e-10)
    throw std::domain_error("covariance_lyapunov: drift is not Hurwitz on the non-Goldstone subspace");

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(r, r);
  Eigen::MatrixXd K(r * r, r * r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j) K.block(i * r, j * r, r, r) = Ar(i, j) * I + (i == j ? Ar : Eigen::MatrixXd::Zero(r, r));
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Dr.data(), r * r);
  const Eigen::VectorXd x = K.partialPivLu().solve(rhs);
  Eigen::MatrixXd Sr = Eigen::Map<const Eigen::MatrixXd>(x.data(), r, r);
  Sr = 0.5 * (Sr + Sr.transpose());
  Eigen::MatrixXd S = Q * Sr * Q.transpose();
  return 0.5 * (S + S.transpose());
}

double lyapunov_residual(const DriftDiffusion& dd, const Eigen::MatrixXd& sigma) {
  const Eigen::MatrixXd P = goldstone_projector(dd);
  return (dd.drift * sigma + sigma * dd.drift.transpose() + P * dd.diffusion * P.transpose()).cwiseAbs().maxCoeff();
}

NormalMoments normal_moments(const Eigen::MatrixXd& s) {
  const Eigen::Index M = s.rows() / 2;
  const cplx i{0.0, 1.0};
  NormalMoments out{Eigen::MatrixXcd(M, M), Eigen::MatrixXcd(M, M)};
  for (Eigen::Index m = 0; m < M; ++m) {
    for (Eigen::Index n = 0; n < M; ++n) {
      const double xx = s(2 * m, 2 * n), yy = s(2 * m + 1, 2 * n + 1);
      const double xy = s(2 * m, 2 * n + 1), yx = s(2 * m + 1, 2 * n);
      out.number(m, n) = 0.25 * (xx + yy + i * xy - i * yx) - (m == n ? 0.5 : 0.0);
      out.pair(m, n) = 0.25 * (xx - yy + i * xy + i * yx);
    }
  }
  return out;
}

Eigen::VectorXd quadrature_vector(std::span<const cplx> weights, double phi) {
  const int M = static_cast<int>(weights.size());
  Eigen::VectorXd c(2 * M);
  const cplx rot = std::polar(1.0, -phi);
  for (int m = 0; m < M; ++m) {
    const cplx w = weights[m] * rot;
    c(2 * m) = w.real();
    c(2 * m + 1) = -w.imag();
  }
  return c;
}

double quadrature_spectrum(const DriftDiffusion& dd, const Eigen::VectorXd& c, double omega) {
  if (omega == 0.0) {
    const auto z = zero_frequency(dd);
    if (sees_goldstone(z, c)) return kInf;
    return (z.transfer_t * c).squaredNorm();
  }
  // V = |T^H c|^2 with T = B (-i w - A)^{-1} B - I.
  const Eigen::VectorXd b = input_coupling(dd);
  Eigen::MatrixXcd M = -dd.drift.transpose().cast<cplx>();
  M.diagonal().array() += cplx(0.0, omega);
  const Eigen::VectorXcd bc = b.cwiseProduct(c).cast<cplx>();
  const Eigen::VectorXcd y = b.cast<cplx>().cwiseProduct(M.partialPivLu().solve(bc)) - c.cast<cplx>();
  return y.squaredNorm();
}

NoiseSpectrum output_spectrum(const DriftDiffusion& dd, const CavityModel& model, const JonesVector& mode, double phi,
                              std::span<const double> omegas) {
  if (omegas.empty()) throw std::invalid_argument("output_spectrum: empty frequency grid");
  const auto weights = mode_weights(model, normalize(mode));
  const Eigen::VectorXd c = quadrature_vector(weights, phi);
  NoiseSpectrum s{phi, mode, {}};
  s.samples.reserve(omegas.size());
  for (double w : omegas) s.samples.emplace_back(w, quadrature_spectrum(dd, c, w));
  return s;
}

OptimalQuadrature optimal_quadrature(const DriftDiffusion& dd, std::span<const cplx> weights) {
  const auto z = zero_frequency(dd);
  const Eigen::VectorXd c0 = quadrature_vector(weights, 0.0);
  const Eigen::VectorXd c1 = quadrature_vector(weights, std::numbers::pi / 2);
  OptimalQuadrature out;
  if (z.goldstone_out.size() > 0) {
    const double s0 = c0.dot(z.goldstone_out), s1 = c1.dot(z.goldstone_out);
    if (std::hypot(s0, s1) > 1e-8 * c0.norm() * z.goldstone_out.norm()) {
      out.phi = wrap_pi(std::atan2(-s0, s1));
      const Eigen::VectorXd c = std::cos(out.phi) * c0 + std::sin(out.phi) * c1;
      out.v_min = (z.transfer_t * c).squaredNorm();
      out.v_conjugate = kInf;
      return out;
    }
  }
  const Eigen::VectorXd y0 = z.transfer_t * c0, y1 = z.transfer_t * c1;
  Eigen::Matrix2d F;
  F << y0.squaredNorm(), y0.dot(y1), y0.dot(y1), y1.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(F);
  const Eigen::Vector2d v = es.eigenvectors().col(0);
  out.phi = wrap_pi(std::atan2(v(1), v(0)));
  out.v_min = std::max(0.0, es.eigenvalues()(0));
  out.v_conjugate = es.eigenvalues()(1);
  return out;
}

JonesVector dark_polarization(const CavityModel& model, const ClassicalState& state) {
  const JonesVector b = normalize(field_polarization(model, state.amplitudes));
  return {-std::conj(b.cy), std::conj(b.cx)};
}

std::vector<SqueezingRow> dark_mode_squeezing(std::span<const Chi3Params> points, int threads) {
  std::vector<SqueezingRow> rows(points.size());
  parallel_for(static_cast<int>(points.size()), threads, [&](int i) {
    SqueezingRow& row = rows[i];
    row.params = points[i];
    row.v_min = row.phi_opt = row.v_conjugate = row.v_bright = std::nan("");
    try {
      const auto model = chi3_model(points[i]);
      const auto st = steady_states(model);
      const ClassicalState* chosen = nullptr;
      for (const auto& s : st.bright) {
        if (stability(model, s).stable) {
          chosen = &s;
          break;
        }
      }
      if (!chosen) {
        row.note = st.bright.empty() ? "no bright branch" : "bright branch unstable";
        return;
      }
      const auto dd = linearize(model, *chosen);
      const auto dark = optimal_quadrature(dd, mode_weights(model, dark_polarization(model, *chosen)));
      const auto bright =
          optimal_quadrature(dd, mode_weights(model, normalize(field_polarization(model, chosen->amplitudes))));
      row.v_min = dark.v_min;
      row.phi_opt = dark.phi;
      row.v_conjugate = dark.v_conjugate;
      row.v_bright = bright.v_min;
      row.on_branch = true;
    } catch (const std::exception& e) {
      row.note = e.what();
    }
  });
  return rows;
}

NoiseSpectrum twin_beam_intensity_spectrum(const OpoParams& p, std::span<const double> omegas) {
  if (omegas.empty()) throw std::invalid_argument("twin_beam_intensity_spectrum: empty frequency grid");
  if (p.pump_amplitude <= opo_threshold(p))
    throw std::domain_error("twin_beam_intensity_spectrum: OPO below threshold has no bright beams");
  const auto model = opo_model(p);
  const auto st = steady_states(model);
  if (st.bright.empty()) throw std::domain_error("twin_beam_intensity_spectrum: no bright steady state found");
  const auto& s = st.bright.front();
  const auto dd = linearize(model, s);
  const std::vector<cplx> wx{1.0, 0.0, 0.0}, wy{0.0, 1.0, 0.0};
  const Eigen::VectorXd c = (quadrature_vector(wx, std::arg(s.amplitudes[0])) -
                             quadrature_vector(wy, std::arg(s.amplitudes[1]))) /
                            std::sqrt(2.0);
  NoiseSpectrum out{0.0, normalize(field_polarization(model, s.amplitudes)), {}};
  for (double w : omegas) out.samples.emplace_back(w, quadrature_spectrum(dd, c, w));
  return out;
}

std::vector<double> default_omega_grid(double gamma_s) {
  std::vector<double> w{0.0};
  for (int i = 0; i <= 400; ++i) w.push_back(gamma_s * std::pow(10.0, -3.0 + 6.0 * i / 400.0));
  return w;
}

}  // namespace spsb
