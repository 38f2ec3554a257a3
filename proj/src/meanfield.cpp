#include "spsb/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spsb/parallel.hpp"

namespace spsb {

namespace {

constexpr cplx kI{0.0, 1.0};

// Natural intensity of the nonlinear branch: linear rates over nonlinear strength.
double intensity_scale(const CavityModel& model) {
  double linear = model.gamma_s;
  for (double g : model.damping) linear = std::max(linear, g);
  double nonlinear = 0.0;
  for (const auto& [k, c] : model.hamiltonian.terms()) {
    const int d = k.degree();
    if (d <= 2) linear = std::max(linear, std::abs(c));
    else nonlinear = std::max(nonlinear, std::abs(c));
  }
  return nonlinear > 0.0 ? linear / nonlinear : 0.0;
}

double max_nonlinear_coefficient(const CavityModel& model) {
  double nonlinear = 0.0;
  for (const auto& [k, c] : model.hamiltonian.terms())
    if (k.degree() > 2) nonlinear = std::max(nonlinear, std::abs(c));
  return nonlinear;
}

struct NewtonResult {
  Eigen::VectorXd z;
  bool converged = false;
};

// Gauss-Newton with backtracking. `eval` fills the residual and Jacobian and
// returns false when z leaves the admissible domain.
template <class Eval>
NewtonResult gauss_newton(Eigen::VectorXd z, int max_iterations, Eval&& eval) {
  Eigen::VectorXd r, trial_r;
  Eigen::MatrixXd J, trial_J;
  if (!eval(z, r, J)) return {z, false};
  double norm = r.norm();
  for (int it = 0; it < max_iterations; ++it) {
    if (norm < 1e-15) return {z, true};
    const Eigen::VectorXd step = J.completeOrthogonalDecomposition().solve(-r);
    if (!step.allFinite()) return {z, false};
    double t = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = z + t * step;
      if (!eval(trial, trial_r, trial_J)) continue;
      const double trial_norm = trial_r.norm();
      if (trial_norm < norm * (1.0 - 1e-4 * t) || trial_norm < 1e-15) {
        z = trial;
        r = trial_r;
        J = trial_J;
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) return {z, norm < 1e-12};
    if (t * step.norm() <= 1e-15 * (1.0 + z.norm())) return {z, norm < 1e-12};
  }
  return {z, norm < 1e-12};
}

std::vector<int> other_modes(const CavityModel& model) {
  std::vector<int> out;
  for (int m = 0; m < model.modes(); ++m)
    if (m != model.signal_a && m != model.signal_b) out.push_back(m);
  return out;
}

ClassicalState canonical(const CavityModel& model, ClassicalState s) {
  const double phi = std::arg(s.amplitudes[model.signal_a]);
  // Rotation by pi sends each charged amplitude to its negative.
  if (phi > std::numbers::pi / 2 || phi <= -std::numbers::pi / 2) s = rotate(model, s, std::numbers::pi);
  return s;
}

double distance(const ClassicalState& a, const ClassicalState& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) d += std::norm(a.amplitudes[i] - b.amplitudes[i]);
  return std::sqrt(d);
}

double norm(const ClassicalState& a) {
  double d = 0.0;
  for (cplx c : a.amplitudes) d += std::norm(c);
  return std::sqrt(d);
}

}  // namespace

VectorField::VectorField(const CavityModel& model) : model_(model) {
  const int M = model.modes();
  if (static_cast<int>(model.damping.size()) != M || static_cast<int>(model.charges.size()) != M)
    throw std::invalid_argument("VectorField: damping and charges must have one entry per mode");
  grad_conj_.reserve(M);
  hess_mixed_.assign(M, {});
  hess_conj_.assign(M, {});
  for (int m = 0; m < M; ++m) {
    grad_conj_.push_back(d_dalpha_conj(model.hamiltonian, m));
    for (int n = 0; n < M; ++n) {
      hess_mixed_[m].push_back(d_dalpha(grad_conj_[m], n));
      hess_conj_[m].push_back(d_dalpha_conj(grad_conj_[m], n));
    }
  }
}

std::vector<cplx> VectorField::operator()(std::span<const cplx> alpha) const {
  const int M = model_.modes();
  if (static_cast<int>(alpha.size()) != M) throw std::invalid_argument("VectorField: wrong amplitude count");
  std::vector<cplx> f(M);
  for (int m = 0; m < M; ++m) f[m] = -model_.damping[m] * alpha[m] - kI * classical_value(grad_conj_[m], alpha);
  return f;
}

double VectorField::residual(std::span<const cplx> alpha) const {
  double s = 0.0;
  for (cplx c : (*this)(alpha)) s += std::norm(c);
  return std::sqrt(s);
}

void VectorField::jacobian(std::span<const cplx> alpha, Eigen::MatrixXcd& d_alpha, Eigen::MatrixXcd& d_conj) const {
  const int M = model_.modes();
  d_alpha.resize(M, M);
  d_conj.resize(M, M);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < M; ++n) {
      d_alpha(m, n) = -kI * classical_value(hess_mixed_[m][n], alpha);
      d_conj(m, n) = -kI * classical_value(hess_conj_[m][n], alpha);
    }
    d_alpha(m, m) -= model_.damping[m];
  }
}

Eigen::MatrixXd VectorField::quadrature_jacobian(std::span<const cplx> alpha) const {
  Eigen::MatrixXcd fa, fc;
  jacobian(alpha, fa, fc);
  const int M = model_.modes();
  Eigen::MatrixXd J(2 * M, 2 * M);
  for (int m = 0; m < M; ++m) {
    for (int n = 0; n < M; ++n) {
      const cplx s = fa(m, n) + fc(m, n);
      const cplx d = fa(m, n) - fc(m, n);
      J(2 * m, 2 * n) = s.real();
      J(2 * m, 2 * n + 1) = -d.imag();
      J(2 * m + 1, 2 * n) = s.imag();
      J(2 * m + 1, 2 * n + 1) = d.real();
    }
  }
  return J;
}

VectorField classical_eom(const CavityModel& model) { return VectorField(model); }

ThresholdInterval threshold_interval(const Chi3Params& p) {
  if (p.g == 0.0) throw std::invalid_argument("threshold_interval: g must be nonzero");
  if (!(p.gamma_s > 0.0)) throw std::invalid_argument("threshold_interval: gamma_s must be positive");
  const double ag = std::abs(p.g);
  ThresholdInterval t;
  t.lower = p.gamma_s / (2.0 * ag);
  const double disc = p.delta * p.delta - 3.0 * p.gamma_s * p.gamma_s;
  if (p.delta <= 0.0 || disc <= 0.0) {
    t.upper = t.onset = std::nan("");
    return t;
  }
  t.upper = (2.0 * p.delta + std::sqrt(disc)) / (6.0 * ag);
  t.onset = std::abs(p.delta) >= 2.0 * p.gamma_s ? t.lower : (2.0 * p.delta - std::sqrt(disc)) / (6.0 * ag);
  t.exists = t.lower < t.upper;
  return t;
}

double opo_threshold(const OpoParams& p) {
  p.validate();
  if (p.chi == 0.0) throw std::invalid_argument("opo_threshold: chi must be nonzero");
  return p.gamma_p * p.gamma_s / std::abs(p.chi);
}

SteadyStates steady_states(const CavityModel& model, const SolverOptions& options) {
  const VectorField field(model);
  const int M = model.modes();
  const int a = model.signal_a, b = model.signal_b;
  const std::vector<int> others = other_modes(model);
  const int K = static_cast<int>(others.size());

  // Unit complex perturbation of each real unknown, as a column of dalpha/dz.
  auto propagate = [&](const std::vector<cplx>& alpha, const std::vector<std::vector<cplx>>& dalpha,
                       Eigen::MatrixXcd& dF) {
    Eigen::MatrixXcd fa, fc;
    field.jacobian(alpha, fa, fc);
    const int cols = static_cast<int>(dalpha.size());
    dF.resize(M, cols);
    for (int j = 0; j < cols; ++j) {
      Eigen::VectorXcd v(M), vc(M);
      for (int n = 0; n < M; ++n) {
        v(n) = dalpha[j][n];
        vc(n) = std::conj(dalpha[j][n]);
      }
      dF.col(j) = fa * v + fc * vc;
    }
  };

  SteadyStates out;

  // Trivial state: charged modes at zero, neutral modes solved.
  {
    Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2 * K);
    auto build = [&](const Eigen::VectorXd& z) {
      std::vector<cplx> alpha(M, cplx{});
      for (int k = 0; k < K; ++k) alpha[others[k]] = {z(2 * k), z(2 * k + 1)};
      return alpha;
    };
    auto eval = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
      const auto alpha = build(z);
      const auto F = field(alpha);
      std::vector<std::vector<cplx>> dalpha(2 * K, std::vector<cplx>(M, cplx{}));
      for (int k = 0; k < K; ++k) {
        dalpha[2 * k][others[k]] = 1.0;
        dalpha[2 * k + 1][others[k]] = kI;
      }
      Eigen::MatrixXcd dF;
      propagate(alpha, dalpha, dF);
      r.resize(2 * K);
      J.resize(2 * K, 2 * K);
      for (int k = 0; k < K; ++k) {
        r(2 * k) = F[others[k]].real();
        r(2 * k + 1) = F[others[k]].imag();
        for (int j = 0; j < 2 * K; ++j) {
          J(2 * k, j) = dF(others[k], j).real();
          J(2 * k + 1, j) = dF(others[k], j).imag();
        }
      }
      return true;
    };
    if (K > 0) z0 = gauss_newton(z0, options.max_iterations, eval).z;
    out.trivial.amplitudes = build(z0);
    if (!(field.residual(out.trivial.amplitudes) < options.stationarity_tol))
      throw std::runtime_error("steady_states: trivial state did not converge");
  }

  const double scale = intensity_scale(model);
  if (scale <= 0.0) return out;

  // Bright branch: z = (s_a, s_b, phi, neutral re/im...), alpha_a = sqrt(s_a) e^{i phi},
  // alpha_b = sqrt(s_b) e^{i phi}; signal rows are F_m / alpha_m.
  auto build = [&](const Eigen::VectorXd& z) {
    std::vector<cplx> alpha(M, cplx{});
    alpha[a] = std::polar(std::sqrt(z(0)), z(2));
    alpha[b] = std::polar(std::sqrt(z(1)), z(2));
    for (int k = 0; k < K; ++k) alpha[others[k]] = {z(3 + 2 * k), z(4 + 2 * k)};
    return alpha;
  };
  const int nz = 3 + 2 * K;
  const int nr = 4 + 2 * K;
  auto eval = [&](const Eigen::VectorXd& z, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
    if (!(z(0) > 0.0) || !(z(1) > 0.0) || !z.allFinite()) return false;
    const auto alpha = build(z);
    const auto F = field(alpha);
    std::vector<std::vector<cplx>> dalpha(nz, std::vector<cplx>(M, cplx{}));
    dalpha[0][a] = alpha[a] / (2.0 * z(0));
    dalpha[1][b] = alpha[b] / (2.0 * z(1));
    dalpha[2][a] = kI * alpha[a];
    dalpha[2][b] = kI * alpha[b];
    for (int k = 0; k < K; ++k) {
      dalpha[3 + 2 * k][others[k]] = 1.0;
      dalpha[4 + 2 * k][others[k]] = kI;
    }
    Eigen::MatrixXcd dF;
    propagate(alpha, dalpha, dF);
    r.resize(nr);
    J.resize(nr, nz);
    int row = 0;
    for (int m : {a, b}) {
      const cplx q = F[m] / alpha[m];
      r(row) = q.real();
      r(row + 1) = q.imag();
      for (int j = 0; j < nz; ++j) {
        const cplx dq = (dF(m, j) - q * dalpha[j][m]) / alpha[m];
        J(row, j) = dq.real();
        J(row + 1, j) = dq.imag();
      }
      row += 2;
    }
    for (int k = 0; k < K; ++k) {
      r(row) = F[others[k]].real();
      r(row + 1) = F[others[k]].imag();
      for (int j = 0; j < nz; ++j) {
        J(row, j) = dF(others[k], j).real();
        J(row + 1, j) = dF(others[k], j).imag();
      }
      row += 2;
    }
    return true;
  };

  const double min_intensity = 1e-10 * scale;
  const double rate = scale * max_nonlinear_coefficient(model);
  // Near the codimension-two point (delta = 2 gamma, u = gamma/2) the reduced
  // residual is quadratic in the intensity and numerically vanishes for tiny
  // intensities. Such roots have a singular intensity Jacobian and are the
  // trivial state.
  auto degenerate = [&](const Eigen::VectorXd& zf) {
    if (zf(0) + zf(1) > 1e-4 * scale) return false;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    if (!eval(zf, r, J)) return true;
    J.leftCols(2) *= scale;
    const Eigen::VectorXd sv = J.jacobiSvd().singularValues();
    return sv(sv.size() - 1) < 1e-6 * rate;
  };
  for (double seed : options.intensity_seeds) {
    for (int ph = 0; ph < options.phase_seeds; ++ph) {
      Eigen::VectorXd z(nz);
      z(0) = z(1) = seed * scale;
      z(2) = std::numbers::pi * ph / options.phase_seeds;
      for (int k = 0; k < K; ++k) {
        z(3 + 2 * k) = out.trivial.amplitudes[others[k]].real();
        z(4 + 2 * k) = out.trivial.amplitudes[others[k]].imag();
      }
      const auto res = gauss_newton(z, options.max_iterations, eval);
      const Eigen::VectorXd& zf = res.z;
      if (zf(0) < min_intensity || zf(1) < min_intensity || degenerate(zf)) continue;
      ClassicalState s{build(zf)};
      if (!res.converged || !(field.residual(s.amplitudes) < options.stationarity_tol)) {
        ++out.failed_seeds;
        continue;
      }
      s = canonical(model, s);
      const ClassicalState flipped = rotate(model, s, std::numbers::pi);
      const bool seen = std::any_of(out.bright.begin(), out.bright.end(), [&](const ClassicalState& o) {
        const double tol = 1e-6 * (1.0 + norm(s));
        return distance(o, s) < tol || distance(o, flipped) < tol;
      });
      if (!seen) out.bright.push_back(std::move(s));
    }
  }
  std::sort(out.bright.begin(), out.bright.end(), [&](const ClassicalState& x, const ClassicalState& y) {
    return x.photon_number(a) + x.photon_number(b) > y.photon_number(a) + y.photon_number(b);
  });
  return out;
}

ClassicalState rotate(const CavityModel& model, const ClassicalState& state, double theta) {
  ClassicalState out = state;
  for (std::size_t m = 0; m < out.amplitudes.size(); ++m)
    out.amplitudes[m] *= std::polar(1.0, model.charges.at(m) * theta);
  return out;
}

Eigen::VectorXd orbit_tangent(const CavityModel& model, const ClassicalState& state) {
  const int M = static_cast<int>(state.amplitudes.size());
  Eigen::VectorXd t(2 * M);
  for (int m = 0; m < M; ++m) {
    const cplx d = kI * double(model.charges.at(m)) * state.amplitudes[m];
    t(2 * m) = 2.0 * d.real();
    t(2 * m + 1) = 2.0 * d.imag();
  }
  return t;
}

StabilityReport stability(const CavityModel& model, const ClassicalState& state) {
  const VectorField field(model);
  if (!(field.residual(state.amplitudes) < 1e-8))
    throw std::invalid_argument("stability: state is not stationary");
  const Eigen::MatrixXd J = field.quadrature_jacobian(state.amplitudes);
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("stability: eigen decomposition failed");
  StabilityReport rep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rep.eigenvalues.push_back(es.eigenvalues()(i));
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() > y.real() : x.imag() > y.imag();
  });
  double smallest = kGoldstoneTol;
  for (int i = 0; i < static_cast<int>(rep.eigenvalues.size()); ++i) {
    const double mag = std::abs(rep.eigenvalues[i]);
    if (mag < kGoldstoneTol) {
      ++rep.near_zero_count;
      if (mag < smallest || !rep.goldstone_index) {
        smallest = mag;
        rep.goldstone_index = i;
      }
    }
  }
  rep.max_real_excluding_goldstone = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(rep.eigenvalues.size()); ++i)
    if (!rep.goldstone_index || i != *rep.goldstone_index)
      rep.max_real_excluding_goldstone = std::max(rep.max_real_excluding_goldstone, rep.eigenvalues[i].real());
  rep.stable = rep.max_real_excluding_goldstone <= kStabilityMargin;
  if (rep.goldstone_index) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
    rep.goldstone_vector = svd.matrixV().col(J.cols() - 1);
  }
  return rep;
}

double alignment(const Eigen::VectorXd& v, const Eigen::VectorXd& t) {
  const double d = v.norm() * t.norm();
  if (d == 0.0) throw std::invalid_argument("alignment: zero vector");
  return std::abs(v.dot(t)) / d;
}

namespace {

SweepRow sweep_point(const CavityModel& model, double control, const SolverOptions& options) {
  SweepRow row;
  row.control = control;
  const auto states = steady_states(model, options);
  row.trivial_stable = stability(model, states.trivial).stable;
  row.nonzero_exists = states.nonzero_exists();
  row.branches = static_cast<int>(states.bright.size());
  row.failed_seeds = states.failed_seeds;
  if (row.nonzero_exists) {
    const auto& s = states.bright.front();
    const auto rep = stability(model, s);
    row.amplitude_a = std::abs(s.amplitudes[model.signal_a]);
    row.amplitude_b = std::abs(s.amplitudes[model.signal_b]);
    row.max_real_lambda = rep.max_real_excluding_goldstone;
    row.bright_stable = rep.stable;
  } else {
    row.max_real_lambda = stability(model, states.trivial).max_real_excluding_goldstone;
  }
  return row;
}

}  // namespace

std::vector<SweepRow> sweep(const std::function<CavityModel(double)>& model_at, std::span<const double> grid,
                            int threads, const SolverOptions& options) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), threads,
               [&](int i) {
                 try {
                   rows[i] = sweep_point(model_at(grid[i]), grid[i], options);
                 } catch (const std::exception& e) {
                   rows[i].control = grid[i];
                   rows[i].max_real_lambda = std::nan("");
                   rows[i].note = e.what();
                 }
               });
  return rows;
}

std::vector<double> existence_boundaries(const std::function<CavityModel(double)>& model_at, double lo, double hi,
                                         int points, double tol, const SolverOptions& options) {
  if (!(hi > lo) || points < 2 || !(tol > 0.0)) throw std::invalid_argument("existence_boundaries: bad bracket");
  auto exists = [&](double x) { return steady_states(model_at(x), options).nonzero_exists(); };
  std::vector<double> out;
  double x0 = lo;
  bool e0 = exists(x0);
  for (int i = 1; i < points; ++i) {
    const double x1 = lo + (hi - lo) * i / (points - 1);
    const bool e1 = exists(x1);
    if (e1 != e0) {
      double l = x0, h = x1;
      while (h - l > tol) {
        const double mid = 0.5 * (l + h);
        (exists(mid) == e0 ? l : h) = mid;
      }
      out.push_back(0.5 * (l + h));
    }
    x0 = x1;
    e0 = e1;
  }
  return out;
}

}  // namespace spsb
