#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "spsb/fluctuations.hpp"

using namespace spsb;

namespace {

constexpr double pi = std::numbers::pi;

Chi3Params chi3(double delta, double rho2, double g = -1.0, double gamma = 1.0) {
  Chi3Params p;
  p.delta = delta;
  p.rho2 = rho2;
  p.g = g;
  p.gamma_s = gamma;
  return p;
}

struct Bright {
  CavityModel model;
  ClassicalState state;
  DriftDiffusion dd;
};

Bright bright_point(const Chi3Params& p) {
  auto model = chi3_model(p);
  auto st = steady_states(model);
  REQUIRE(st.nonzero_exists());
  auto s = st.bright.front();
  auto dd = linearize(model, s);
  return {std::move(model), std::move(s), std::move(dd)};
}

Chi3Params mid_branch(double delta, double gamma = 1.0, double g = -1.0) {
  const auto t = threshold_interval(chi3(delta, 0.0, g, gamma));
  return chi3(delta, 0.5 * (t.lower + t.upper), g, gamma);
}

}  // namespace

TEST_CASE("empty cavity is the vacuum fixed point") {
  for (double delta : {0.0, 1.3, -2.0}) {
    const auto model = chi3_model(chi3(delta, 0.0, 0.0, 0.7));
    const auto dd = linearize(model, steady_states(model).trivial);
    Eigen::EigenSolver<Eigen::MatrixXd> es(dd.drift);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      CHECK(std::abs(es.eigenvalues()(i).real() + 0.7) < 1e-14);
      CHECK(std::abs(std::abs(es.eigenvalues()(i).imag()) - std::abs(delta)) < 1e-14);
    }
    CHECK(dd.normal_diffusion.cwiseAbs().maxCoeff() < 1e-15);
    CHECK(!dd.goldstone);
    const Eigen::MatrixXd s = covariance_lyapunov(dd);
    CHECK((s - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    for (double phi : {0.0, 0.4, 2.0}) {
      const auto spec = output_spectrum(dd, model, e_x(), phi, default_omega_grid(0.7));
      for (const auto& [w, v] : spec.samples) CHECK(std::abs(v - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("Lyapunov residual for random stable drift") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    DriftDiffusion dd;
    dd.damping = {0.5 + std::abs(n(rng)), 0.5 + std::abs(n(rng))};
    Eigen::MatrixXd X(4, 4), S(4, 4), R(4, 4);
    for (int i = 0; i < 16; ++i) {
      X.data()[i] = n(rng);
      S.data()[i] = n(rng);
      R.data()[i] = n(rng);
    }
    dd.drift = -(X * X.transpose() + 0.1 * Eigen::MatrixXd::Identity(4, 4)) + (S - S.transpose());
    dd.diffusion = R * R.transpose();
    const Eigen::MatrixXd sigma = covariance_lyapunov(dd);
    CHECK(lyapunov_residual(dd, sigma) < 1e-10);
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
  DriftDiffusion unstable;
  unstable.damping = {1.0};
  unstable.drift = Eigen::MatrixXd::Identity(2, 2);
  unstable.diffusion = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(covariance_lyapunov(unstable), std::domain_error);
}

TEST_CASE("below-threshold OPO matches the two-mode squeezing closed form") {
  const double gamma = 1.0;
  for (double eps : {0.2, 0.5, 0.8}) {
    const OpoParams p{eps, 1.0, 1.0, gamma};  // chi beta = E_p / gamma_p = eps
    const auto model = opo_classical_pump_model(p);
    const auto st = steady_states(model);
    CHECK(!st.nonzero_exists());
    const auto dd = linearize(model, st.trivial);

    // Down-conversion couples x_x with x_y and y_x with y_y only.
    CHECK(dd.drift(0, 2) == doctest::Approx(eps));
    CHECK(dd.drift(1, 3) == doctest::Approx(-eps));
    CHECK(dd.drift(0, 3) == 0.0);
    CHECK(dd.drift(1, 2) == 0.0);

    // a_+ = (a_x + a_y)/sqrt2 has x_+ damped at gamma - eps, y_+ at gamma + eps.
    const Eigen::MatrixXd s = covariance_lyapunov(dd);
    Eigen::VectorXd xp(4), yp(4);
    xp << 1, 0, 1, 0;
    yp << 0, 1, 0, 1;
    xp /= std::sqrt(2.0);
    yp /= std::sqrt(2.0);
    CHECK(xp.dot(s * xp) == doctest::Approx(gamma / (gamma - eps)).epsilon(1e-12));
    CHECK(yp.dot(s * yp) == doctest::Approx(gamma / (gamma + eps)).epsilon(1e-12));
    const auto nm = normal_moments(s);
    const double n_expect = eps * eps / (2 * (gamma * gamma - eps * eps));
    CHECK(nm.number(0, 0).real() == doctest::Approx(n_expect).epsilon(1e-12));
    CHECK(std::abs(nm.pair(0, 1) - eps * gamma / (2 * (gamma * gamma - eps * eps))) < 1e-12);

    const JonesVector diag{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    const auto spec = output_spectrum(dd, model, diag, pi / 2, default_omega_grid(gamma));
    for (const auto& [w, v] : spec.samples) {
      const double expect = 1.0 - 4 * eps * gamma / ((gamma + eps) * (gamma + eps) + w * w);
      CHECK(std::abs(v - expect) < 1e-12);
    }
    const auto opt = optimal_quadrature(dd, mode_weights(model, diag));
    CHECK(std::abs(opt.phi - pi / 2) < 1e-9);
    CHECK(opt.v_min == doctest::Approx(std::pow((gamma - eps) / (gamma + eps), 2)).epsilon(1e-12));
    CHECK(opt.v_min * opt.v_conjugate >= 1 - 1e-9);
  }
}

TEST_CASE("spectra are even, physical and return to shot noise") {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto b = bright_point(mid_branch(3.0));
  const auto grid = default_omega_grid(1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const JonesVector e{{u(rng) - 0.5, u(rng) - 0.5}, {u(rng) - 0.5, u(rng) - 0.5}};
    const double phi = pi * u(rng);
    const Eigen::VectorXd c = quadrature_vector(mode_weights(b.model, normalize(e)), phi);
    for (std::size_t i = 1; i < grid.size(); i += 7) {
      const double vp = quadrature_spectrum(b.dd, c, grid[i]);
      const double vm = quadrature_spectrum(b.dd, c, -grid[i]);
      CHECK(std::abs(vp - vm) < 1e-12);
      CHECK(vp >= 0.0);
    }
    CHECK(std::abs(quadrature_spectrum(b.dd, c, grid.back()) - 1.0) < 1e-3);
  }
}

TEST_CASE("dark mode of the chi3 bright branch is perfectly squeezed at zero frequency") {
  for (double delta : {2.0, 3.0, 5.0}) {
    const auto b = bright_point(mid_branch(delta));
    const JonesVector dark = dark_polarization(b.model, b.state);
    CHECK(same_ray(dark, dark_mode(ModelKind::chi3, 0.0), 1e-10));
    const auto opt = optimal_quadrature(b.dd, mode_weights(b.model, dark));
    CHECK(opt.v_min < 1e-6);
    CHECK(std::isinf(opt.v_conjugate));
    const auto conj = output_spectrum(b.dd, b.model, dark, opt.phi + pi / 2, std::vector<double>{0.0});
    CHECK(conj.samples[0].second > 1e3);

    // The squeezed quadrature is a pure -2 gamma mode: V = w^2 / (4 gamma^2 + w^2).
    const auto spec = output_spectrum(b.dd, b.model, dark, opt.phi, default_omega_grid(1.0));
    for (const auto& [w, v] : spec.samples) CHECK(std::abs(v - w * w / (4.0 + w * w)) < 1e-9);
  }
}

TEST_CASE("dark-mode quadrature pair carries the most damped signal eigenvalue") {
  for (double delta : {2.0, 3.5, 6.0}) {
    const auto b = bright_point(mid_branch(delta));
    const auto k = mode_weights(b.model, dark_polarization(b.model, b.state));
    Eigen::MatrixXd C(4, 2);
    C.col(0) = quadrature_vector(k, 0.0);
    C.col(1) = quadrature_vector(k, pi / 2);
    const Eigen::Matrix2d R = C.transpose() * b.dd.drift * C;
    CHECK((b.dd.drift * C - C * R).cwiseAbs().maxCoeff() < 1e-9);
    Eigen::EigenSolver<Eigen::Matrix2d> es(R);
    const double dark_min = es.eigenvalues().real().minCoeff();
    Eigen::EigenSolver<Eigen::MatrixXd> all(b.dd.drift);
    CHECK(dark_min <= all.eigenvalues().real().minCoeff() + 1e-9);
  }
}

TEST_CASE("Heisenberg products at zero frequency") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double delta : {2.0, 4.0}) {
    const auto b = bright_point(mid_branch(delta));
    for (int trial = 0; trial < 30; ++trial) {
      const JonesVector e{{u(rng) - 0.5, u(rng) - 0.5}, {u(rng) - 0.5, u(rng) - 0.5}};
      const auto k = mode_weights(b.model, normalize(e));
      const double phi = pi * u(rng);
      const double v1 = quadrature_spectrum(b.dd, quadrature_vector(k, phi), 0.0);
      const double v2 = quadrature_spectrum(b.dd, quadrature_vector(k, phi + pi / 2), 0.0);
      if (std::isfinite(v1) && std::isfinite(v2)) CHECK(v1 * v2 >= 1 - 1e-6);
    }
  }
}

TEST_CASE("Goldstone projection keeps the Lyapunov residual small") {
  const auto b = bright_point(mid_branch(3.0));
  REQUIRE(b.dd.goldstone);
  CHECK(std::abs(b.dd.goldstone->left.dot(b.dd.goldstone->right) - 1.0) < 1e-12);
  CHECK(alignment(b.dd.goldstone->right, orbit_tangent(b.model, b.state)) > 1 - 1e-10);
  const Eigen::MatrixXd s = covariance_lyapunov(b.dd);
  CHECK(lyapunov_residual(b.dd, s) < 1e-10);
  CHECK(std::abs(b.dd.goldstone->left.dot(s * b.dd.goldstone->left)) < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  CHECK(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("noncritical squeezing over random admissible points") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Chi3Params> pts;
  for (int i = 0; i < 20; ++i) {
    const double gamma = 0.5 + u(rng);
    const double g = -(0.2 + 2.0 * u(rng));
    const double delta = gamma * (2.0 + 4.0 * u(rng));
    const auto t = threshold_interval(chi3(delta, 0.0, g, gamma));
    pts.push_back(chi3(delta, t.lower + (0.02 + 0.96 * u(rng)) * (t.upper - t.lower), g, gamma));
  }
  const auto t = threshold_interval(chi3(3.0, 0.0));
  pts.push_back(chi3(3.0, t.lower * (1 + 1e-3)));
  pts.push_back(chi3(3.0, t.upper * (1 - 1e-3)));
  const auto rows = dark_mode_squeezing(pts, 2);
  REQUIRE(rows.size() == pts.size());
  for (const auto& r : rows) {
    REQUIRE_MESSAGE(r.on_branch, r.note);
    CHECK(r.v_min < 1e-6);
    CHECK(r.phi_opt >= 0.0);
    CHECK(r.phi_opt < pi);
    CHECK(std::isinf(r.v_conjugate));
    CHECK(r.v_bright > 0.0);
  }
  CHECK(!dark_mode_squeezing(std::vector<Chi3Params>{chi3(3.0, 0.2)}, 1).front().on_branch);
}

TEST_CASE("bright-mode squeezing is critical while the dark mode is not") {
  const auto t = threshold_interval(chi3(3.0, 0.0));
  auto at = [&](double f) { return chi3(3.0, t.lower + f * (t.upper - t.lower)); };
  const std::vector<Chi3Params> pts{at(0.001), at(0.3), at(0.999)};
  const auto rows = dark_mode_squeezing(pts, 1);
  CHECK(rows[1].v_bright > 0.3);
  CHECK(rows[0].v_bright < 0.01);
  CHECK(rows[2].v_bright < 0.01);
  for (const auto& r : rows) CHECK(r.v_min < 1e-20);
}

TEST_CASE("twin beams above the OPO threshold") {
  OpoParams p{1.5, 1.0, 1.0, 1.0};
  const auto spec = twin_beam_intensity_spectrum(p, default_omega_grid(1.0));
  CHECK(spec.samples.front().first == 0.0);
  CHECK(spec.samples.front().second < 1e-6);
  CHECK(std::abs(spec.samples.back().second - 1.0) < 1e-3);
  const auto at_gamma = twin_beam_intensity_spectrum(p, std::vector<double>{1.0});
  CHECK(at_gamma.samples[0].second > 0.0);
  CHECK(at_gamma.samples[0].second < 1.0);
  for (const auto& [w, v] : spec.samples) CHECK(std::abs(v - w * w / (4.0 + w * w)) < 1e-9);

  p.pump_amplitude = 0.9;
  CHECK_THROWS_AS(twin_beam_intensity_spectrum(p, std::vector<double>{0.0}), std::domain_error);
}

TEST_CASE("linearize rejects non-stationary states and empty grids") {
  const auto model = chi3_model(chi3(3.0, 0.6));
  CHECK_THROWS_AS(linearize(model, ClassicalState{{1.0, 0.5}}), std::invalid_argument);
  const auto dd = linearize(model, steady_states(model).trivial);
  CHECK_THROWS_AS(output_spectrum(dd, model, e_x(), 0.0, std::vector<double>{}), std::invalid_argument);
}
