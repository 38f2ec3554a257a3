#include <cmath>
#include <random>

#include "doctest.h"
#include "spsb/fock_oracle.hpp"

using namespace spsb;
using P = OperatorPolynomial;

namespace {

Chi3Params weak_chi3(double rho2) {
  Chi3Params p;
  p.delta = 2.0;
  p.g = -0.01;
  p.rho2 = rho2;
  return p;
}

DensityMatrix random_density(std::mt19937_64& rng, const TruncatedSpace& space) {
  std::normal_distribution<double> n(0.0, 1.0);
  const long D = space.dimension();
  Eigen::MatrixXcd g(D, D);
  for (long i = 0; i < D * D; ++i) g.data()[i] = cplx(n(rng), n(rng));
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace();
  return {space.cutoffs, rho};
}

}  // namespace

TEST_CASE("single damped mode relaxes to vacuum") {
  const ModeSpace s{ModeLabel::sig_x};
  const TruncatedSpace space({5});
  const std::vector<double> gamma{0.8};
  const auto L = liouvillian(P(s), gamma, space);
  CHECK(L.trace_defect() < 1e-14);
  const auto vac = vacuum(space);
  CHECK((L.matrix * L.vectorize(vac.entries)).cwiseAbs().maxCoeff() == 0.0);
  const auto ss = steady_state(L);
  CHECK(ss.unique());
  CHECK((ss.rho.entries - vac.entries).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Liouvillian preserves trace on random states") {
  std::mt19937_64 rng(31);
  const auto model = chi3_model(weak_chi3(20.0));
  const TruncatedSpace space({4, 4});
  const auto L = liouvillian(model, space, Support::full);
  CHECK(L.trace_defect() < 1e-10);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_density(rng, space);
    const Eigen::MatrixXcd out = L.unvectorize(L.matrix * L.vectorize(rho.entries));
    CHECK(std::abs(out.trace()) < 1e-10);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("empty detuned cavity has the vacuum steady state") {
  Chi3Params p;
  p.g = 0.0;
  p.rho2 = 0.0;
  p.delta = 1.5;
  const auto ss = steady_state(liouvillian(chi3_model(p), TruncatedSpace({4, 4}), Support::full));
  CHECK(std::abs(ss.rho.entries(0, 0) - 1.0) < 1e-12);
  CHECK(ss.null_dimension == 1);
}

TEST_CASE("photon-number difference is conserved in truncated Fock space") {
  const OpoParams op{1.2, 0.7, 1.0, 1.0};
  const P h_opo = build_opo_hamiltonian(op);
  const std::vector<int> c_opo{6, 6, 4};
  CHECK(conservation_check(h_opo, opo_model(op).number_difference(), c_opo) < 1e-10);

  Chi3Params cp;
  cp.g = 0.9;
  cp.rho2 = 1.3;
  const auto chi3 = chi3_model(cp);
  const std::vector<int> c_chi3{8, 8};
  CHECK(conservation_check(chi3.hamiltonian, chi3.number_difference(), c_chi3) < 1e-10);

  const ModeSpace lin{ModeLabel::sig_x, ModeLabel::sig_y};
  CHECK(conservation_check(P::number(lin, 0), P::number(lin, 0) - P::number(lin, 1), c_chi3) == 0.0);

  // A symmetry-breaking term is detected.
  const P broken = chi3.hamiltonian + P::annihilator(chi3.hamiltonian.space(), 0) * P::annihilator(chi3.hamiltonian.space(), 0);
  CHECK(conservation_check(broken.adjoint() + broken, chi3.number_difference(), c_chi3) > 1.0);
}

TEST_CASE("vacuum moments") {
  const ModeSpace s{ModeLabel::sig_x};
  const TruncatedSpace space({6});
  const auto vac = vacuum(space);
  CHECK(moments(vac, P::number(s, 0)) == cplx{});
  const P x = P::annihilator(s, 0) + P::creator(s, 0);
  CHECK(std::abs(moments(vac, x * x) - 1.0) < 1e-15);
  const ModeSpace two{ModeLabel::sig_x, ModeLabel::sig_y};
  CHECK_THROWS_AS(moments(vac, P::number(two, 0)), std::invalid_argument);
}

TEST_CASE("below-threshold OPO: oracle moments match the Lyapunov covariance") {
  const OpoParams p{0.2, 1.0, 1.0, 1.0};  // chi beta / gamma_s = 0.2
  const auto model = opo_classical_pump_model(p);
  const std::vector<int> cut{12, 12};
  const auto cmp = compare_with_linearized(model, cut, "opo", true);
  CHECK(cmp.max_relative_deviation < 1e-2);
  CHECK(cmp.cutoff_drift >= 0.0);
  CHECK(cmp.cutoff_drift < 1e-6);
  CHECK(cmp.symmetric_zero_error < 1e-10);
  // The model is quadratic, so agreement is limited by truncation only.
  CHECK(cmp.max_relative_deviation < 1e-8);

  const auto ss = steady_state(liouvillian(model, TruncatedSpace(cut), Support::charge_sector));
  CHECK(ss.residual < 1e-9);
  CHECK(ss.rho.check().ok());
}

TEST_CASE("weak chi3 below threshold: symmetric steady state and oracle agreement") {
  const auto model = chi3_model(weak_chi3(5.0));
  REQUIRE(!steady_states(model).nonzero_exists());
  const auto ss = steady_state(liouvillian(model, TruncatedSpace({7, 7}), Support::full));
  CHECK(ss.unique());
  CHECK(ss.residual < 1e-9);
  ss.rho.validate();
  CHECK(std::abs(moments(ss.rho, model.number_difference())) < 1e-10);
  for (double theta : {0.3, 1.7, 2.9}) CHECK(symmetry_defect(ss.rho, model.charges, theta) < 1e-8);

  const std::vector<int> cut{7, 7};
  const auto cmp = compare_with_linearized(model, cut, "chi3", true);
  CHECK(cmp.max_relative_deviation < 1e-2);
  CHECK(cmp.cutoff_drift < 1e-6);
  CHECK(cmp.symmetric_zero_error < 1e-10);
}

TEST_CASE("chi3 oracle deviation is a first-order effect of the quartic coupling") {
  // At fixed |g| rho2 the Gaussian prediction is unchanged; the residual
  // mismatch comes from the quartic terms and shrinks linearly with |g|.
  const std::vector<int> cut{7, 7};
  Chi3Params strong = weak_chi3(5.0);
  Chi3Params weak = weak_chi3(50.0);
  weak.g = -0.001;
  const double d1 = compare_with_linearized(chi3_model(strong), cut, "g1", false).max_relative_deviation;
  const double d2 = compare_with_linearized(chi3_model(weak), cut, "g2", false).max_relative_deviation;
  CHECK(d1 > 1e-3);
  CHECK(d2 / d1 == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("charge-sector and full supports agree") {
  const auto model = chi3_model(weak_chi3(15.0));
  const TruncatedSpace space({5, 5});
  const auto full = steady_state(liouvillian(model, space, Support::full));
  const auto sector = steady_state(liouvillian(model, space, Support::charge_sector));
  CHECK((full.rho.entries - sector.rho.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("time evolution converges to the null-space steady state") {
  const auto model = opo_classical_pump_model(OpoParams{0.3, 1.0, 1.0, 1.0});
  const TruncatedSpace space({6, 6});
  const auto L = liouvillian(model, space, Support::charge_sector);
  const auto ss = steady_state(L);
  const auto late = evolve(L, vacuum(space), 30.0, 0.01);
  CHECK((late.entries - ss.rho.entries).cwiseAbs().maxCoeff() < 1e-9);
  late.validate();
}

TEST_CASE("guards: dimension cap and degenerate null space") {
  CHECK_THROWS_AS(TruncatedSpace({63, 63, 63}), std::invalid_argument);
  CHECK_THROWS_AS(TruncatedSpace({0, 3}), std::invalid_argument);
  CHECK_NOTHROW(TruncatedSpace({63, 63}));
  const ModeSpace s{ModeLabel::sig_x};
  const std::vector<double> none{0.0};
  CHECK_THROWS_AS(steady_state(liouvillian(P::number(s, 0), none, TruncatedSpace({3}))), std::runtime_error);
}
