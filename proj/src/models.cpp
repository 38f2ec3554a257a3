#include "spsb/models.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace spsb {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr cplx kI{0.0, 1.0};

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
}

using P = OperatorPolynomial;

P term(const ModeSpace& s, std::initializer_list<std::pair<int, std::pair<int, int>>> powers, cplx c) {
  Monomial k(s.size());
  for (const auto& [m, ca] : powers) k.set(m, ca.first, ca.second);
  return P::monomial(s, k, c);
}

}  // namespace

void OpoParams::validate() const {
  require_positive(pump_amplitude, "pump_amplitude");
  require_positive(chi, "chi");
  require_positive(gamma_p, "gamma_p");
  require_positive(gamma_s, "gamma_s");
}

void Chi3Params::validate() const {
  require_positive(gamma_s, "gamma_s");
  if (!(rho2 >= 0.0) || !std::isfinite(rho2)) throw std::invalid_argument("rho2 must be non-negative");
  if (!std::isfinite(delta) || !std::isfinite(g)) throw std::invalid_argument("delta and g must be finite");
  if (std::abs(2.0 * A + B - 1.0) >= 1e-12) {
    std::ostringstream os;
    os << "susceptibility ratios violate 2A + B = 1 (A = " << A << ", B = " << B << ")";
    throw std::invalid_argument(os.str());
  }
}

Coupling g_from_physical(const PhysicalParams& p) {
  require_positive(p.n, "n");
  require_positive(p.L, "L");
  require_positive(p.l, "l");
  require_positive(p.w, "w");
  require_positive(p.omega_s, "omega_s");
  require_positive(p.epsilon0, "epsilon0");
  require_positive(p.hbar, "hbar");
  require_positive(p.speed_of_light, "speed_of_light");
  Coupling out;
  out.field_norm2 = p.hbar * p.omega_s / (2.0 * p.epsilon0 * p.n * p.L);
  out.g = -8.0 * p.epsilon0 * p.l * p.chi_xxxx * out.field_norm2 * out.field_norm2 /
          (p.hbar * std::numbers::pi * p.w * p.w);
  const double wavelength = 2.0 * std::numbers::pi * p.speed_of_light / p.omega_s;
  const double rayleigh = std::numbers::pi * p.w * p.w * p.n / wavelength;
  if (p.l >= rayleigh) {
    std::ostringstream os;
    os << "medium length l = " << p.l << " is not below the Rayleigh length " << rayleigh;
    out.warnings.push_back(os.str());
  }
  return out;
}

PumpAmplitudes circular_pump_config(double rho) {
  const double r = rho * kInvSqrt2;
  return {r, kI * r, r, -kI * r};
}

ModeSpace opo_space() { return {ModeLabel::sig_x, ModeLabel::sig_y, ModeLabel::pump_b}; }
ModeSpace linear_space() { return {ModeLabel::sig_x, ModeLabel::sig_y}; }
ModeSpace circular_space() { return {ModeLabel::sig_plus, ModeLabel::sig_minus}; }

OperatorPolynomial build_opo_hamiltonian(const OpoParams& p) {
  const ModeSpace s = opo_space();
  const int x = 0, y = 1, b = 2;
  // i(E_p b^dag + chi b a_x^dag a_y^dag) + H.c.
  P drive = term(s, {{b, {1, 0}}}, kI * p.pump_amplitude);
  P down = term(s, {{x, {1, 0}}, {y, {1, 0}}, {b, {0, 1}}}, kI * p.chi);
  P h = drive + down;
  return h + h.adjoint();
}

OperatorPolynomial build_opo_classical_pump(const OpoParams& p) {
  const ModeSpace s = linear_space();
  const double beta = p.pump_amplitude / p.gamma_p;
  P down = term(s, {{0, {1, 0}}, {1, {1, 0}}}, kI * p.chi * beta);
  return down + down.adjoint();
}

OperatorPolynomial build_chi3_linear(const Chi3Params& p, const PumpAmplitudes& pumps) {
  p.validate();
  const ModeSpace s = linear_space();
  const int x = 0, y = 1;
  const double A = p.A, B = p.B;
  const cplx a1x = pumps.a1x, a1y = pumps.a1y, a2x = pumps.a2x, a2y = pumps.a2y;
  const std::array<cplx, 2> ax{a1x, a2x};
  const std::array<cplx, 2> ay{a1y, a2y};

  const P nx = P::number(s, x);
  const P ny = P::number(s, y);
  const P h0 = (nx + ny) * cplx(p.delta);

  const P spm = term(s, {{x, {2, 2}}}, 1.0) + term(s, {{y, {2, 2}}}, 1.0);

  double cx = 0.0, cy = 0.0;
  for (int j = 0; j < 2; ++j) {
    cx += 4.0 * (std::norm(ax[j]) + A * std::norm(ay[j]));
    cy += 4.0 * (std::norm(ay[j]) + A * std::norm(ax[j]));
  }
  const P cpm = nx * cplx(cx) + ny * cplx(cy) + term(s, {{x, {1, 1}}, {y, {1, 1}}}, 4.0 * A);

  cplx hop{};
  for (int j = 0; j < 2; ++j) hop += 4.0 * (B * std::conj(ax[j]) * ay[j] + A * ax[j] * std::conj(ay[j]));
  P fwm = term(s, {{x, {2, 0}}, {y, {0, 2}}}, B) +
          term(s, {{x, {2, 0}}}, 2.0 * (a1x * a2x + B * a1y * a2y)) +
          term(s, {{y, {2, 0}}}, 2.0 * (a1y * a2y + B * a1x * a2x)) +
          term(s, {{x, {1, 0}}, {y, {0, 1}}}, hop) +
          term(s, {{x, {1, 0}}, {y, {1, 0}}}, 4.0 * A * (a1x * a2y + a1y * a2x));
  fwm += fwm.adjoint();

  return h0 + (spm + cpm + fwm) * cplx(0.75 * p.g);
}

OperatorPolynomial build_chi3_circular(const Chi3Params& p) {
  p.validate();
  const ModeSpace s = circular_space();
  const int pl = 0, mi = 1;
  const double B = p.B, rho2 = p.rho2;
  const P np = P::number(s, pl);
  const P nm = P::number(s, mi);
  const P h0 = (np + nm) * cplx(p.delta);
  const P spm = (term(s, {{pl, {2, 2}}}, 1.0) + term(s, {{mi, {2, 2}}}, 1.0)) * cplx(1.0 - B);
  const P cpm = term(s, {{pl, {1, 1}}, {mi, {1, 1}}}, 2.0 * (1.0 + B)) + (np + nm) * cplx(2.0 * rho2 * (3.0 - B));
  const P fwm = (term(s, {{pl, {0, 1}}, {mi, {0, 1}}}, 1.0) + term(s, {{pl, {1, 0}}, {mi, {1, 0}}}, 1.0)) *
                cplx(2.0 * rho2 * (1.0 + B));
  return h0 + (spm + cpm + fwm) * cplx(0.75 * p.g);
}

std::vector<OperatorPolynomial> linear_to_circular_images() {
  const ModeSpace s = circular_space();
  const P ap = P::annihilator(s, 0);
  const P am = P::annihilator(s, 1);
  // a_x = (a_+ + a_-)/sqrt2, a_y = i (a_+ - a_-)/sqrt2
  return {(ap + am) * cplx(kInvSqrt2), (ap - am) * (kI * kInvSqrt2)};
}

double verify_basis_equivalence(const Chi3Params& p) {
  const P linear = build_chi3_linear(p, circular_pump_config(std::sqrt(p.rho2)));
  const P rewritten = substitute(linear, circular_space(), linear_to_circular_images());
  return (rewritten - build_chi3_circular(p)).without_constant().max_abs_coefficient();
}

OperatorPolynomial CavityModel::number_difference() const {
  const ModeSpace& s = hamiltonian.space();
  return P::number(s, signal_a) - P::number(s, signal_b);
}

CavityModel opo_model(const OpoParams& p) {
  p.validate();
  CavityModel m;
  m.kind = ModelKind::opo;
  m.hamiltonian = build_opo_hamiltonian(p);
  m.damping = {p.gamma_s, p.gamma_s, p.gamma_p};
  m.charges = {1, -1, 0};
  m.signal_a = 0;
  m.signal_b = 1;
  m.gamma_s = p.gamma_s;
  return m;
}

CavityModel opo_classical_pump_model(const OpoParams& p) {
  p.validate();
  CavityModel m;
  m.kind = ModelKind::opo;
  m.hamiltonian = build_opo_classical_pump(p);
  m.damping = {p.gamma_s, p.gamma_s};
  m.charges = {1, -1};
  m.gamma_s = p.gamma_s;
  return m;
}

CavityModel chi3_model(const Chi3Params& p) {
  CavityModel m;
  m.kind = ModelKind::chi3;
  m.hamiltonian = build_chi3_circular(p);
  m.damping = {p.gamma_s, p.gamma_s};
  m.charges = {1, -1};
  m.gamma_s = p.gamma_s;
  return m;
}

std::vector<cplx> mode_weights(const CavityModel& model, const JonesVector& e) {
  std::vector<cplx> k(model.modes(), cplx{});
  if (model.circular_basis()) {
    const auto [cp, cm] = to_circular(e);
    k[model.signal_a] = std::conj(cp);
    k[model.signal_b] = std::conj(cm);
  } else {
    k[model.signal_a] = std::conj(e.cx);
    k[model.signal_b] = std::conj(e.cy);
  }
  return k;
}

JonesVector field_polarization(const CavityModel& model, std::span<const cplx> alpha) {
  if (model.circular_basis()) return to_linear(alpha[model.signal_a], alpha[model.signal_b]);
  return {alpha[model.signal_a], alpha[model.signal_b]};
}

}  // namespace spsb
