#pragma once

#include <string>
#include <vector>

#include "spsb/operator_algebra.hpp"
#include "spsb/polarization.hpp"

namespace spsb {

// hbar = 1 throughout: every Hamiltonian coefficient is a rate.

struct OpoParams {
  double pump_amplitude = 1.5;  // E_p
  double chi = 1.0;
  double gamma_p = 1.0;
  double gamma_s = 1.0;

  void validate() const;
};

/// Four-wave-mixing cavity. `g` keeps the sign of the microscopic definition
/// (negative for a positive chi_xxxx); the symmetry-broken branch needs
/// g * delta < 0.
struct Chi3Params {
  double delta = 2.0;
  double g = -1.0;
  double rho2 = 0.7;
  double A = 1.0 / 3.0;
  double B = 1.0 / 3.0;
  double gamma_s = 1.0;

  void validate() const;
};

struct PhysicalParams {
  double n = 1.5;
  double L = 0.1;
  double l = 0.01;
  double w = 50e-6;
  double omega_s = 1.77e15;
  double chi_xxxx = 1e-22;
  double epsilon0 = 8.8541878128e-12;
  double hbar = 1.054571817e-34;
  double speed_of_light = 299792458.0;
};

struct Coupling {
  double g = 0.0;
  double field_norm2 = 0.0;  // F^2
  std::vector<std::string> warnings;
};

/// F^2 = hbar w_s / (2 eps0 n L),  g = -8 eps0 l chi_xxxx F^4 / (hbar pi w^2).
Coupling g_from_physical(const PhysicalParams& p);

struct PumpAmplitudes {
  cplx a1x, a1y, a2x, a2y;

  JonesVector pump1() const { return {a1x, a1y}; }
  JonesVector pump2() const { return {a2x, a2y}; }
};

/// Orthogonal circular pumps: a1x = a2x = rho/sqrt2, a1y = -a2y = i rho/sqrt2.
PumpAmplitudes circular_pump_config(double rho);

ModeSpace opo_space();        // sig_x, sig_y, pump_b
ModeSpace linear_space();     // sig_x, sig_y
ModeSpace circular_space();   // sig_plus, sig_minus

OperatorPolynomial build_opo_hamiltonian(const OpoParams& p);
/// Signal-only OPO with the pump frozen at beta = E_p / gamma_p.
OperatorPolynomial build_opo_classical_pump(const OpoParams& p);
OperatorPolynomial build_chi3_linear(const Chi3Params& p, const PumpAmplitudes& pumps);
OperatorPolynomial build_chi3_circular(const Chi3Params& p);

/// Rewrites the linear-basis Hamiltonian (circular pumps of intensity rho2) in
/// the circular basis and returns the largest coefficient of its difference
/// with build_chi3_circular, constants excluded.
double verify_basis_equivalence(const Chi3Params& p);

/// Images of a_x, a_y in the circular space.
std::vector<OperatorPolynomial> linear_to_circular_images();

/// A damped cavity ready for mean-field and fluctuation analysis.
struct CavityModel {
  ModelKind kind = ModelKind::chi3;
  OperatorPolynomial hamiltonian;
  std::vector<double> damping;  // amplitude decay rate per mode
  std::vector<int> charges;     // generator of the polarization symmetry
  int signal_a = 0;             // charge +1 signal mode
  int signal_b = 1;             // charge -1 signal mode
  double gamma_s = 1.0;

  int modes() const { return hamiltonian.space().size(); }
  bool circular_basis() const { return hamiltonian.space().contains(ModeLabel::sig_plus); }
  /// Photon-number difference of the signal pair.
  OperatorPolynomial number_difference() const;
};

CavityModel opo_model(const OpoParams& p);
CavityModel opo_classical_pump_model(const OpoParams& p);
CavityModel chi3_model(const Chi3Params& p);

/// Weights k_m with a_e = sum_m k_m a_m for the polarization mode e of the
/// signal field, expressed on the model's own modes (zero on the pump).
std::vector<cplx> mode_weights(const CavityModel& model, const JonesVector& e);

/// Jones vector of the classical signal field of a state (not normalized).
JonesVector field_polarization(const CavityModel& model, std::span<const cplx> alpha);

}  // namespace spsb
