#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spsb/meanfield.hpp"

namespace spsb {

// Quadratures X = a + a^dag, Y = -i(a - a^dag), vacuum variance 1, ordered
// x_1, y_1, x_2, y_2, ... as in VectorField::quadrature_jacobian.

struct GoldstonePair {
  Eigen::VectorXd right;  // A t = 0
  Eigen::VectorXd left;   // l^T A = 0, normalized so l^T t = 1
};

struct DriftDiffusion {
  Eigen::MatrixXd drift;              // A
  Eigen::MatrixXd diffusion;          // symmetric input noise 2 Gamma, PSD
  Eigen::MatrixXd normal_diffusion;   // A + A^T + 2 Gamma, zero for a passive cavity
  std::vector<double> damping;
  std::optional<GoldstonePair> goldstone;

  int modes() const { return static_cast<int>(damping.size()); }
};

/// Throws std::invalid_argument if the state is not stationary to 1e-8.
DriftDiffusion linearize(const CavityModel& model, const ClassicalState& state);

/// Symmetrized quadrature covariance solving A S + S A^T + D = 0. With a
/// Goldstone mode the equation is solved on the complement of the orbit
/// direction, with D replaced by P D P^T for P = I - t l^T. Throws
/// std::domain_error when the (reduced) drift is not Hurwitz.
Eigen::MatrixXd covariance_lyapunov(const DriftDiffusion& dd);

/// max |A S + S A^T + P D P^T|.
double lyapunov_residual(const DriftDiffusion& dd, const Eigen::MatrixXd& sigma);

/// <da_m^dag da_n> and <da_m da_n> from a symmetrized covariance.
struct NormalMoments {
  Eigen::MatrixXcd number;  // N(m, n) = <da_m^dag da_n>
  Eigen::MatrixXcd pair;    // P(m, n) = <da_m da_n>
};
NormalMoments normal_moments(const Eigen::MatrixXd& sigma);

/// Real vector c with c . X = a_e e^{-i phi} + h.c. for a_e = sum_m k_m a_m.
Eigen::VectorXd quadrature_vector(std::span<const cplx> weights, double phi);

struct NoiseSpectrum {
  double phi = 0.0;
  JonesVector mode;
  std::vector<std::pair<double, double>> samples;  // (omega, V)
};

/// Shot-noise normalized output spectrum of the quadrature c . X of the field
/// leaving the cavity. At omega = 0 with a Goldstone mode the value is +inf
/// when c sees the diffusing direction.
double quadrature_spectrum(const DriftDiffusion& dd, const Eigen::VectorXd& c, double omega);

NoiseSpectrum output_spectrum(const DriftDiffusion& dd, const CavityModel& model, const JonesVector& mode, double phi,
                              std::span<const double> omegas);

struct OptimalQuadrature {
  double phi = 0.0;        // in [0, pi)
  double v_min = 0.0;      // V(0) at phi
  double v_conjugate = 0;  // V(0) at phi + pi/2
};

/// Minimizes V(0) over the quadrature angle of the mode with weights k.
OptimalQuadrature optimal_quadrature(const DriftDiffusion& dd, std::span<const cplx> weights);

/// Polarization orthogonal to the mean signal field of the state.
JonesVector dark_polarization(const CavityModel& model, const ClassicalState& state);

struct SqueezingRow {
  Chi3Params params;
  double v_min = 0.0;
  double phi_opt = 0.0;
  double v_conjugate = 0.0;
  double v_bright = 0.0;  // min over phi of the bright-mode V(0)
  bool on_branch = false;
  std::string note;
};

/// One row per point, in input order. Points without a stable bright branch
/// are flagged with on_branch = false.
std::vector<SqueezingRow> dark_mode_squeezing(std::span<const Chi3Params> points, int threads = 0);

/// Intensity-difference spectrum of the above-threshold OPO signal beams.
/// Throws std::domain_error below threshold.
NoiseSpectrum twin_beam_intensity_spectrum(const OpoParams& p, std::span<const double> omegas);

/// 0 followed by 401 log-spaced values over [1e-3, 1e3] gamma_s.
std::vector<double> default_omega_grid(double gamma_s);

}  // namespace spsb
