#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spsb/models.hpp"

namespace spsb {

struct ClassicalState {
  std::vector<cplx> amplitudes;

  double photon_number(int mode) const { return std::norm(amplitudes.at(mode)); }
};

/// dalpha_m/dt = -gamma_m alpha_m - i dH/d conj(alpha_m), with H the classical
/// symbol of the normally ordered Hamiltonian.
class VectorField {
 public:
  explicit VectorField(const CavityModel& model);

  std::vector<cplx> operator()(std::span<const cplx> alpha) const;
  double residual(std::span<const cplx> alpha) const;

  /// dF_m/dalpha_n and dF_m/dconj(alpha_n).
  void jacobian(std::span<const cplx> alpha, Eigen::MatrixXcd& d_alpha, Eigen::MatrixXcd& d_conj) const;

  /// Real Jacobian in quadrature coordinates ordered x_1, y_1, x_2, y_2, ...
  /// with x = 2 Re(alpha), y = 2 Im(alpha).
  Eigen::MatrixXd quadrature_jacobian(std::span<const cplx> alpha) const;

  const CavityModel& model() const { return model_; }

 private:
  CavityModel model_;
  std::vector<OperatorPolynomial> grad_conj_;                // dH/d conj(alpha_m)
  std::vector<std::vector<OperatorPolynomial>> hess_mixed_;  // d2H/d conj(alpha_m) d alpha_n
  std::vector<std::vector<OperatorPolynomial>> hess_conj_;   // d2H/d conj(alpha_m) d conj(alpha_n)
};

VectorField classical_eom(const CavityModel& model);

/// Closed-form existence interval of the symmetry-broken chi3 branch in rho2,
/// written with |g|: lower = gamma_s / 2|g|, upper = (2 delta + sqrt(delta^2 - 3 gamma_s^2)) / 6|g|.
struct ThresholdInterval {
  double lower = 0.0;
  double upper = 0.0;
  /// Where the branch actually starts: `lower` for delta >= 2 gamma_s, else the
  /// bifurcation point (2 delta - sqrt(delta^2 - 3 gamma_s^2)) / 6|g|.
  double onset = 0.0;
  bool exists = false;
};

ThresholdInterval threshold_interval(const Chi3Params& p);
/// E_p threshold gamma_p gamma_s / chi.
double opo_threshold(const OpoParams& p);

struct SolverOptions {
  double stationarity_tol = 1e-10;
  int max_iterations = 200;
  /// Signal intensity seeds, in units of the model's natural intensity scale.
  std::vector<double> intensity_seeds{1e-4, 1e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0};
  int phase_seeds = 4;
};

struct SteadyStates {
  ClassicalState trivial;
  /// Gauge-fixed representatives (equal signal phases in (-pi/2, pi/2]), largest intensity first.
  std::vector<ClassicalState> bright;
  /// Seeds whose Newton run stalled without reaching a solution.
  int failed_seeds = 0;

  bool nonzero_exists() const { return !bright.empty(); }
};

/// Trivial state plus every nonzero branch representative found by multi-seed
/// Newton in the theta = 0 gauge. Throws std::runtime_error if the trivial
/// state itself cannot be made stationary.
SteadyStates steady_states(const CavityModel& model, const SolverOptions& options = {});

/// Image of `state` under a_m -> a_m exp(i q_m theta).
ClassicalState rotate(const CavityModel& model, const ClassicalState& state, double theta);
/// d/dtheta of rotate(model, state, theta) at theta = 0, in quadrature coordinates.
Eigen::VectorXd orbit_tangent(const CavityModel& model, const ClassicalState& state);

struct StabilityReport {
  std::vector<cplx> eigenvalues;  // descending real part
  std::optional<int> goldstone_index;
  int near_zero_count = 0;
  bool stable = false;
  double max_real_excluding_goldstone = 0.0;
  /// Unit null vector of the Jacobian when a Goldstone mode exists.
  Eigen::VectorXd goldstone_vector;
};

inline constexpr double kGoldstoneTol = 1e-8;
inline constexpr double kStabilityMargin = 1e-9;

/// Throws std::invalid_argument if the state is not stationary to 1e-8.
StabilityReport stability(const CavityModel& model, const ClassicalState& state);

/// |<v, t>| / (|v| |t|)
double alignment(const Eigen::VectorXd& v, const Eigen::VectorXd& t);

struct SweepRow {
  double control = 0.0;
  double amplitude_a = 0.0;
  double amplitude_b = 0.0;
  double max_real_lambda = 0.0;
  bool nonzero_exists = false;
  bool trivial_stable = false;
  bool bright_stable = false;
  int branches = 0;
  int failed_seeds = 0;
  std::string note;  // empty unless the point failed
};

/// Evaluates each control value independently (concurrently when threads > 1)
/// and returns rows in grid order. Reported amplitudes and eigenvalues belong to
/// the largest-intensity branch when one exists, else to the trivial state.
/// A point whose analysis throws is returned with the message in `note`.
std::vector<SweepRow> sweep(const std::function<CavityModel(double)>& model_at, std::span<const double> grid,
                            int threads = 0, const SolverOptions& options = {});

/// rho2 values where nonzero-branch existence changes inside [lo, hi]: a scan
/// over `points` values followed by bisection to `tol`.
std::vector<double> existence_boundaries(const std::function<CavityModel(double)>& model_at, double lo, double hi,
                                         int points, double tol, const SolverOptions& options = {});

}  // namespace spsb
