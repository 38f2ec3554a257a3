#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "spsb/fluctuations.hpp"
#include "spsb/models.hpp"

namespace spsb {

inline constexpr long kDefaultDimensionCap = 4096;

struct TruncatedSpace {
  std::vector<int> cutoffs;
  long cap = kDefaultDimensionCap;

  /// Throws std::invalid_argument for a cutoff below 1 or a dimension above cap.
  explicit TruncatedSpace(std::vector<int> c, long dimension_cap = kDefaultDimensionCap);
  long dimension() const { return fock().dimension(); }
  FockSpace fock() const { return FockSpace(cutoffs); }
};

/// `full` keeps every |i><j|; `charge_sector` keeps pairs with equal charge,
/// which holds every steady state of a symmetric model.
enum class Support { full, charge_sector };

using SparseSuperoperator = Eigen::SparseMatrix<cplx, Eigen::ColMajor, long>;

/// L(rho) = -i[H, rho] + sum_m gamma_m (2 a_m rho a_m^dag - a_m^dag a_m rho - rho a_m^dag a_m)
/// on the vectorized density matrix restricted to `support`.
struct Liouvillian {
  std::vector<int> cutoffs;
  long hilbert_dimension = 0;
  std::vector<std::pair<long, long>> support;  // (ket, bra)
  SparseSuperoperator matrix;

  /// max over columns of |sum of diagonal-row entries|, zero for a trace-preserving L.
  double trace_defect() const;
  Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) const;
  Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v) const;
};

Liouvillian liouvillian(const OperatorPolynomial& h, std::span<const double> damping, const TruncatedSpace& space,
                        Support support = Support::full, std::span<const int> charges = {});
Liouvillian liouvillian(const CavityModel& model, const TruncatedSpace& space, Support support = Support::charge_sector);

struct DensityCheck {
  double hermiticity = 0.0;     // max |rho - rho^dag|
  double trace_error = 0.0;     // |tr rho - 1|
  double min_eigenvalue = 0.0;
  bool ok() const { return hermiticity <= 1e-10 && trace_error <= 1e-8 && min_eigenvalue >= -1e-8; }
};

struct DensityMatrix {
  std::vector<int> cutoffs;
  Eigen::MatrixXcd entries;

  DensityCheck check() const;
  /// Throws std::domain_error when check() fails.
  void validate() const;
};

DensityMatrix vacuum(const TruncatedSpace& space);

struct SteadyStateResult {
  DensityMatrix rho;
  double residual = 0.0;  // max |L rho|
  /// Dimension of the null space of L: exact for small supports, otherwise 1
  /// or a lower bound of 2 from an inverse-iteration estimate.
  long null_dimension = 1;
  bool unique() const { return null_dimension == 1; }
};

/// Null vector of L normalized to unit trace, via sparse LU with one diagonal
/// row replaced by the trace functional. Throws std::runtime_error if the
/// factorization fails (degenerate null space).
SteadyStateResult steady_state(const Liouvillian& l);

/// RK4 integration of d rho/dt = L rho.
DensityMatrix evolve(const Liouvillian& l, const DensityMatrix& rho0, double t_final, double dt);

/// Frobenius norm of [C, H] on the truncation-safe subspace (total photon
/// number at most min cutoff - deg H).
double conservation_check(const OperatorPolynomial& h, const OperatorPolynomial& conserved, std::span<const int> cutoffs);

/// tr(rho O). Throws std::invalid_argument on a cutoff mismatch.
cplx moments(const DensityMatrix& rho, const OperatorPolynomial& obs);

/// max |U rho U^dag - rho| for U = exp(i theta sum_m q_m n_m).
double symmetry_defect(const DensityMatrix& rho, std::span<const int> charges, double theta);

struct ComparisonRow {
  std::string point;
  std::string moment;
  cplx oracle;
  cplx linearized;
  double relative_deviation = 0.0;
};

struct OracleComparison {
  std::vector<ComparisonRow> rows;
  double max_relative_deviation = 0.0;
  /// max relative change of the oracle moments when every cutoff is doubled;
  /// negative when the doubled run was skipped.
  double cutoff_drift = -1.0;
  /// max |oracle| over moments whose linearized value vanishes by symmetry.
  double symmetric_zero_error = 0.0;
};

/// Second moments <a_m^dag a_n> and <a_m a_n> of the signal modes from the
/// Fock steady state against the Lyapunov covariance of the trivial state.
OracleComparison compare_with_linearized(const CavityModel& model, std::span<const int> cutoffs,
                                         const std::string& label, bool double_cutoffs);

}  // namespace spsb
