#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace spsb {

using cplx = std::complex<double>;

enum class ModeLabel : std::uint8_t { sig_x, sig_y, sig_plus, sig_minus, pump_b };

std::string to_string(ModeLabel label);

struct ModeId {
  int index = 0;
  ModeLabel label = ModeLabel::sig_x;
};

/// Ordered list of the bosonic modes a polynomial lives on. Labels are unique,
/// and the linear (x, y) and circular (+, -) signal bases never share a space.
class ModeSpace {
 public:
  ModeSpace() = default;
  ModeSpace(std::initializer_list<ModeLabel> labels);
  explicit ModeSpace(std::vector<ModeLabel> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  ModeLabel label(int index) const { return labels_.at(index); }
  ModeId mode(int index) const { return {index, labels_.at(index)}; }
  /// Index of `label`, throws std::out_of_range when absent.
  int index_of(ModeLabel label) const;
  bool contains(ModeLabel label) const;
  const std::vector<ModeLabel>& labels() const { return labels_; }

  bool operator==(const ModeSpace&) const = default;

 private:
  void validate() const;
  std::vector<ModeLabel> labels_;
};

/// Powers (creation, annihilation) per mode; creation factors stand left of
/// annihilation factors.
struct Monomial {
  std::vector<std::uint8_t> powers;  // [c0, n0, c1, n1, ...]

  explicit Monomial(int modes = 0) : powers(2 * modes, 0) {}
  int creation(int m) const { return powers[2 * m]; }
  int annihilation(int m) const { return powers[2 * m + 1]; }
  void set(int m, int cre, int ann);
  int degree() const;
  bool is_constant() const;
  Monomial adjoint() const;

  auto operator<=>(const Monomial&) const = default;
};

/// Normally ordered polynomial in the mode operators of one ModeSpace.
class OperatorPolynomial {
 public:
  using TermMap = std::map<Monomial, cplx>;

  OperatorPolynomial() = default;
  explicit OperatorPolynomial(ModeSpace space) : space_(std::move(space)) {}

  static OperatorPolynomial constant(const ModeSpace& space, cplx value);
  static OperatorPolynomial identity(const ModeSpace& space) { return constant(space, 1.0); }
  static OperatorPolynomial annihilator(const ModeSpace& space, int mode);
  static OperatorPolynomial creator(const ModeSpace& space, int mode);
  static OperatorPolynomial number(const ModeSpace& space, int mode);
  /// coeff * prod_m (a_m^dag)^{cre_m} (a_m)^{ann_m}
  static OperatorPolynomial monomial(const ModeSpace& space, const Monomial& key, cplx coeff = 1.0);

  const ModeSpace& space() const { return space_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  cplx coefficient(const Monomial& key) const;

  /// Adds `value` to the coefficient of `key`, erasing it when the sum is exactly zero.
  void accumulate(const Monomial& key, cplx value);

  int degree() const;
  int max_creation(int mode) const;
  int max_annihilation(int mode) const;

  OperatorPolynomial adjoint() const;
  bool is_hermitian(double tol = 1e-14) const;
  /// Largest coefficient magnitude, 0 for the empty polynomial.
  double max_abs_coefficient() const;
  /// Removes the operator-independent term.
  OperatorPolynomial without_constant() const;
  /// Drops coefficients with |c| <= tol.
  OperatorPolynomial pruned(double tol) const;

  OperatorPolynomial& operator+=(const OperatorPolynomial& other);
  OperatorPolynomial& operator-=(const OperatorPolynomial& other);
  OperatorPolynomial& operator*=(cplx scale);

  friend OperatorPolynomial operator+(OperatorPolynomial a, const OperatorPolynomial& b) { return a += b; }
  friend OperatorPolynomial operator-(OperatorPolynomial a, const OperatorPolynomial& b) { return a -= b; }
  friend OperatorPolynomial operator*(OperatorPolynomial a, cplx s) { return a *= s; }
  friend OperatorPolynomial operator*(cplx s, OperatorPolynomial a) { return a *= s; }
  friend OperatorPolynomial operator*(const OperatorPolynomial& a, const OperatorPolynomial& b);

 private:
  void require_same_space(const OperatorPolynomial& other) const;

  ModeSpace space_;
  TermMap terms_;
};

OperatorPolynomial multiply(const OperatorPolynomial& p, const OperatorPolynomial& q);
OperatorPolynomial commutator(const OperatorPolynomial& p, const OperatorPolynomial& q);

/// Multiplies each coefficient by exp(i theta sum_m q_m (ann_m - cre_m)), which is
/// the image of P under a_m -> a_m exp(i q_m theta).
OperatorPolynomial phase_rotate(const OperatorPolynomial& p, double theta, std::span<const int> charges);

/// Max coefficient magnitude of p - q.
double coefficient_distance(const OperatorPolynomial& p, const OperatorPolynomial& q);

/// Rewrites `p` in `target` by replacing each annihilator a_m of p's space with
/// the linear combination annihilator_images[m] (a polynomial of degree one in
/// the target annihilators). Creators are replaced by the adjoint images.
OperatorPolynomial substitute(const OperatorPolynomial& p, const ModeSpace& target,
                              const std::vector<OperatorPolynomial>& annihilator_images);

// Classical symbol: a_m -> alpha_m, a_m^dag -> conj(alpha_m). Exact for the
// expectation value in a coherent state because p is normally ordered.
cplx classical_value(const OperatorPolynomial& p, std::span<const cplx> alpha);
/// d/d alpha_m of the symbol, returned as a polynomial.
OperatorPolynomial d_dalpha(const OperatorPolynomial& p, int mode);
/// d/d conj(alpha_m) of the symbol, returned as a polynomial.
OperatorPolynomial d_dalpha_conj(const OperatorPolynomial& p, int mode);

/// Truncated Fock space: mode m keeps |0>..|cutoffs[m]>. Mode 0 is the most
/// significant factor of the tensor product.
struct FockSpace {
  std::vector<int> cutoffs;

  explicit FockSpace(std::vector<int> c);
  long dimension() const;
  std::vector<int> occupation(long index) const;
  long index(std::span<const int> occupation) const;
  /// Indices whose total photon number is at most min(cutoffs) - margin.
  std::vector<long> safe_subspace(int margin) const;
};

struct FockMatrix {
  std::vector<int> cutoffs;
  Eigen::MatrixXcd entries;
};

using SparseOperator = Eigen::SparseMatrix<cplx, Eigen::ColMajor, long>;

/// Sparse Fock representation a|n> = sqrt(n)|n-1>. Throws std::invalid_argument
/// when a cutoff is below the largest power of its mode in p.
SparseOperator to_sparse(const OperatorPolynomial& p, const FockSpace& space);
FockMatrix to_matrix(const OperatorPolynomial& p, std::span<const int> cutoffs);

/// Rows and columns `indices` of m.
Eigen::MatrixXcd restrict_to(const Eigen::MatrixXcd& m, const std::vector<long>& indices);

}  // namespace spsb
