#include "spsb/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/SparseLU>

namespace spsb {

namespace {

using Triplet = Eigen::Triplet<cplx, long>;

std::vector<int> total_charges(const FockSpace& fs, std::span<const int> charges) {
  const long dim = fs.dimension();
  std::vector<int> q(dim, 0);
  for (long i = 0; i < dim; ++i) {
    const auto occ = fs.occupation(i);
    for (std::size_t m = 0; m < occ.size(); ++m) q[i] += charges[m] * occ[m];
  }
  return q;
}

class SupportIndex {
 public:
  SupportIndex(long dim, const std::vector<std::pair<long, long>>& support, bool full) : dim_(dim), full_(full) {
    if (!full_) {
      map_.reserve(support.size() * 2);
      for (std::size_t i = 0; i < support.size(); ++i) map_.emplace(support[i].second * dim + support[i].first, i);
    }
  }
  long operator()(long ket, long bra) const {
    if (full_) return bra * dim_ + ket;
    const auto it = map_.find(bra * dim_ + ket);
    if (it == map_.end()) throw std::logic_error("liouvillian: support is not invariant under the dynamics");
    return it->second;
  }

 private:
  long dim_;
  bool full_;
  std::unordered_map<long, long> map_;
};

double max_column_sum(const SparseSuperoperator& m) {
  double best = 0.0;
  for (long c = 0; c < m.outerSize(); ++c) {
    double s = 0.0;
    for (SparseSuperoperator::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

TruncatedSpace::TruncatedSpace(std::vector<int> c, long dimension_cap) : cutoffs(std::move(c)), cap(dimension_cap) {
  if (cutoffs.empty()) throw std::invalid_argument("TruncatedSpace: no modes");
  for (int n : cutoffs)
    if (n < 1) throw std::invalid_argument("TruncatedSpace: cutoffs must be at least 1");
  if (dimension() > cap)
    throw std::invalid_argument("TruncatedSpace: dimension " + std::to_string(dimension()) + " exceeds cap " +
                                std::to_string(cap));
}

double Liouvillian::trace_defect() const {
  std::vector<char> diag(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) diag[i] = support[i].first == support[i].second;
  double worst = 0.0;
  for (long c = 0; c < matrix.outerSize(); ++c) {
    cplx s{};
    for (SparseSuperoperator::InnerIterator it(matrix, c); it; ++it)
      if (diag[it.row()]) s += it.value();
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

Eigen::VectorXcd Liouvillian::vectorize(const Eigen::MatrixXcd& rho) const {
  Eigen::VectorXcd v(support.size());
  for (std::size_t i = 0; i < support.size(); ++i) v(i) = rho(support[i].first, support[i].second);
  return v;
}

Eigen::MatrixXcd Liouvillian::unvectorize(const Eigen::VectorXcd& v) const {
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(hilbert_dimension, hilbert_dimension);
  for (std::size_t i = 0; i < support.size(); ++i) rho(support[i].first, support[i].second) = v(i);
  return rho;
}

Liouvillian liouvillian(const OperatorPolynomial& h, std::span<const double> damping, const TruncatedSpace& space,
                        Support support, std::span<const int> charges) {
  const int M = h.space().size();
  if (static_cast<int>(damping.size()) != M || static_cast<int>(space.cutoffs.size()) != M)
    throw std::invalid_argument("liouvillian: damping and cutoffs must have one entry per mode");
  if (support == Support::charge_sector && static_cast<int>(charges.size()) != M)
    throw std::invalid_argument("liouvillian: charge sector needs one charge per mode");

  const FockSpace fs = space.fock();
  const long D = fs.dimension();
  Liouvillian L;
  L.cutoffs = space.cutoffs;
  L.hilbert_dimension = D;

  const bool full = support == Support::full;
  std::vector<int> q;
  if (!full) q = total_charges(fs, charges);
  for (long bra = 0; bra < D; ++bra)
    for (long ket = 0; ket < D; ++ket)
      if (full || q[ket] == q[bra]) L.support.emplace_back(ket, bra);
  const SupportIndex index(D, L.support, full);

  // K = -iH - sum gamma_m n_m acts from the left; rho K^dag from the right.
  SparseOperator K = to_sparse(h, fs) * cplx(0.0, -1.0);
  std::vector<SparseOperator> jumps;
  for (int m = 0; m < M; ++m) {
    if (damping[m] == 0.0) continue;
    K -= to_sparse(OperatorPolynomial::number(h.space(), m), fs) * cplx(damping[m]);
    jumps.push_back(to_sparse(OperatorPolynomial::annihilator(h.space(), m), fs) * cplx(std::sqrt(2.0 * damping[m])));
  }
  K.makeCompressed();

  std::vector<Triplet> trip;
  for (std::size_t col = 0; col < L.support.size(); ++col) {
    const auto [k, l] = L.support[col];
    for (SparseOperator::InnerIterator it(K, k); it; ++it) trip.emplace_back(index(it.row(), l), col, it.value());
    for (SparseOperator::InnerIterator it(K, l); it; ++it)
      trip.emplace_back(index(k, it.row()), col, std::conj(it.value()));
    for (const auto& J : jumps)
      for (SparseOperator::InnerIterator ik(J, k); ik; ++ik)
        for (SparseOperator::InnerIterator jl(J, l); jl; ++jl)
          trip.emplace_back(index(ik.row(), jl.row()), col, ik.value() * std::conj(jl.value()));
  }
  const long n = static_cast<long>(L.support.size());
  L.matrix.resize(n, n);
  L.matrix.setFromTriplets(trip.begin(), trip.end());
  L.matrix.prune(cplx{}, 0.0);
  L.matrix.makeCompressed();
  return L;
}

Liouvillian liouvillian(const CavityModel& model, const TruncatedSpace& space, Support support) {
  return liouvillian(model.hamiltonian, model.damping, space, support, model.charges);
}

DensityCheck DensityMatrix::check() const {
  DensityCheck c;
  c.hermiticity = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  c.trace_error = std::abs(entries.trace() - 1.0);
  const Eigen::MatrixXcd h = 0.5 * (entries + entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  c.min_eigenvalue = es.eigenvalues().minCoeff();
  return c;
}

void DensityMatrix::validate() const {
  const auto c = check();
  if (!c.ok())
    throw std::domain_error("density matrix invalid: hermiticity " + std::to_string(c.hermiticity) + ", trace error " +
                            std::to_string(c.trace_error) + ", min eigenvalue " + std::to_string(c.min_eigenvalue));
}

DensityMatrix vacuum(const TruncatedSpace& space) {
  const long D = space.dimension();
  DensityMatrix rho{space.cutoffs, Eigen::MatrixXcd::Zero(D, D)};
  rho.entries(0, 0) = 1.0;
  return rho;
}

SteadyStateResult steady_state(const Liouvillian& l) {
  const long n = static_cast<long>(l.support.size());
  long r0 = -1;
  for (long i = 0; i < n; ++i)
    if (l.support[i].first == 0 && l.support[i].second == 0) r0 = i;
  if (r0 < 0) throw std::invalid_argument("steady_state: support lacks the vacuum projector");

  using SolverMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;
  std::vector<Eigen::Triplet<cplx, int>> trip;
  trip.reserve(l.matrix.nonZeros() + n);
  for (long c = 0; c < l.matrix.outerSize(); ++c)
    for (SparseSuperoperator::InnerIterator it(l.matrix, c); it; ++it)
      if (it.row() != r0) trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(c), it.value());
  for (long i = 0; i < n; ++i)
    if (l.support[i].first == l.support[i].second) trip.emplace_back(static_cast<int>(r0), static_cast<int>(i), 1.0);
  SolverMatrix A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  Eigen::SparseLU<SolverMatrix> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("steady_state: factorization failed (degenerate null space)");
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs(r0) = 1.0;
  const Eigen::VectorXcd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw std::runtime_error("steady_state: solve failed");

  SteadyStateResult out;
  out.residual = (l.matrix * x).cwiseAbs().maxCoeff();
  Eigen::MatrixXcd rho = l.unvectorize(x);
  rho = 0.5 * (rho + rho.adjoint());
  out.rho = DensityMatrix{l.cutoffs, rho};

  if (n <= 800) {
    Eigen::FullPivLU<Eigen::MatrixXcd> dense(Eigen::MatrixXcd(l.matrix));
    dense.setThreshold(1e-10);
    out.null_dimension = n - dense.rank();
  } else {
    // Inverse iteration on the bordered matrix: a near-zero eigenvalue there
    // means a second null vector of L.
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (long i = 0; i < n; ++i) v(i) = cplx(g(rng), g(rng));
    v.normalize();
    double growth = 0.0;
    for (int it = 0; it < 30; ++it) {
      Eigen::VectorXcd w = lu.solve(v);
      growth = w.norm();
      if (!std::isfinite(growth)) break;
      v = w / growth;
    }
    const double scale = max_column_sum(l.matrix) + 1.0;
    out.null_dimension = (!std::isfinite(growth) || 1.0 / growth < 1e-12 * scale) ? 2 : 1;
  }
  return out;
}

DensityMatrix evolve(const Liouvillian& l, const DensityMatrix& rho0, double t_final, double dt) {
  if (!(t_final >= 0.0) || !(dt > 0.0)) throw std::invalid_argument("evolve: bad time step");
  const double norm = max_column_sum(l.matrix);
  if (norm > 0.0) dt = std::min(dt, 1.0 / norm);
  const long steps = static_cast<long>(std::ceil(t_final / dt));
  if (steps == 0) return rho0;
  const double h = t_final / steps;
  Eigen::VectorXcd v = l.vectorize(rho0.entries);
  for (long s = 0; s < steps; ++s) {
    const Eigen::VectorXcd k1 = l.matrix * v;
    const Eigen::VectorXcd k2 = l.matrix * (v + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = l.matrix * (v + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = l.matrix * (v + h * k3);
    v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return DensityMatrix{l.cutoffs, l.unvectorize(v)};
}

double conservation_check(const OperatorPolynomial& h, const OperatorPolynomial& conserved, std::span<const int> cutoffs) {
  const FockSpace fs(std::vector<int>(cutoffs.begin(), cutoffs.end()));
  const SparseOperator H = to_sparse(h, fs);
  const SparseOperator C = to_sparse(conserved, fs);
  const SparseOperator comm = SparseOperator(C * H) - SparseOperator(H * C);
  const auto safe = fs.safe_subspace(h.degree());
  std::vector<char> keep(fs.dimension(), 0);
  for (long i : safe) keep[i] = 1;
  double s = 0.0;
  for (long c = 0; c < comm.outerSize(); ++c)
    for (SparseOperator::InnerIterator it(comm, c); it; ++it)
      if (keep[it.row()] && keep[c]) s += std::norm(it.value());
  return std::sqrt(s);
}

cplx moments(const DensityMatrix& rho, const OperatorPolynomial& obs) {
  if (static_cast<int>(rho.cutoffs.size()) != obs.space().size())
    throw std::invalid_argument("moments: observable and state live on different mode counts");
  const FockSpace fs(rho.cutoffs);
  if (fs.dimension() != rho.entries.rows()) throw std::invalid_argument("moments: dimension mismatch");
  const SparseOperator O = to_sparse(obs, fs);
  cplx s{};
  for (long c = 0; c < O.outerSize(); ++c)
    for (SparseOperator::InnerIterator it(O, c); it; ++it) s += rho.entries(c, it.row()) * it.value();
  return s;
}

double symmetry_defect(const DensityMatrix& rho, std::span<const int> charges, double theta) {
  const FockSpace fs(rho.cutoffs);
  const auto q = total_charges(fs, charges);
  double worst = 0.0;
  for (long j = 0; j < rho.entries.cols(); ++j)
    for (long i = 0; i < rho.entries.rows(); ++i) {
      const cplx phase = std::polar(1.0, theta * (q[i] - q[j]));
      worst = std::max(worst, std::abs(phase * rho.entries(i, j) - rho.entries(i, j)));
    }
  return worst;
}

namespace {

struct MomentSpec {
  std::string name;
  OperatorPolynomial op;
  cplx linearized;
};

std::vector<MomentSpec> signal_moments(const CavityModel& model, const NormalMoments& nm) {
  using P = OperatorPolynomial;
  const ModeSpace& s = model.hamiltonian.space();
  const int a = model.signal_a, b = model.signal_b;
  const std::string la = to_string(s.label(a)), lb = to_string(s.label(b));
  const P aa = P::annihilator(s, a), ab = P::annihilator(s, b);
  return {
      {"adag_" + la + " a_" + la, P::number(s, a), nm.number(a, a)},
      {"adag_" + lb + " a_" + lb, P::number(s, b), nm.number(b, b)},
      {"a_" + la + " a_" + lb, aa * ab, nm.pair(a, b)},
      {"a_" + la + " a_" + la, aa * aa, nm.pair(a, a)},
      {"a_" + lb + " a_" + lb, ab * ab, nm.pair(b, b)},
      {"adag_" + la + " a_" + lb, P::creator(s, a) * ab, nm.number(a, b)},
  };
}

}  // namespace

OracleComparison compare_with_linearized(const CavityModel& model, std::span<const int> cutoffs,
                                         const std::string& label, bool double_cutoffs) {
  const auto st = steady_states(model);
  const auto dd = linearize(model, st.trivial);
  const auto specs = signal_moments(model, normal_moments(covariance_lyapunov(dd)));

  auto run = [&](std::vector<int> cut) {
    const auto ss = steady_state(liouvillian(model, TruncatedSpace(std::move(cut)), Support::charge_sector));
    if (!ss.unique()) throw std::runtime_error("compare_with_linearized: steady state is not unique");
    ss.rho.validate();
    std::vector<cplx> values;
    for (const auto& m : specs) values.push_back(moments(ss.rho, m.op));
    return values;
  };

  std::vector<int> base(cutoffs.begin(), cutoffs.end());
  const auto oracle = run(base);
  OracleComparison out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    ComparisonRow row{label, specs[i].name, oracle[i], specs[i].linearized, 0.0};
    const double scale = std::abs(specs[i].linearized);
    if (scale > 1e-12) {
      row.relative_deviation = std::abs(oracle[i] - specs[i].linearized) / scale;
      out.max_relative_deviation = std::max(out.max_relative_deviation, row.relative_deviation);
    } else {
      row.relative_deviation = std::abs(oracle[i]);
      out.symmetric_zero_error = std::max(out.symmetric_zero_error, std::abs(oracle[i]));
    }
    out.rows.push_back(std::move(row));
  }
  if (double_cutoffs) {
    std::vector<int> doubled = base;
    for (int& c : doubled) c *= 2;
    const auto fine = run(doubled);
    out.cutoff_drift = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      const double scale = std::abs(fine[i]);
      if (scale > 1e-12) out.cutoff_drift = std::max(out.cutoff_drift, std::abs(fine[i] - oracle[i]) / scale);
    }
  }
  return out;
}

}  // namespace spsb
