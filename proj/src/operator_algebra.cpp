#include "spsb/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spsb {

namespace {

bool is_linear_signal(ModeLabel l) { return l == ModeLabel::sig_x || l == ModeLabel::sig_y; }
bool is_circular_signal(ModeLabel l) { return l == ModeLabel::sig_plus || l == ModeLabel::sig_minus; }

// a^n (a^dag)^c = sum_k C(n,k) C(c,k) k! (a^dag)^{c-k} a^{n-k}
struct Reordered {
  double weight;
  int cre;
  int ann;
};

std::vector<Reordered> reorder_single_mode(int cre_left, int ann_left, int cre_right, int ann_right) {
  std::vector<Reordered> out;
  const int kmax = std::min(ann_left, cre_right);
  double binom_n = 1.0;  // C(ann_left, k)
  double binom_c = 1.0;  // C(cre_right, k)
  double fact = 1.0;     // k!
  for (int k = 0; k <= kmax; ++k) {
    if (k > 0) {
      binom_n = binom_n * (ann_left - k + 1) / k;
      binom_c = binom_c * (cre_right - k + 1) / k;
      fact *= k;
    }
    out.push_back({binom_n * binom_c * fact, cre_left + cre_right - k, ann_left - k + ann_right});
  }
  return out;
}

// n! / (n-k)!
double falling(int n, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
  return r;
}

// Normal-ordered expansion of the product of two monomials; weights are integers.
std::vector<std::pair<Monomial, double>> monomial_product(const Monomial& ka, const Monomial& kb) {
  const int modes = static_cast<int>(ka.powers.size() / 2);
  std::vector<std::vector<Reordered>> per_mode(modes);
  for (int m = 0; m < modes; ++m) {
    per_mode[m] = reorder_single_mode(ka.creation(m), ka.annihilation(m), kb.creation(m), kb.annihilation(m));
  }
  std::vector<std::pair<Monomial, double>> out;
  std::vector<std::size_t> pick(modes, 0);
  while (true) {
    Monomial key(modes);
    double w = 1.0;
    for (int m = 0; m < modes; ++m) {
      const auto& r = per_mode[m][pick[m]];
      key.set(m, r.cre, r.ann);
      w *= r.weight;
    }
    out.emplace_back(std::move(key), w);
    int m = modes - 1;
    while (m >= 0 && ++pick[m] == per_mode[m].size()) pick[m--] = 0;
    if (m < 0) break;
  }
  return out;
}

}  // namespace

std::string to_string(ModeLabel label) {
  switch (label) {
    case ModeLabel::sig_x: return "sig_x";
    case ModeLabel::sig_y: return "sig_y";
    case ModeLabel::sig_plus: return "sig_plus";
    case ModeLabel::sig_minus: return "sig_minus";
    case ModeLabel::pump_b: return "pump_b";
  }
  return "unknown";
}

ModeSpace::ModeSpace(std::initializer_list<ModeLabel> labels) : labels_(labels) { validate(); }
ModeSpace::ModeSpace(std::vector<ModeLabel> labels) : labels_(std::move(labels)) { validate(); }

void ModeSpace::validate() const {
  bool linear = false;
  bool circular = false;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < labels_.size(); ++j) {
      if (labels_[i] == labels_[j]) throw std::invalid_argument("duplicate mode label " + to_string(labels_[i]));
    }
    linear = linear || is_linear_signal(labels_[i]);
    circular = circular || is_circular_signal(labels_[i]);
  }
  if (linear && circular) {
    throw std::invalid_argument("linear and circular signal modes cannot share a mode space");
  }
}

int ModeSpace::index_of(ModeLabel label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw std::out_of_range("mode " + to_string(label) + " not in space");
  return static_cast<int>(it - labels_.begin());
}

bool ModeSpace::contains(ModeLabel label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

void Monomial::set(int m, int cre, int ann) {
  if (cre < 0 || ann < 0 || cre > 255 || ann > 255) throw std::invalid_argument("monomial power out of range");
  powers[2 * m] = static_cast<std::uint8_t>(cre);
  powers[2 * m + 1] = static_cast<std::uint8_t>(ann);
}

int Monomial::degree() const {
  int d = 0;
  for (auto p : powers) d += p;
  return d;
}

bool Monomial::is_constant() const {
  return std::all_of(powers.begin(), powers.end(), [](auto p) { return p == 0; });
}

Monomial Monomial::adjoint() const {
  Monomial out = *this;
  for (std::size_t m = 0; m + 1 < powers.size(); m += 2) std::swap(out.powers[m], out.powers[m + 1]);
  return out;
}

OperatorPolynomial OperatorPolynomial::constant(const ModeSpace& space, cplx value) {
  OperatorPolynomial p(space);
  p.accumulate(Monomial(space.size()), value);
  return p;
}

OperatorPolynomial OperatorPolynomial::annihilator(const ModeSpace& space, int mode) {
  Monomial k(space.size());
  k.set(mode, 0, 1);
  return monomial(space, k);
}

OperatorPolynomial OperatorPolynomial::creator(const ModeSpace& space, int mode) {
  Monomial k(space.size());
  k.set(mode, 1, 0);
  return monomial(space, k);
}

OperatorPolynomial OperatorPolynomial::number(const ModeSpace& space, int mode) {
  Monomial k(space.size());
  k.set(mode, 1, 1);
  return monomial(space, k);
}

OperatorPolynomial OperatorPolynomial::monomial(const ModeSpace& space, const Monomial& key, cplx coeff) {
  if (static_cast<int>(key.powers.size()) != 2 * space.size()) {
    throw std::invalid_argument("monomial does not match mode space");
  }
  OperatorPolynomial p(space);
  p.accumulate(key, coeff);
  return p;
}

cplx OperatorPolynomial::coefficient(const Monomial& key) const {
  auto it = terms_.find(key);
  return it == terms_.end() ? cplx{} : it->second;
}

void OperatorPolynomial::accumulate(const Monomial& key, cplx value) {
  if (value == cplx{}) return;
  auto [it, inserted] = terms_.try_emplace(key, value);
  if (!inserted) {
    it->second += value;
    if (it->second == cplx{}) terms_.erase(it);
  }
}

int OperatorPolynomial::degree() const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.degree());
  return d;
}

int OperatorPolynomial::max_creation(int mode) const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.creation(mode));
  return d;
}

int OperatorPolynomial::max_annihilation(int mode) const {
  int d = 0;
  for (const auto& [k, c] : terms_) d = std::max(d, k.annihilation(mode));
  return d;
}

OperatorPolynomial OperatorPolynomial::adjoint() const {
  OperatorPolynomial out(space_);
  for (const auto& [k, c] : terms_) out.accumulate(k.adjoint(), std::conj(c));
  return out;
}

bool OperatorPolynomial::is_hermitian(double tol) const {
  for (const auto& [k, c] : terms_) {
    if (std::abs(c - std::conj(coefficient(k.adjoint()))) > tol) return false;
  }
  return true;
}

double OperatorPolynomial::max_abs_coefficient() const {
  double m = 0.0;
  for (const auto& [k, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

OperatorPolynomial OperatorPolynomial::without_constant() const {
  OperatorPolynomial out = *this;
  out.terms_.erase(Monomial(space_.size()));
  return out;
}

OperatorPolynomial OperatorPolynomial::pruned(double tol) const {
  OperatorPolynomial out(space_);
  for (const auto& [k, c] : terms_) {
    if (std::abs(c) > tol) out.terms_.emplace(k, c);
  }
  return out;
}

void OperatorPolynomial::require_same_space(const OperatorPolynomial& other) const {
  if (!(space_ == other.space_)) throw std::invalid_argument("operator polynomials live on different mode spaces");
}

OperatorPolynomial& OperatorPolynomial::operator+=(const OperatorPolynomial& other) {
  require_same_space(other);
  for (const auto& [k, c] : other.terms_) accumulate(k, c);
  return *this;
}

OperatorPolynomial& OperatorPolynomial::operator-=(const OperatorPolynomial& other) {
  require_same_space(other);
  for (const auto& [k, c] : other.terms_) accumulate(k, -c);
  return *this;
}

OperatorPolynomial& OperatorPolynomial::operator*=(cplx scale) {
  if (scale == cplx{}) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= scale;
  return *this;
}

OperatorPolynomial operator*(const OperatorPolynomial& a, const OperatorPolynomial& b) {
  a.require_same_space(b);
  OperatorPolynomial out(a.space());
  for (const auto& [ka, ca] : a.terms()) {
    for (const auto& [kb, cb] : b.terms()) {
      for (const auto& [k, w] : monomial_product(ka, kb)) out.accumulate(k, ca * cb * w);
    }
  }
  return out;
}

OperatorPolynomial multiply(const OperatorPolynomial& p, const OperatorPolynomial& q) { return p * q; }

OperatorPolynomial commutator(const OperatorPolynomial& p, const OperatorPolynomial& q) {
  if (!(p.space() == q.space())) throw std::invalid_argument("operator polynomials live on different mode spaces");
  // Integer weights per monomial pair, so commuting pairs cancel exactly.
  OperatorPolynomial out(p.space());
  std::map<Monomial, double> w;
  for (const auto& [kp, cp] : p.terms()) {
    for (const auto& [kq, cq] : q.terms()) {
      w.clear();
      for (const auto& [k, x] : monomial_product(kp, kq)) w[k] += x;
      for (const auto& [k, x] : monomial_product(kq, kp)) w[k] -= x;
      for (const auto& [k, x] : w) {
        if (x != 0.0) out.accumulate(k, cp * cq * x);
      }
    }
  }
  return out;
}

OperatorPolynomial phase_rotate(const OperatorPolynomial& p, double theta, std::span<const int> charges) {
  if (static_cast<int>(charges.size()) != p.space().size()) {
    throw std::invalid_argument("one charge per mode required");
  }
  OperatorPolynomial out(p.space());
  for (const auto& [k, c] : p.terms()) {
    long net = 0;
    for (int m = 0; m < p.space().size(); ++m) net += charges[m] * (k.annihilation(m) - k.creation(m));
    out.accumulate(k, net == 0 ? c : c * std::polar(1.0, theta * static_cast<double>(net)));
  }
  return out;
}

double coefficient_distance(const OperatorPolynomial& p, const OperatorPolynomial& q) {
  return (p - q).max_abs_coefficient();
}

OperatorPolynomial substitute(const OperatorPolynomial& p, const ModeSpace& target,
                              const std::vector<OperatorPolynomial>& annihilator_images) {
  const int modes = p.space().size();
  if (static_cast<int>(annihilator_images.size()) != modes) {
    throw std::invalid_argument("one image per source mode required");
  }
  std::vector<OperatorPolynomial> creator_images;
  for (const auto& img : annihilator_images) {
    if (!(img.space() == target)) throw std::invalid_argument("image lives outside the target space");
    for (const auto& [k, c] : img.terms()) {
      int cre = 0, ann = 0;
      for (int m = 0; m < target.size(); ++m) {
        cre += k.creation(m);
        ann += k.annihilation(m);
      }
      if (cre != 0 || ann != 1) throw std::invalid_argument("annihilator image must be linear in annihilators");
    }
    creator_images.push_back(img.adjoint());
  }
  OperatorPolynomial out(target);
  for (const auto& [k, c] : p.terms()) {
    OperatorPolynomial term = OperatorPolynomial::constant(target, c);
    // Creators first, then annihilators, keeps every product normally ordered.
    for (int m = 0; m < modes; ++m) {
      for (int i = 0; i < k.creation(m); ++i) term = term * creator_images[m];
    }
    for (int m = 0; m < modes; ++m) {
      for (int i = 0; i < k.annihilation(m); ++i) term = term * annihilator_images[m];
    }
    out += term;
  }
  return out;
}

cplx classical_value(const OperatorPolynomial& p, std::span<const cplx> alpha) {
  if (static_cast<int>(alpha.size()) != p.space().size()) throw std::invalid_argument("amplitude count mismatch");
  cplx sum{};
  for (const auto& [k, c] : p.terms()) {
    cplx v = c;
    for (int m = 0; m < p.space().size(); ++m) {
      for (int i = 0; i < k.creation(m); ++i) v *= std::conj(alpha[m]);
      for (int i = 0; i < k.annihilation(m); ++i) v *= alpha[m];
    }
    sum += v;
  }
  return sum;
}

OperatorPolynomial d_dalpha(const OperatorPolynomial& p, int mode) {
  OperatorPolynomial out(p.space());
  for (const auto& [k, c] : p.terms()) {
    const int n = k.annihilation(mode);
    if (n == 0) continue;
    Monomial d = k;
    d.set(mode, k.creation(mode), n - 1);
    out.accumulate(d, c * static_cast<double>(n));
  }
  return out;
}

OperatorPolynomial d_dalpha_conj(const OperatorPolynomial& p, int mode) {
  OperatorPolynomial out(p.space());
  for (const auto& [k, c] : p.terms()) {
    const int n = k.creation(mode);
    if (n == 0) continue;
    Monomial d = k;
    d.set(mode, n - 1, k.annihilation(mode));
    out.accumulate(d, c * static_cast<double>(n));
  }
  return out;
}

FockSpace::FockSpace(std::vector<int> c) : cutoffs(std::move(c)) {
  for (int n : cutoffs) {
    if (n < 0) throw std::invalid_argument("negative Fock cutoff");
  }
}

long FockSpace::dimension() const {
  long d = 1;
  for (int n : cutoffs) d *= (n + 1);
  return d;
}

std::vector<int> FockSpace::occupation(long index) const {
  std::vector<int> occ(cutoffs.size());
  for (int m = static_cast<int>(cutoffs.size()) - 1; m >= 0; --m) {
    occ[m] = static_cast<int>(index % (cutoffs[m] + 1));
    index /= (cutoffs[m] + 1);
  }
  return occ;
}

long FockSpace::index(std::span<const int> occupation) const {
  long idx = 0;
  for (std::size_t m = 0; m < cutoffs.size(); ++m) idx = idx * (cutoffs[m] + 1) + occupation[m];
  return idx;
}

std::vector<long> FockSpace::safe_subspace(int margin) const {
  const int limit = *std::min_element(cutoffs.begin(), cutoffs.end()) - margin;
  std::vector<long> out;
  for (long i = 0; i < dimension(); ++i) {
    auto occ = occupation(i);
    int total = 0;
    for (int n : occ) total += n;
    if (total <= limit) out.push_back(i);
  }
  return out;
}

SparseOperator to_sparse(const OperatorPolynomial& p, const FockSpace& space) {
  const int modes = p.space().size();
  if (static_cast<int>(space.cutoffs.size()) != modes) throw std::invalid_argument("cutoff count mismatch");
  for (int m = 0; m < modes; ++m) {
    if (space.cutoffs[m] < std::max(p.max_creation(m), p.max_annihilation(m))) {
      throw std::invalid_argument("cutoff of mode " + to_string(p.space().label(m)) + " below polynomial power");
    }
  }
  const long dim = space.dimension();
  std::vector<Eigen::Triplet<cplx, long>> trip;
  std::vector<int> occ;
  for (long col = 0; col < dim; ++col) {
    const auto start = space.occupation(col);
    for (const auto& [k, c] : p.terms()) {
      occ = start;
      double amp = 1.0;
      bool alive = true;
      for (int m = 0; m < modes && alive; ++m) {
        const int ann = k.annihilation(m);
        const int cre = k.creation(m);
        if (occ[m] < ann) {
          alive = false;
          break;
        }
        amp *= falling(occ[m], ann);
        occ[m] -= ann;
        if (occ[m] + cre > space.cutoffs[m]) {
          alive = false;
          break;
        }
        amp *= falling(occ[m] + cre, cre);
        occ[m] += cre;
      }
      if (alive) trip.emplace_back(space.index(occ), col, c * std::sqrt(amp));
    }
  }
  SparseOperator out(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

FockMatrix to_matrix(const OperatorPolynomial& p, std::span<const int> cutoffs) {
  FockSpace space(std::vector<int>(cutoffs.begin(), cutoffs.end()));
  return {space.cutoffs, Eigen::MatrixXcd(to_sparse(p, space))};
}

Eigen::MatrixXcd restrict_to(const Eigen::MatrixXcd& m, const std::vector<long>& indices) {
  const long n = static_cast<long>(indices.size());
  Eigen::MatrixXcd out(n, n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < n; ++j) out(i, j) = m(indices[i], indices[j]);
  }
  return out;
}

}  // namespace spsb
