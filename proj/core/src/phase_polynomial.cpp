#include "pascalsim/phase_polynomial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>


namespace pascalsim {

MonomialLayout::MonomialLayout(std::vector<int> bits) : bits_(std::move(bits)) {
  int total = 0;
  for (int b : bits_) {
    if (b < 3) throw DomainError("exponent field needs at least 3 bits");
    shift_.push_back(total);
    bias_ |= MonoKey{1} << (total + b - 1);
    total += b;
  }
  if (total > 127) throw DomainError("monomial layout exceeds 127 bits");
}

MonomialLayout MonomialLayout::for_drones(int drones) {
  if (drones < 1) throw DomainError("need at least one drone");
  const int b = std::min(24, 127 / (2 * drones));
  if (b < 3) throw BudgetExceeded("too many drones for the monomial layout", 0);
  return MonomialLayout(std::vector<int>(static_cast<std::size_t>(2 * drones), b));
}

MonoKey MonomialLayout::pack(const int* exps) const {
  MonoKey key = 0;
  for (std::size_t v = 0; v < bits_.size(); ++v) {
    if (std::abs(exps[v]) > limit(static_cast<int>(v))) throw BudgetExceeded("exponent field overflow", 0);
    const MonoKey field = static_cast<MonoKey>(exps[v] + (1 << (bits_[v] - 1)));
    key |= field << shift_[v];
  }
  return key;
}

void MonomialLayout::unpack(MonoKey key, int* exps) const {
  for (std::size_t v = 0; v < bits_.size(); ++v) {
    const MonoKey mask = (MonoKey{1} << bits_[v]) - 1;
    exps[v] = static_cast<int>((key >> shift_[v]) & mask) - (1 << (bits_[v] - 1));
  }
}

namespace {

// Open-addressing accumulator keyed by packed exponents.
class Accumulator {
 public:
  explicit Accumulator(std::size_t expected) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    set_capacity(cap);
  }

  void add(MonoKey key, cplx v) {
    if (2 * (count_ + 1) > keys_.size()) grow();
    std::size_t i = slot(key);
    for (;;) {
      if (keys_[i] == key) {
        vals_[i] += v;
        return;
      }
      if (keys_[i] == kEmpty) {
        keys_[i] = key;
        vals_[i] = v;
        ++count_;
        return;
      }
      i = (i + 1) & (keys_.size() - 1);
    }
  }

  std::size_t count() const noexcept { return count_; }

  std::size_t slot(MonoKey key) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(key) * 0x9E3779B97F4A7C15ULL ^
                      static_cast<std::uint64_t>(key >> 64) * 0xC2B2AE3D27D4EB4FULL;
    h ^= h >> 31;
    return static_cast<std::size_t>(h * 0x94D049BB133111EBULL >> shift_);
  }

  // entries sorted by key for a deterministic layout
  void drain(std::vector<MonoKey>& keys, std::vector<cplx>& vals) const {
    std::vector<std::size_t> idx;
    idx.reserve(count_);
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] != kEmpty) idx.push_back(i);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys_[a] < keys_[b]; });
    keys.clear();
    vals.clear();
    keys.reserve(idx.size());
    vals.reserve(idx.size());
    for (std::size_t i : idx) {
      keys.push_back(keys_[i]);
      vals.push_back(vals_[i]);
    }
  }

 private:
  static constexpr MonoKey kEmpty = ~MonoKey{0};

  void set_capacity(std::size_t cap) {
    keys_.assign(cap, kEmpty);
    vals_.assign(cap, cplx(0.0));
    shift_ = 64 - std::countr_zero(cap);
  }

  void grow() {
    std::vector<MonoKey> ok = std::move(keys_);
    std::vector<cplx> ov = std::move(vals_);
    set_capacity(ok.size() * 2);
    count_ = 0;
    for (std::size_t i = 0; i < ok.size(); ++i)
      if (ok[i] != kEmpty) add(ok[i], ov[i]);
  }

  std::vector<MonoKey> keys_;
  std::vector<cplx> vals_;
  std::size_t count_ = 0;
  int shift_ = 60;
};

}  // namespace

PhasePolynomial PhasePolynomial::constant(const MonomialLayout* layout, cplx c) {
  PhasePolynomial p(layout);
  p.keys_.push_back(layout->zero_key());
  p.coefs_.push_back(c);
  return p;
}

PhasePolynomial PhasePolynomial::monomial(const MonomialLayout* layout, const std::vector<int>& exps, cplx c) {
  PhasePolynomial p(layout);
  p.keys_.push_back(layout->pack(exps.data()));
  p.coefs_.push_back(c);
  for (std::size_t v = 0; v < exps.size(); ++v) p.bound_[v] = std::abs(exps[v]);
  return p;
}

PhasePolynomial PhasePolynomial::conj() const {
  PhasePolynomial p(layout_);
  p.bound_ = bound_;
  Accumulator acc(size());
  for (std::size_t i = 0; i < size(); ++i) acc.add(layout_->negate(keys_[i]), std::conj(coefs_[i]));
  acc.drain(p.keys_, p.coefs_);
  return p;
}

PhasePolynomial PhasePolynomial::scaled(cplx c) const {
  PhasePolynomial p = *this;
  for (auto& v : p.coefs_) v *= c;
  return p;
}

void PhasePolynomial::absorb_bounds(const std::vector<int>& other) {
  for (std::size_t v = 0; v < bound_.size(); ++v) bound_[v] = std::max(bound_[v], other[v]);
}

void PhasePolynomial::add_scaled(const PhasePolynomial& other, cplx c) {
  if (other.empty()) return;
  if (layout_ == nullptr) *this = PhasePolynomial(other.layout_);
  Accumulator acc(size() + other.size());
  for (std::size_t i = 0; i < size(); ++i) acc.add(keys_[i], coefs_[i]);
  for (std::size_t i = 0; i < other.size(); ++i) acc.add(other.keys_[i], c * other.coefs_[i]);
  acc.drain(keys_, coefs_);
  absorb_bounds(other.bound_);
}

void PhasePolynomial::add_constant(cplx c) {
  if (layout_ == nullptr) throw DomainError("polynomial has no layout");
  add_scaled(constant(layout_, 1.0), c);
}

cplx PhasePolynomial::constant_sum() const {
  cplx s = 0.0;
  for (const auto& c : coefs_) s += c;
  return s;
}

PhasePolynomial PhasePolynomial::multiply(const PhasePolynomial& a, const PhasePolynomial& b, std::size_t max_terms) {
  if (a.empty() || b.empty()) return PhasePolynomial(a.layout_ ? a.layout_ : b.layout_);
  const MonomialLayout* layout = a.layout_;
  PhasePolynomial p(layout);
  for (std::size_t v = 0; v < p.bound_.size(); ++v) {
    p.bound_[v] = a.bound_[v] + b.bound_[v];
    if (p.bound_[v] > layout->limit(static_cast<int>(v)))
      throw BudgetExceeded("exponent range exceeds monomial layout", a.size() * b.size());
  }
  Accumulator acc(std::max(a.size(), b.size()) * 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const MonoKey ka = a.keys_[i];
    const cplx ca = a.coefs_[i];
    for (std::size_t j = 0; j < b.size(); ++j) acc.add(layout->add(ka, b.keys_[j]), ca * b.coefs_[j]);
    if (acc.count() > max_terms)
      throw BudgetExceeded("expansion exceeds term budget (" + std::to_string(max_terms) + ")", acc.count());
  }
  acc.drain(p.keys_, p.coefs_);
  return p;
}

cplx PhasePolynomial::evaluate(const std::vector<double>& phases) const {
  const int nv = layout_->vars();
  if (static_cast<int>(phases.size()) != nv) throw DomainError("phase vector length mismatch");
  std::vector<int> e(static_cast<std::size_t>(nv));
  cplx s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    layout_->unpack(keys_[i], e.data());
    double ph = 0.0;
    for (int v = 0; v < nv; ++v) ph += e[static_cast<std::size_t>(v)] * phases[static_cast<std::size_t>(v)];
    s += coefs_[i] * std::polar(1.0, ph);
  }
  return s;
}

cplx PhasePolynomial::expectation(const std::function<cplx(int, int)>& moment) const {
  const int nv = layout_->vars();
  std::vector<int> e(static_cast<std::size_t>(nv));
  cplx s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    layout_->unpack(keys_[i], e.data());
    cplx t = coefs_[i];
    for (int v = 0; v < nv; ++v)
      if (e[static_cast<std::size_t>(v)] != 0) t *= moment(v, e[static_cast<std::size_t>(v)]);
    s += t;
  }
  return s;
}

}  // namespace pascalsim
