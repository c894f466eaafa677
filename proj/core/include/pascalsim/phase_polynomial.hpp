#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pascalsim/common.hpp"

namespace pascalsim {

using MonoKey = unsigned __int128;

/// Packs a vector of small signed exponents into one 128-bit key with a
/// per-field bias, so that adding keys adds exponents.
class MonomialLayout {
 public:
  explicit MonomialLayout(std::vector<int> bits);
  /// 2K variables: angle phasors zeta_1..zeta_K, then Doppler phasors xi_1..xi_K.
  static MonomialLayout for_drones(int drones);

  int vars() const noexcept { return static_cast<int>(bits_.size()); }
  int limit(int v) const noexcept { return (1 << (bits_[static_cast<std::size_t>(v)] - 1)) - 2; }
  MonoKey zero_key() const noexcept { return bias_; }
  MonoKey pack(const int* exps) const;
  void unpack(MonoKey key, int* exps) const;
  MonoKey add(MonoKey a, MonoKey b) const noexcept { return a + b - bias_; }
  MonoKey negate(MonoKey a) const noexcept { return 2 * bias_ - a; }

 private:
  std::vector<int> bits_;
  std::vector<int> shift_;
  MonoKey bias_ = 0;
};

/// Finite sum of c * prod_v x_v^(e_v) with unit-modulus variables x_v.
class PhasePolynomial {
 public:
  PhasePolynomial() = default;
  explicit PhasePolynomial(const MonomialLayout* layout) : layout_(layout), bound_(layout->vars(), 0) {}

  static PhasePolynomial constant(const MonomialLayout* layout, cplx c);
  static PhasePolynomial monomial(const MonomialLayout* layout, const std::vector<int>& exps, cplx c);

  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  const MonomialLayout* layout() const noexcept { return layout_; }

  PhasePolynomial conj() const;
  PhasePolynomial scaled(cplx c) const;
  /// this += c * other
  void add_scaled(const PhasePolynomial& other, cplx c);
  void add_constant(cplx c);
  /// Value at all variables equal to 1.
  cplx constant_sum() const;

  /// Product with merging by exponent; throws BudgetExceeded when the result
  /// would exceed max_terms monomials or overflow an exponent field.
  static PhasePolynomial multiply(const PhasePolynomial& a, const PhasePolynomial& b, std::size_t max_terms);

  /// Value with x_v = exp(j phase_v).
  cplx evaluate(const std::vector<double>& phases) const;
  /// sum_c c * prod_v moment(v, e_v); moment(v, 0) must be 1.
  cplx expectation(const std::function<cplx(int, int)>& moment) const;

  const std::vector<MonoKey>& keys() const noexcept { return keys_; }
  const std::vector<cplx>& coefs() const noexcept { return coefs_; }

 private:
  void absorb_bounds(const std::vector<int>& other);

  const MonomialLayout* layout_ = nullptr;
  std::vector<MonoKey> keys_;
  std::vector<cplx> coefs_;
  std::vector<int> bound_;  // max |exponent| per variable
};

}  // namespace pascalsim
