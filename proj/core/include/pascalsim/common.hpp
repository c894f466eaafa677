#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pascalsim {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegree = kPi / 180.0;

/// Closed interval [lo, hi] used for truncation bounds.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

/// Argument outside the documented domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Gram matrix too close to singular for a direct inverse.
class IllConditioned : public std::runtime_error {
 public:
  explicit IllConditioned(double condition)
      : std::runtime_error("ill-conditioned Gram matrix (cond = " + std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Quantity undefined at the requested point (e.g. zero signal amplitude).
class Undefined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symbolic expansion would exceed the configured term budget.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::size_t terms)
      : std::runtime_error(what), terms_(terms) {}
  std::size_t terms() const noexcept { return terms_; }

 private:
  std::size_t terms_;
};

/// Numerical failure in a Monte Carlo campaign (e.g. too many skipped trials).
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pascalsim
