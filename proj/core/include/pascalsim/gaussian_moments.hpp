#pragma once

#include <vector>

#include "pascalsim/common.hpp"

namespace pascalsim {

enum class Parity { Cos, Sin };

/// P(lo <= X <= hi) for X ~ N(0, sigma^2).
double truncated_mass(double sigma, Interval bounds);

/// Integral of exp(j C x) exp(-x^2 / (2 sigma^2)) over [lo, hi], in closed
/// form through the complex error function.
cplx gaussian_integral_i18(double coeff, double sigma, Interval bounds);

/// E[exp(j C X)] for X ~ N(0, sigma^2) truncated to bounds (renormalized).
cplx truncated_gaussian_cf(double coeff, double sigma, Interval bounds);

/// E[f(offset + coeff X)], f = cos or sin, X truncated Gaussian.
double gaussian_trig_moment(double coeff, double offset, double sigma, Interval bounds, Parity parity);

/// Coefficients of f(C1 + C2 df + C3 dth_k + C4 dth_q).
struct TrigTriple {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double c4 = 0.0;
};

struct TripleSigmas {
  double doppler = 0.0;
  double theta_k = 0.0;
  double theta_q = 0.0;
  Interval doppler_bounds{-1.0, 1.0};
  Interval theta_bounds{-kPi, kPi};
};

/// Expectation over independent truncated Gaussians (df, dth_k, dth_q),
/// integrated innermost-first: each stage splits f by the angle-sum formula
/// and applies one closed-form single-variable moment.
double trig_moment_triple(const TrigTriple& c, const TripleSigmas& s, Parity parity);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Hermite rule for E[g(X)], X ~ N(0, 1): sum w_i g(x_i), sum w_i = 1.
QuadratureRule gauss_hermite_normal(int n);

/// n-point Gauss rule for the standard normal truncated to [lo, hi]
/// (standardized bounds, infinities allowed), renormalized so sum w_i = 1.
QuadratureRule gauss_truncated_normal(int n, double lo, double hi);

}  // namespace pascalsim
