#include "pascalsim/special_functions.hpp"

#include <cmath>

namespace pascalsim {

namespace {

using quad = __float128;

struct QComplex {
  quad re;
  quad im;
};

inline QComplex mul(QComplex a, QComplex b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline quad norm2(QComplex a) { return a.re * a.re + a.im * a.im; }

// Maclaurin series in quad precision; loses about exp(2 Re(z)^2) relative
// accuracy, which the caller keeps below exp(18).
cplx erf_series(cplx z) {
  const QComplex zq{static_cast<quad>(z.real()), static_cast<quad>(z.imag())};
  const QComplex z2 = mul(zq, zq);
  const QComplex minus_z2{-z2.re, -z2.im};
  QComplex term = zq;
  QComplex sum = zq;
  const quad mag2 = norm2(z2);
  const quad eps2 = static_cast<quad>(1e-34) * static_cast<quad>(1e-34);
  for (int n = 1; n < 2000; ++n) {
    term = mul(term, minus_z2);
    term.re /= n;
    term.im /= n;
    const quad denom = 2 * n + 1;
    const QComplex c{term.re / denom, term.im / denom};
    sum.re += c.re;
    sum.im += c.im;
    if (static_cast<quad>(n) * n > mag2 && norm2(c) <= eps2 * norm2(sum)) break;
  }
  const quad two_over_sqrt_pi = static_cast<quad>(1.1283791670955125738961589031215452Q);
  return {static_cast<double>(sum.re * two_over_sqrt_pi), static_cast<double>(sum.im * two_over_sqrt_pi)};
}

// Laplace continued fraction for w(z), Im z > 0, modified Lentz.
cplx faddeeva_cf(cplx z) {
  constexpr double tiny = 1e-300;
  cplx f = z;
  if (f == 0.0) f = tiny;
  cplx c = f;
  cplx d = 0.0;
  for (int n = 1; n < 100000; ++n) {
    const double a = -0.5 * n;
    d = z + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = z + a / c;
    if (c == 0.0) c = tiny;
    const cplx delta = c * d;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return cplx(0.0, 1.0 / std::sqrt(kPi)) / f;
}

constexpr double kSeriesRadius = 4.0;
constexpr double kSeriesReal = 3.0;

}  // namespace

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double hermite_poly(int n, double x) {
  if (n < 0 || n > 32) throw DomainError("Hermite order must lie in 0..32");
  double h0 = 1.0;
  if (n == 0) return h0;
  double h1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double q_derivative(int r, double x0) {
  if (r < 1) throw DomainError("derivative order must be >= 1");
  const double sign = (r + 1) % 2 == 0 ? 1.0 : -1.0;
  return -sign * std::exp(-0.5 * x0 * x0) * hermite_poly(r - 1, x0 / std::sqrt(2.0)) /
         (std::pow(std::sqrt(2.0), r) * std::sqrt(kPi));
}

cplx faddeeva_w(cplx z) {
  if (z.imag() < 0.0) throw DomainError("faddeeva_w needs Im z >= 0");
  if (z.imag() >= kSeriesReal || std::abs(z.real()) > 12.0) return faddeeva_cf(z);
  // w(z) = exp(-z^2) (1 - erf(-jz)); here |Re(-jz)| < 3 so the series is accurate
  const cplx mjz(z.imag(), -z.real());
  return std::exp(-z * z) * (1.0 - erf_series(mjz));
}

cplx erf_complex(cplx z) {
  if (!(std::abs(z.imag()) <= 12.0)) throw DomainError("erf_complex needs |Im z| <= 12");
  if (z == 0.0) return 0.0;
  if (std::abs(z) < kSeriesRadius || std::abs(z.real()) < kSeriesReal) return erf_series(z);
  // erfc(z) = exp(-z^2) w(jz) for Re z > 0, odd symmetry otherwise
  const bool flip = z.real() < 0.0;
  const cplx zz = flip ? -z : z;
  const cplx erfc = std::exp(-zz * zz) * faddeeva_cf(cplx(-zz.imag(), zz.real()));
  const cplx e = 1.0 - erfc;
  return flip ? -e : e;
}

}  // namespace pascalsim
