#include "pascalsim/gaussian_moments.hpp"

#include <cmath>

#include "pascalsim/special_functions.hpp"

namespace pascalsim {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void check(double sigma, Interval b) {
  if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
  // a point mass may sit on degenerate bounds
  if (!(b.lo < b.hi) && !(sigma == 0.0 && b.lo <= 0.0 && b.hi >= 0.0))
    throw DomainError("truncation bounds must satisfy lo < hi");
}

// exp(-C^2 s^2 / 2) erfc(x - j beta) rewritten without overflow; x = bound / (sqrt2 s), beta = C s / sqrt2
cplx scaled_erfc_term(double x, double beta) {
  const cplx phase = std::polar(std::exp(-x * x), 2.0 * x * beta);
  if (x >= 0.0) return phase * faddeeva_w(cplx(beta, x));
  return 2.0 * std::exp(-beta * beta) - phase * faddeeva_w(cplx(-beta, -x));
}

// integral of exp(j C t) N(t; 0, s^2) over [lo, hi]
cplx normalized_integral(double coeff, double sigma, Interval b) {
  const double xl = b.lo / (kSqrt2 * sigma);
  const double xh = b.hi / (kSqrt2 * sigma);
  const double beta = coeff * sigma / kSqrt2;
  if (beta == 0.0) return truncated_mass(sigma, b);
  if (std::abs(beta) <= 5.0) {
    const cplx d = erf_complex(cplx(xh, -beta)) - erf_complex(cplx(xl, -beta));
    return 0.5 * std::exp(-beta * beta) * d;
  }
  return 0.5 * (scaled_erfc_term(xl, beta) - scaled_erfc_term(xh, beta));
}

}  // namespace

double truncated_mass(double sigma, Interval b) {
  check(sigma, b);
  if (sigma == 0.0) return (b.lo <= 0.0 && b.hi >= 0.0) ? 1.0 : 0.0;
  const double xl = b.lo / (kSqrt2 * sigma);
  const double xh = b.hi / (kSqrt2 * sigma);
  if (xl >= 0.0) return 0.5 * (std::erfc(xl) - std::erfc(xh));
  if (xh <= 0.0) return 0.5 * (std::erfc(-xh) - std::erfc(-xl));
  return 1.0 - 0.5 * (std::erfc(xh) + std::erfc(-xl));
}

cplx gaussian_integral_i18(double coeff, double sigma, Interval bounds) {
  check(sigma, bounds);
  if (sigma == 0.0) return 0.0;
  return std::sqrt(2.0 * kPi) * sigma * normalized_integral(coeff, sigma, bounds);
}

cplx truncated_gaussian_cf(double coeff, double sigma, Interval bounds) {
  check(sigma, bounds);
  if (sigma == 0.0 || coeff == 0.0) return 1.0;
  return normalized_integral(coeff, sigma, bounds) / truncated_mass(sigma, bounds);
}

double gaussian_trig_moment(double coeff, double offset, double sigma, Interval bounds, Parity parity) {
  const cplx v = std::polar(1.0, offset) * truncated_gaussian_cf(coeff, sigma, bounds);
  return parity == Parity::Cos ? v.real() : v.imag();
}

double trig_moment_triple(const TrigTriple& c, const TripleSigmas& s, Parity parity) {
  // innermost: dth_q; f(A + C4 x) = f(A) E cos(C4 x) +- f'(A) E sin(C4 x)
  const double qc = gaussian_trig_moment(c.c4, 0.0, s.theta_q, s.theta_bounds, Parity::Cos);
  const double qs = gaussian_trig_moment(c.c4, 0.0, s.theta_q, s.theta_bounds, Parity::Sin);
  const double kc = gaussian_trig_moment(c.c3, 0.0, s.theta_k, s.theta_bounds, Parity::Cos);
  const double ks = gaussian_trig_moment(c.c3, 0.0, s.theta_k, s.theta_bounds, Parity::Sin);
  const double fc = gaussian_trig_moment(c.c2, 0.0, s.doppler, s.doppler_bounds, Parity::Cos);
  const double fs = gaussian_trig_moment(c.c2, 0.0, s.doppler, s.doppler_bounds, Parity::Sin);
  // cos/sin of C1 + C2 df after averaging df
  const double a_cos = std::cos(c.c1) * fc - std::sin(c.c1) * fs;
  const double a_sin = std::sin(c.c1) * fc + std::cos(c.c1) * fs;
  // ... then dth_k
  const double b_cos = a_cos * kc - a_sin * ks;
  const double b_sin = a_sin * kc + a_cos * ks;
  // ... then dth_q
  if (parity == Parity::Cos) return b_cos * qc - b_sin * qs;
  return b_sin * qc + b_cos * qs;
}

QuadratureRule gauss_hermite_normal(int n) {
  if (n < 1 || n > 64) throw DomainError("Gauss-Hermite order must lie in 1..64");
  // Golub-Welsch on the probabilists' Jacobi matrix (off-diagonal sqrt(i))
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()(i);
    if (std::abs(x) < 1e-14) x = 0.0;
    rule.nodes.push_back(x);
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return rule;
}

namespace {

QuadratureRule golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const int n = static_cast<int>(alpha.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) j(i, i) = alpha[static_cast<std::size_t>(i)];
  for (int i = 1; i < n; ++i) j(i, i - 1) = j(i - 1, i) = std::sqrt(beta[static_cast<std::size_t>(i)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    rule.weights.push_back(v * v);
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_truncated_normal(int n, double lo, double hi) {
  if (n < 1 || n > 64) throw DomainError("Gauss rule order must lie in 1..64");
  if (!(lo < hi)) throw DomainError("truncation interval is empty");
  constexpr double kReach = 13.0;
  const double a = std::max(lo, -kReach), b = std::min(hi, kReach);
  if (!(a < b)) throw DomainError("truncation interval carries no mass");

  // discretize the density with composite Gauss-Legendre, then run Stieltjes
  constexpr int kPanelNodes = 20;
  const int panels = std::max(8, static_cast<int>(std::ceil((b - a) * 4.0)));
  std::vector<double> al(kPanelNodes, 0.0), be(kPanelNodes, 0.0);
  for (int i = 1; i < kPanelNodes; ++i) be[static_cast<std::size_t>(i)] = i * i / (4.0 * i * i - 1.0);
  be[0] = 2.0;
  const QuadratureRule gl = golub_welsch(al, be);
  std::vector<double> x, w;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < kPanelNodes; ++i) {
      const double t = a + h * (p + 0.5 * (gl.nodes[static_cast<std::size_t>(i)] + 1.0));
      x.push_back(t);
      w.push_back(0.5 * h * 2.0 * gl.weights[static_cast<std::size_t>(i)] * std::exp(-0.5 * t * t));
    }
  std::vector<double> alpha(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n));
  std::vector<double> prev(x.size(), 0.0), cur(x.size(), 1.0);
  double norm_prev = 1.0;
  for (int k = 0; k < n; ++k) {
    double nrm = 0.0, xm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      nrm += w[i] * cur[i] * cur[i];
      xm += w[i] * x[i] * cur[i] * cur[i];
    }
    alpha[static_cast<std::size_t>(k)] = xm / nrm;
    beta[static_cast<std::size_t>(k)] = k == 0 ? nrm : nrm / norm_prev;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double next = (x[i] - alpha[static_cast<std::size_t>(k)]) * cur[i] -
                          (k == 0 ? 0.0 : beta[static_cast<std::size_t>(k)]) * prev[i];
      prev[i] = cur[i];
      cur[i] = next;
    }
    norm_prev = nrm;
  }
  QuadratureRule rule = golub_welsch(alpha, beta);
  double s = 0.0;
  for (double v : rule.weights) s += v;
  for (double& v : rule.weights) v /= s;
  return rule;
}

}  // namespace pascalsim
