#include "pascalsim/ser_analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <unordered_map>

#include "pascalsim/gaussian_moments.hpp"
#include "pascalsim/phase_polynomial.hpp"
#include "pascalsim/special_functions.hpp"

namespace pascalsim {

double decision_distance(cplx nu, int order, int l) {
  const double a = kPi / order;
  const double sign = (l % 2 == 0) ? 1.0 : -1.0;
  return std::sin(a) * nu.real() + sign * std::cos(a) * nu.imag();
}

ConditionalSerTerms conditional_terms(const CMatrix& weights, const ChannelMatrix& true_channel,
                                      const std::vector<double>& powers, const std::vector<int>& beta, int order,
                                      double noise_variance, std::size_t k) {
  const auto kk = static_cast<std::size_t>(true_channel.drone_count());
  if (beta.size() != kk || powers.size() != kk) throw DomainError("beta/powers length must equal drone count");
  if (k >= kk || weights.rows() != true_channel.drone_count() || weights.cols() != true_channel.antenna_count())
    throw DomainError("weight matrix shape mismatch");
  const auto row = weights.row(static_cast<Eigen::Index>(k));
  cplx nu = 0.0;
  for (std::size_t p = 0; p < kk; ++p) {
    const cplx g = row * true_channel.entries.col(static_cast<Eigen::Index>(p));
    nu += std::sqrt(powers[p]) * g * mpsk_symbol(beta[p], order);
  }
  nu *= std::conj(mpsk_symbol(beta[k], order));
  ConditionalSerTerms t;
  t.nu = nu;
  t.gamma = noise_variance * row.squaredNorm();
  t.d1 = decision_distance(nu, order, 1);
  t.d2 = decision_distance(nu, order, 2);
  return t;
}

namespace {

double q_of_ratio(double d, double gamma) {
  if (gamma > 0.0) return q_function(std::sqrt(2.0) * d / std::sqrt(gamma));
  if (d > 0.0) return 0.0;
  if (d < 0.0) return 1.0;
  return 0.5;
}

}  // namespace

double conditional_ser(const EqualizerWeights& weights, const ChannelMatrix& true_channel,
                       const std::vector<double>& powers, const std::vector<int>& beta, int order,
                       double noise_variance, std::size_t k) {
  const ConditionalSerTerms t = conditional_terms(weights.matrix, true_channel, powers, beta, order, noise_variance, k);
  if (t.nu == 0.0) throw Undefined("post-equalization signal term is zero");
  return std::clamp(q_of_ratio(t.d1, t.gamma) + q_of_ratio(t.d2, t.gamma), 0.0, 1.0);
}

std::vector<std::vector<int>> relative_combinations(std::size_t drones, std::size_t target, int order) {
  if (target >= drones) throw DomainError("target drone out of range");
  std::vector<std::vector<int>> out;
  std::vector<int> beta(drones, 1);
  for (;;) {
    out.push_back(beta);
    std::size_t p = 0;
    for (; p < drones; ++p) {
      if (p == target) continue;
      if (beta[p] < order) {
        ++beta[p];
        break;
      }
      beta[p] = 1;
    }
    if (p == drones) break;
  }
  return out;
}

double MomentContext::symbol_power() const noexcept {
  if (approx.symbol_power > 0.0) return approx.symbol_power;
  double s = 0.0;
  for (const auto& d : drones) s += d.power;
  return drones.empty() ? 1.0 : s / static_cast<double>(drones.size());
}

double MomentContext::regularizer() const noexcept {
  return kind == EqualizerKind::MMSE ? system.noise_variance / symbol_power() : 0.0;
}

void MomentContext::validate() const {
  system.validate();
  approx.validate();
  errors.validate();
  if (drones.empty()) throw DomainError("no drones");
  for (const auto& d : drones) d.validate(system);
  if (errors.sigmas.size() != drones.size()) throw DomainError("error model must have one entry per drone");
  if (target >= drones.size()) throw DomainError("target drone out of range");
  if (modulation_order < 2 || !is_power_of_two(modulation_order)) throw DomainError("bad modulation order");
  if (range_nodes < 1) throw DomainError("range_nodes must be >= 1");
}

namespace {

double binom(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

using Poly = PhasePolynomial;

struct RowExpansion {
  std::shared_ptr<const MonomialLayout> layout;
  std::vector<Poly> t;  // w_k h_p per drone p
  Poly gamma;
};

// Row k of the (Neumann-order) weight matrix built from H_hat whose column p is
// eta_hat_p exp(j 2 pi f_p / fs) a(theta_p) with entry n carrying zeta_p^n xi_p.
RowExpansion build_row(const MomentContext& ctx, const std::vector<double>& gain_hat, bool normalize) {
  const auto& sys = ctx.system;
  const int kk = static_cast<int>(ctx.drones.size());
  const int n_ant = sys.n_antennas;
  const std::size_t budget = ctx.term_budget;
  RowExpansion out;
  out.layout = std::make_shared<const MonomialLayout>(MonomialLayout::for_drones(kk));
  const MonomialLayout* lay = out.layout.get();
  const double c = sys.phase_factor();
  const auto k = static_cast<int>(ctx.target);

  std::vector<std::vector<Poly>> hhat(static_cast<std::size_t>(n_ant), std::vector<Poly>(static_cast<std::size_t>(kk)));
  std::vector<int> e(static_cast<std::size_t>(2 * kk), 0);
  for (int n = 0; n < n_ant; ++n)
    for (int p = 0; p < kk; ++p) {
      std::fill(e.begin(), e.end(), 0);
      e[static_cast<std::size_t>(p)] = n;
      e[static_cast<std::size_t>(kk + p)] = 1;
      const auto& d = ctx.drones[static_cast<std::size_t>(p)];
      const double phase = 2.0 * kPi * d.doppler / sys.sample_rate - c * n * std::sin(d.doa);
      hhat[static_cast<std::size_t>(n)][static_cast<std::size_t>(p)] =
          Poly::monomial(lay, e, std::polar(gain_hat[static_cast<std::size_t>(p)], phase));
    }
  auto conj_h = [&](int n, int q) { return hhat[static_cast<std::size_t>(n)][static_cast<std::size_t>(q)].conj(); };

  std::vector<Poly> s(static_cast<std::size_t>(kk), Poly(lay));
  std::vector<double> gd(static_cast<std::size_t>(kk), 1.0);
  if (ctx.kind == EqualizerKind::MRC) {
    s[static_cast<std::size_t>(k)] = Poly::constant(lay, 1.0);
  } else {
    const double alpha = ctx.regularizer();
    const int order = ctx.approx.neumann_order;
    // B = H_hat^H H_hat
    std::vector<std::vector<Poly>> b(static_cast<std::size_t>(kk), std::vector<Poly>(static_cast<std::size_t>(kk), Poly(lay)));
    for (int q = 0; q < kk; ++q)
      for (int p = 0; p < kk; ++p)
        for (int n = 0; n < n_ant; ++n)
          b[q][p].add_scaled(Poly::multiply(conj_h(n, q), hhat[n][p], budget), 1.0);
    const bool nominal = ctx.approx.diagonal == DiagonalMode::Nominal;
    for (int p = 0; p < kk; ++p) {
      const double g = gain_hat[static_cast<std::size_t>(p)];
      gd[static_cast<std::size_t>(p)] = nominal ? n_ant + alpha : n_ant * g * g + alpha;
    }
    auto row_times = [&](const std::vector<Poly>& row, bool with_alpha_diag, bool divide) {
      std::vector<Poly> next(static_cast<std::size_t>(kk), Poly(lay));
      for (int q = 0; q < kk; ++q) {
        if (row[q].empty()) continue;
        const double scale = divide ? 1.0 / gd[static_cast<std::size_t>(q)] : 1.0;
        for (int p = 0; p < kk; ++p) {
          next[p].add_scaled(Poly::multiply(row[q], b[q][p], budget), scale);
          if (with_alpha_diag && p == q && alpha != 0.0) next[p].add_scaled(row[q], alpha * scale);
        }
      }
      return next;
    };
    std::vector<Poly> unit(static_cast<std::size_t>(kk), Poly(lay));
    unit[static_cast<std::size_t>(k)] = Poly::constant(lay, 1.0);
    // pk[j] = e_k (G_d^-1 G)^j
    std::vector<std::vector<Poly>> pk{unit};
    if (nominal) {
      // G^j = sum_v C(j, v) alpha^(j-v) B^v, G_d = C I
      std::vector<std::vector<Poly>> bv{unit};
      for (int v = 1; v <= order; ++v) bv.push_back(row_times(bv.back(), false, false));
      const double cd = gd[0];
      for (int j = 1; j <= order; ++j) {
        std::vector<Poly> row(static_cast<std::size_t>(kk), Poly(lay));
        for (int v = 0; v <= j; ++v) {
          const double coef = binom(j, v) * std::pow(alpha, j - v) / std::pow(cd, j);
          if (coef == 0.0) continue;
          for (int p = 0; p < kk; ++p) row[p].add_scaled(bv[v][p], coef);
        }
        pk.push_back(std::move(row));
      }
    } else {
      for (int j = 1; j <= order; ++j) pk.push_back(row_times(pk.back(), true, true));
    }
    for (int r = 0; r <= order; ++r)
      for (int kt = 0; kt <= r; ++kt) {
        const double coef = binom(r, kt) * ((kt % 2 == 0) ? 1.0 : -1.0);
        for (int p = 0; p < kk; ++p) s[p].add_scaled(pk[kt][p], coef);
      }
  }

  double scale = 1.0;
  if (normalize) {
    const double gk = gain_hat[static_cast<std::size_t>(k)];
    scale = ctx.kind == EqualizerKind::MRC ? 1.0 / gk : gk;
  }
  // w_n = sum_q S_q conj(H_hat_nq) / g_q
  std::vector<Poly> w(static_cast<std::size_t>(n_ant), Poly(lay));
  for (int n = 0; n < n_ant; ++n)
    for (int q = 0; q < kk; ++q) {
      if (s[q].empty()) continue;
      w[n].add_scaled(Poly::multiply(s[q], conj_h(n, q), budget), scale / gd[static_cast<std::size_t>(q)]);
    }

  const ChannelMatrix h = channel_matrix(ctx.drones, sys);
  out.t.assign(static_cast<std::size_t>(kk), Poly(lay));
  for (int p = 0; p < kk; ++p)
    for (int n = 0; n < n_ant; ++n) out.t[p].add_scaled(w[n], h.entries(n, p));
  out.gamma = Poly(lay);
  for (int n = 0; n < n_ant; ++n) out.gamma.add_scaled(Poly::multiply(w[n], w[n].conj(), budget), sys.noise_variance);
  return out;
}

Poly combine(const RowExpansion& row, const MomentContext& ctx, const std::vector<int>& beta) {
  Poly nu(row.layout.get());
  const int m = ctx.modulation_order;
  const cplx ref = std::conj(mpsk_symbol(beta[ctx.target], m));
  for (std::size_t p = 0; p < row.t.size(); ++p)
    nu.add_scaled(row.t[p], std::sqrt(ctx.drones[p].power) * mpsk_symbol(beta[p], m) * ref);
  return nu;
}

// Real part of c * poly, as a polynomial.
Poly real_part(const Poly& p, cplx c) {
  Poly out = p.scaled(0.5 * c);
  out.add_scaled(p.conj(), 0.5 * std::conj(c));
  return out;
}

std::vector<double> true_gains(const MomentContext& ctx) {
  std::vector<double> g;
  for (const auto& d : ctx.drones) g.push_back(path_gain(d.range, ctx.system));
  return g;
}

struct RangeNode {
  double weight = 1.0;
  std::vector<double> gain_hat;
};

std::vector<RangeNode> range_nodes(const MomentContext& ctx, bool needed) {
  std::vector<RangeNode> nodes{{1.0, true_gains(ctx)}};
  if (!needed) return nodes;
  const QuadratureRule rule = gauss_hermite_normal(ctx.range_nodes);
  for (std::size_t p = 0; p < ctx.drones.size(); ++p) {
    const double sd = ctx.errors.sigmas[p].range;
    if (sd == 0.0) continue;
    std::vector<RangeNode> next;
    for (const auto& base : nodes)
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        RangeNode n = base;
        n.weight *= rule.weights[i];
        const double d = ctx.drones[p].range + sd * rule.nodes[i];
        if (!(d > 0.0)) throw DomainError("range quadrature node is not positive; sigma_range too large");
        n.gain_hat[p] = path_gain(d, ctx.system);
        next.push_back(std::move(n));
      }
    nodes = std::move(next);
  }
  return nodes;
}

// Memoized E[x_v^e] under the small-angle model.
class MomentTable {
 public:
  explicit MomentTable(const MomentContext& ctx) : ctx_(ctx), k_(static_cast<int>(ctx.drones.size())) {}

  cplx operator()(int v, int e) {
    const long long key = static_cast<long long>(v) * 1000003LL + e;
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    cplx val;
    if (v < k_) {
      const auto& d = ctx_.drones[static_cast<std::size_t>(v)];
      const double coeff = -e * ctx_.system.phase_factor() * std::cos(d.doa);
      val = truncated_gaussian_cf(coeff, ctx_.errors.sigmas[static_cast<std::size_t>(v)].doa, ctx_.errors.theta_bounds);
    } else {
      const auto p = static_cast<std::size_t>(v - k_);
      const double coeff = 2.0 * kPi * e / ctx_.system.sample_rate;
      val = truncated_gaussian_cf(coeff, ctx_.errors.sigmas[p].doppler, ctx_.errors.doppler_bounds(p, ctx_.system));
    }
    cache_.emplace(key, val);
    return val;
  }

  cplx expect(const Poly& p) {
    return p.expectation([this](int v, int e) { return (*this)(v, e); });
  }

 private:
  const MomentContext& ctx_;
  int k_;
  std::unordered_map<long long, cplx> cache_;
};

std::vector<double> error_phases(const MomentContext& ctx, const std::vector<ParamTriple>& errors) {
  const std::size_t kk = ctx.drones.size();
  if (errors.size() != kk) throw DomainError("error vector length must equal drone count");
  std::vector<double> ph(2 * kk);
  const double c = ctx.system.phase_factor();
  for (std::size_t p = 0; p < kk; ++p) {
    const double th = ctx.drones[p].doa;
    ph[p] = -c * (std::sin(th + errors[p].doa) - std::sin(th));
    ph[kk + p] = 2.0 * kPi * errors[p].doppler / ctx.system.sample_rate;
  }
  return ph;
}

std::vector<double> perturbed_gains(const MomentContext& ctx, const std::vector<ParamTriple>& errors) {
  std::vector<double> g;
  for (std::size_t p = 0; p < ctx.drones.size(); ++p) g.push_back(path_gain(ctx.drones[p].range + errors[p].range, ctx.system));
  return g;
}

bool any_range_sigma(const MomentContext& ctx) {
  return std::any_of(ctx.errors.sigmas.begin(), ctx.errors.sigmas.end(), [](const ParamTriple& s) { return s.range > 0.0; });
}

void check_beta(const MomentContext& ctx) {
  if (ctx.beta.size() != ctx.drones.size()) throw DomainError("beta must have one entry per drone");
  for (int b : ctx.beta)
    if (b < 1 || b > ctx.modulation_order) throw DomainError("beta entries must lie in 1..M");
}

}  // namespace

cplx nu_expansion(const MomentContext& ctx, const std::vector<ParamTriple>& errors) {
  ctx.validate();
  check_beta(ctx);
  const RowExpansion row = build_row(ctx, perturbed_gains(ctx, errors), false);
  return combine(row, ctx, ctx.beta).evaluate(error_phases(ctx, errors));
}

double gamma_expansion(const MomentContext& ctx, const std::vector<ParamTriple>& errors) {
  ctx.validate();
  const RowExpansion row = build_row(ctx, perturbed_gains(ctx, errors), false);
  return row.gamma.evaluate(error_phases(ctx, errors)).real();
}

double moment_nu_power(const MomentContext& ctx, int k1, int k2, NuMoment which) {
  ctx.validate();
  check_beta(ctx);
  if (k1 < 0 || k1 > 16 || k2 < 0 || k2 > k1) throw DomainError("need 0 <= k2 <= k1 <= 16");
  if (k1 == 0) return 1.0;
  MomentTable table(ctx);
  double acc = 0.0;
  for (const auto& node : range_nodes(ctx, any_range_sigma(ctx))) {
    const RowExpansion row = build_row(ctx, node.gain_hat, false);
    const Poly t = combine(row, ctx, ctx.beta);
    const Poly x = real_part(t, 1.0);
    const Poly y = real_part(t, cplx(0.0, -1.0));
    const int ny = which == NuMoment::E8 ? k1 : k2;
    const int nx = which == NuMoment::E8 ? 0 : k1 - k2;
    Poly prod = Poly::constant(row.layout.get(), 1.0);
    for (int i = 0; i < ny; ++i) prod = Poly::multiply(prod, y, ctx.term_budget);
    for (int i = 0; i < nx; ++i) prod = Poly::multiply(prod, x, ctx.term_budget);
    acc += node.weight * table.expect(prod).real();
  }
  return acc;
}

GammaMoments gamma_moments(const MomentContext& ctx) {
  ctx.validate();
  MomentTable table(ctx);
  GammaMoments gm;
  for (const auto& node : range_nodes(ctx, any_range_sigma(ctx))) {
    const RowExpansion row = build_row(ctx, node.gain_hat, false);
    const double g0 = row.gamma.constant_sum().real();
    Poly centered = row.gamma;
    centered.add_constant(-g0);
    const double m1 = table.expect(centered).real();
    const double m2 = table.expect(Poly::multiply(centered, centered, ctx.term_budget)).real();
    gm.mean += node.weight * (g0 + m1);
    gm.second += node.weight * (g0 * g0 + 2.0 * g0 * m1 + m2);
  }
  return gm;
}

double sqrt_gamma_power_moment(double mean, double variance, int k) {
  if (!(mean > 0.0)) throw Undefined("E[Gamma] must be positive");
  const double half = 0.5 * k;
  return std::pow(mean, half) + k * (k - 2) / 8.0 * std::pow(mean, half - 2.0) * variance;
}

namespace {

// Row k of the weight matrix evaluated numerically for one error point under
// the small-angle phase law; mirrors build_row(..., normalize = true).
class NumericRow {
 public:
  explicit NumericRow(const MomentContext& ctx)
      : ctx_(ctx), n_(ctx.system.n_antennas), kk_(static_cast<int>(ctx.drones.size())),
        k_(static_cast<int>(ctx.target)), alpha_(ctx.regularizer()) {
    const double c = ctx.system.phase_factor();
    base_.resize(n_, kk_);
    for (int p = 0; p < kk_; ++p) {
      const auto& d = ctx.drones[static_cast<std::size_t>(p)];
      for (int n = 0; n < n_; ++n)
        base_(n, p) = std::polar(1.0, 2.0 * kPi * d.doppler / ctx.system.sample_rate - c * n * std::sin(d.doa));
    }
    h_ = channel_matrix(ctx.drones, ctx.system).entries;
    hh_.resize(n_, kk_);
    t.resize(static_cast<std::size_t>(kk_));
  }

  // phi[p]: angle phasor phase of drone p; phi_xi: Doppler phasor phase of the target
  void eval(const std::vector<double>& gain_hat, const std::vector<double>& phi, double phi_xi) {
    for (int p = 0; p < kk_; ++p) {
      const double extra = p == k_ ? phi_xi : 0.0;
      for (int n = 0; n < n_; ++n)
        hh_(n, p) = gain_hat[static_cast<std::size_t>(p)] * base_(n, p) * std::polar(1.0, n * phi[static_cast<std::size_t>(p)] + extra);
    }
    const double gk = gain_hat[static_cast<std::size_t>(k_)];
    if (ctx_.kind == EqualizerKind::MRC) {
      w_ = hh_.col(k_).adjoint() / gk;
    } else {
      CMatrix g = hh_.adjoint() * hh_;
      g.diagonal().array() += alpha_;
      const bool nominal = ctx_.approx.diagonal == DiagonalMode::Nominal;
      Eigen::VectorXd gd(kk_);
      for (int p = 0; p < kk_; ++p) {
        const double gp = gain_hat[static_cast<std::size_t>(p)];
        gd[p] = nominal ? n_ + alpha_ : n_ * gp * gp + alpha_;
      }
      CMatrix m = -(gd.cwiseInverse().asDiagonal() * g);
      m.diagonal().array() += 1.0;
      Eigen::RowVectorXcd s = Eigen::RowVectorXcd::Zero(kk_);
      s[k_] = 1.0;
      Eigen::RowVectorXcd acc = s;
      for (int r = 1; r <= ctx_.approx.neumann_order; ++r) {
        s = s * m;
        acc += s;
      }
      for (int p = 0; p < kk_; ++p) acc[p] /= gd[p];
      w_ = (acc * hh_.adjoint()) * gk;
    }
    for (int p = 0; p < kk_; ++p) t[static_cast<std::size_t>(p)] = (w_ * h_.col(p))(0, 0);
    gamma = ctx_.system.noise_variance * w_.squaredNorm();
  }

  std::vector<cplx> t;
  double gamma = 0.0;

 private:
  const MomentContext& ctx_;
  int n_, kk_, k_;
  double alpha_;
  CMatrix base_, h_, hh_;
  Eigen::RowVectorXcd w_;
};

// Smallest Gauss order whose exactness degree resolves exp(j omega x) for
// x ~ N(0, sigma^2) to ~1e-15. Callers pass half the worst-case frequency:
// the top exponents carry coefficients far below the Taylor-sum noise floor.
int gauss_order_for(double omega_sigma) {
  if (omega_sigma <= 0.0) return 1;
  for (int n = 2; n <= 64; ++n)
    if (2.0 * n * std::log(omega_sigma) - std::lgamma(2.0 * n + 1.0) < std::log(1e-15)) return n;
  return 64;
}

struct ErrorAxis {
  int variable = 0;  // drone index for angles, -1 for the target Doppler
  double kappa = 0.0;
  QuadratureRule rule;
};

// Moment sums shared by both engines.
struct MomentSums {
  double gamma0 = 0.0;
  std::vector<std::array<double, 2>> nu0;                // [combo][l]
  std::vector<std::array<std::vector<double>, 2>> cm;    // [combo][l][j]: E[(nu~ - nu~0)^j]
  double g_m1 = 0.0, g_m2 = 0.0;                         // E[Gamma - Gamma0], E[(Gamma - Gamma0)^2]
};

std::array<cplx, 2> decision_rotors(int m) {
  // conj of sin(pi/M) + j(-1)^l cos(pi/M): Re(rotor * nu) = d_l
  return {std::conj(cplx(std::sin(kPi / m), -std::cos(kPi / m))), std::conj(cplx(std::sin(kPi / m), std::cos(kPi / m)))};
}

void init_sums(MomentSums& s, std::size_t combos, int rt) {
  s.nu0.assign(combos, {0.0, 0.0});
  s.cm.resize(combos);
  for (auto& c : s.cm)
    for (auto& v : c) {
      v.assign(static_cast<std::size_t>(rt + 1), 0.0);
      v[0] = 1.0;
    }
}

MomentSums sums_by_expansion(const MomentContext& ctx, const std::vector<std::vector<int>>& combos,
                             const std::vector<RangeNode>& nodes, bool degenerate) {
  const int m = ctx.modulation_order;
  const int rt = ctx.approx.taylor_order;
  const auto rot = decision_rotors(m);
  MomentSums s;
  init_sums(s, combos.size(), rt);
  const RowExpansion base = build_row(ctx, true_gains(ctx), true);
  s.gamma0 = base.gamma.constant_sum().real();
  for (std::size_t b = 0; b < combos.size(); ++b) {
    const cplx v = combine(base, ctx, combos[b]).constant_sum();
    if (v == 0.0) throw Undefined("signal term is zero at the error-free point");
    for (int l = 0; l < 2; ++l) s.nu0[b][l] = decision_distance(v, m, l + 1);
  }
  if (degenerate) return s;
  MomentTable table(ctx);
  for (const auto& node : nodes) {
    const RowExpansion row = nodes.size() == 1 ? base : build_row(ctx, node.gain_hat, true);
    Poly gc = row.gamma;
    gc.add_constant(-s.gamma0);
    s.g_m1 += node.weight * table.expect(gc).real();
    s.g_m2 += node.weight * table.expect(Poly::multiply(gc, gc, ctx.term_budget)).real();
    for (std::size_t b = 0; b < combos.size(); ++b) {
      const Poly t = combine(row, ctx, combos[b]);
      for (int l = 0; l < 2; ++l) {
        Poly v = real_part(t, rot[static_cast<std::size_t>(l)]);
        v.add_constant(-s.nu0[b][l]);
        Poly pw = v;
        for (int j = 1; j <= rt; ++j) {
          s.cm[b][l][j] += node.weight * table.expect(pw).real();
          if (j < rt) pw = Poly::multiply(pw, v, ctx.term_budget);
        }
      }
    }
  }
  return s;
}

MomentSums sums_by_quadrature(const MomentContext& ctx, const std::vector<std::vector<int>>& combos,
                              const std::vector<RangeNode>& nodes, bool degenerate) {
  const int m = ctx.modulation_order;
  const int rt = ctx.approx.taylor_order;
  const std::size_t kk = ctx.drones.size();
  const auto rot = decision_rotors(m);
  MomentSums s;
  init_sums(s, combos.size(), rt);

  // symbol coefficient of t_p in nu~ for every combination
  std::vector<std::vector<cplx>> coef(combos.size(), std::vector<cplx>(kk));
  for (std::size_t b = 0; b < combos.size(); ++b) {
    const cplx ref = std::conj(mpsk_symbol(combos[b][ctx.target], m));
    for (std::size_t p = 0; p < kk; ++p)
      coef[b][p] = std::sqrt(ctx.drones[p].power) * mpsk_symbol(combos[b][p], m) * ref;
  }

  NumericRow row(ctx);
  const std::vector<double> zero(kk, 0.0);
  row.eval(true_gains(ctx), zero, 0.0);
  s.gamma0 = row.gamma;
  for (std::size_t b = 0; b < combos.size(); ++b) {
    cplx v = 0.0;
    for (std::size_t p = 0; p < kk; ++p) v += coef[b][p] * row.t[p];
    if (v == 0.0) throw Undefined("signal term is zero at the error-free point");
    for (int l = 0; l < 2; ++l) s.nu0[b][l] = decision_distance(v, m, l + 1);
  }
  if (degenerate) return s;

  // Angle phasors enter with exponents up to (R_N + 1)(N - 1); other drones'
  // Doppler phasors cancel in w_k, leaving only the target's.
  const int reach = (ctx.kind == EqualizerKind::MRC ? 1 : ctx.approx.neumann_order + 1) * (ctx.system.n_antennas - 1);
  const int power = std::max(rt, 4);
  std::vector<ErrorAxis> axes;
  for (std::size_t p = 0; p < kk; ++p) {
    const double sd = ctx.errors.sigmas[p].doa;
    if (sd == 0.0) continue;
    ErrorAxis ax;
    ax.variable = static_cast<int>(p);
    ax.kappa = -ctx.system.phase_factor() * std::cos(ctx.drones[p].doa) * sd;
    const int n = gauss_order_for(0.5 * power * std::max(reach, 1) * std::abs(ax.kappa));
    ax.rule = gauss_truncated_normal(n, ctx.errors.theta_bounds.lo / sd, ctx.errors.theta_bounds.hi / sd);
    axes.push_back(std::move(ax));
  }
  {
    const double sd = ctx.errors.sigmas[ctx.target].doppler;
    if (sd > 0.0) {
      ErrorAxis ax;
      ax.variable = -1;
      ax.kappa = 2.0 * kPi / ctx.system.sample_rate * sd;
      const Interval bd = ctx.errors.doppler_bounds(ctx.target, ctx.system);
      ax.rule = gauss_truncated_normal(gauss_order_for(0.5 * power * std::abs(ax.kappa)), bd.lo / sd, bd.hi / sd);
      axes.push_back(std::move(ax));
    }
  }
  double total = static_cast<double>(nodes.size());
  for (const auto& ax : axes) total *= static_cast<double>(ax.rule.nodes.size());
  const double work = total * static_cast<double>(combos.size() * 2 * static_cast<std::size_t>(rt + 1));
  if (work > 1000.0 * static_cast<double>(ctx.term_budget))
    throw BudgetExceeded("quadrature grid of " + std::to_string(static_cast<long long>(total)) + " points exceeds budget",
                         static_cast<std::size_t>(total));

  std::vector<double> phi(kk, 0.0);
  std::vector<std::size_t> idx(axes.size(), 0);
  for (const auto& node : nodes) {
    std::fill(idx.begin(), idx.end(), 0);
    for (;;) {
      double wgt = node.weight;
      double phi_xi = 0.0;
      std::fill(phi.begin(), phi.end(), 0.0);
      for (std::size_t a = 0; a < axes.size(); ++a) {
        const auto& ax = axes[a];
        wgt *= ax.rule.weights[idx[a]];
        const double ph = ax.kappa * ax.rule.nodes[idx[a]];
        if (ax.variable < 0) phi_xi = ph;
        else phi[static_cast<std::size_t>(ax.variable)] = ph;
      }
      row.eval(node.gain_hat, phi, phi_xi);
      const double gc = row.gamma - s.gamma0;
      s.g_m1 += wgt * gc;
      s.g_m2 += wgt * gc * gc;
      for (std::size_t b = 0; b < combos.size(); ++b) {
        cplx v = 0.0;
        for (std::size_t p = 0; p < kk; ++p) v += coef[b][p] * row.t[p];
        for (int l = 0; l < 2; ++l) {
          const double x = (rot[static_cast<std::size_t>(l)] * v).real() - s.nu0[b][l];
          double pw = wgt;
          auto& dst = s.cm[b][l];
          for (int j = 1; j <= rt; ++j) {
            pw *= x;
            dst[static_cast<std::size_t>(j)] += pw;
          }
        }
      }
      std::size_t a = 0;
      for (; a < axes.size(); ++a) {
        if (++idx[a] < axes[a].rule.nodes.size()) break;
        idx[a] = 0;
      }
      if (a == axes.size()) break;
    }
  }
  return s;
}

}  // namespace

double average_ser(const MomentContext& ctx) {
  ctx.validate();
  const int m = ctx.modulation_order;
  const int rt = ctx.approx.taylor_order;
  const auto combos = relative_combinations(ctx.drones.size(), ctx.target, m);
  const bool range_free = ctx.kind == EqualizerKind::MRC ||
                          (ctx.kind == EqualizerKind::ZF && ctx.approx.diagonal == DiagonalMode::Measured);
  const bool degenerate = ctx.errors.all_zero();
  const std::vector<RangeNode> nodes = range_nodes(ctx, !range_free && !degenerate && any_range_sigma(ctx));

  const MomentSums s = ctx.engine == MomentEngine::Expansion ? sums_by_expansion(ctx, combos, nodes, degenerate)
                                                             : sums_by_quadrature(ctx, combos, nodes, degenerate);
  const double gamma0 = s.gamma0;
  if (!(gamma0 > 0.0)) throw Undefined("noise term is zero at the error-free point");

  const double mean_gamma = gamma0 + s.g_m1;
  const double var_gamma = std::max(s.g_m2 - s.g_m1 * s.g_m1, 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < combos.size(); ++b) {
    for (int l = 0; l < 2; ++l) {
      const double v0 = s.nu0[b][l];
      const long double y0 = v0 / std::sqrt(gamma0);
      const double x0 = std::sqrt(2.0) * static_cast<double>(y0);
      double e = q_function(x0);
      if (!degenerate) {
        // E5(k) ~ E[nu~^k] / E[sqrt(Gamma)^k]
        std::vector<long double> e5(static_cast<std::size_t>(rt + 1));
        for (int k = 0; k <= rt; ++k) {
          long double raw = 0.0L;
          for (int j = 0; j <= k; ++j) raw += binom(k, j) * std::pow(static_cast<long double>(v0), k - j) * s.cm[b][l][j];
          e5[k] = raw / sqrt_gamma_power_moment(mean_gamma, var_gamma, k);
        }
        long double fact = 1.0L;
        for (int r = 1; r <= rt; ++r) {
          long double e3 = 0.0L;
          for (int k = 0; k <= r; ++k) e3 += binom(r, k) * e5[k] * std::pow(-y0, r - k);
          fact *= r;
          e += static_cast<double>(std::pow(std::sqrt(2.0L), r) * q_derivative(r, x0) * e3 / fact);
        }
      }
      total += e;
    }
  }
  return std::clamp(total / static_cast<double>(combos.size()), 0.0, 1.0);
}

SemiAnalyticSer average_ser_semianalytic(const MomentContext& ctx, std::size_t n_draws, const CounterRng& rng) {
  ctx.validate();
  if (n_draws < 1) throw DomainError("n_draws must be >= 1");
  const auto combos = relative_combinations(ctx.drones.size(), ctx.target, ctx.modulation_order);
  const ChannelMatrix h = channel_matrix(ctx.drones, ctx.system);
  const std::vector<double> powers = powers_of(ctx.drones);
  const int order = ctx.kind == EqualizerKind::MRC ? 0 : ctx.approx.neumann_order;
  // Welford running mean and squared deviation
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < n_draws; ++i) {
    const auto err = sample_errors(ctx.errors, ctx.system, rng.substream(i), &ctx.drones);
    const ChannelMatrix hh = channel_matrix(perturb(ctx.drones, err), ctx.system);
    const EqualizerWeights w = build_weights(ctx.kind, hh, ctx.system.noise_variance, ctx.symbol_power(), order,
                                             ctx.approx.diagonal);
    double s = 0.0;
    for (const auto& beta : combos)
      s += conditional_ser(w, h, powers, beta, ctx.modulation_order, ctx.system.noise_variance, ctx.target);
    s /= static_cast<double>(combos.size());
    const double delta = s - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (s - mean);
  }
  SemiAnalyticSer out;
  out.draws = n_draws;
  const double n = static_cast<double>(n_draws);
  out.ser = mean;
  const double var = n > 1 ? m2 / (n - 1) : 0.0;
  out.ci95 = 1.96 * std::sqrt(var / n);
  return out;
}

}  // namespace pascalsim
