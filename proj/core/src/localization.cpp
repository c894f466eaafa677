#include "pascalsim/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pascalsim {

LocalizationErrorModel LocalizationErrorModel::uniform(std::size_t drones, ParamTriple sigma) {
  LocalizationErrorModel m;
  m.sigmas.assign(drones, sigma);
  return m;
}

Interval LocalizationErrorModel::doppler_bounds(std::size_t k, const SystemConfig& cfg) const {
  const double b = std::min(doppler_span * sigmas.at(k).doppler, 0.5 * cfg.sample_rate);
  return {-b, b};
}

Interval LocalizationErrorModel::range_bounds(std::size_t k) const {
  const double b = range_span * sigmas.at(k).range;
  return {-b, b};
}

bool LocalizationErrorModel::all_zero() const noexcept {
  return std::all_of(sigmas.begin(), sigmas.end(),
                     [](const ParamTriple& s) { return s.doa == 0.0 && s.range == 0.0 && s.doppler == 0.0; });
}

void LocalizationErrorModel::validate() const {
  for (const auto& s : sigmas)
    if (!(s.doa >= 0.0 && s.range >= 0.0 && s.doppler >= 0.0)) throw DomainError("error sigmas must be >= 0");
  if (!(theta_bounds.lo < 0.0 && theta_bounds.hi > 0.0)) throw DomainError("theta bounds must bracket 0");
  if (!(doppler_span > 0.0 && range_span > 0.0)) throw DomainError("truncation spans must be positive");
}

namespace {

struct PilotMean {
  CVector mean;
  int n_pilots = 0;
};

PilotMean pilot_mean(const CVector& pilots, const SystemConfig& cfg) {
  const int n = cfg.n_antennas;
  if (pilots.size() == 0 || pilots.size() % n != 0) throw DomainError("pilot stack length must be a multiple of N");
  PilotMean pm;
  pm.n_pilots = static_cast<int>(pilots.size() / n);
  pm.mean = CVector::Zero(n);
  for (int l = 0; l < pm.n_pilots; ++l) pm.mean += pilots.segment(static_cast<Eigen::Index>(l) * n, n);
  pm.mean /= static_cast<double>(pm.n_pilots);
  return pm;
}

CVector model_mean(const std::vector<DroneParams>& psi, const SystemConfig& cfg, std::size_t skip) {
  CVector m = CVector::Zero(cfg.n_antennas);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (i == skip) continue;
    const auto& d = psi[i];
    const cplx g = std::sqrt(d.power) * std::polar(path_gain(d.range, cfg), 2.0 * kPi * d.doppler / cfg.sample_rate);
    m += g * steering_vector(d.doa, cfg);
  }
  return m;
}

// a(theta)^H r
cplx beam(const CVector& r, double doa, const SystemConfig& cfg) {
  const double step = cfg.phase_factor() * std::sin(doa);
  cplx acc = 0.0;
  for (Eigen::Index n = 0; n < r.size(); ++n) acc += std::polar(1.0, step * static_cast<double>(n)) * r[n];
  return acc;
}

constexpr double kDoaLimit = 0.5 * kPi - 1e-9;

// DOA maximising |a^H r|^2 and the matching (range, Doppler).
DroneParams fit_single(const CVector& r, const SystemConfig& cfg, double power, const AoMlOptions& opts) {
  const int g = std::max(opts.grid_points, 3);
  const double step = kPi / (g - 1);
  auto profile = [&](double th) { return std::norm(beam(r, th, cfg)); };

  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i < g; ++i) {
    const double th = std::clamp(-0.5 * kPi + i * step, -kDoaLimit, kDoaLimit);
    const double v = profile(th);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double th_best = std::clamp(-0.5 * kPi + best * step, -kDoaLimit, kDoaLimit);

  double a = std::max(th_best - step, -kDoaLimit);
  double b = std::min(th_best + step, kDoaLimit);
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = profile(x1), f2 = profile(x2);
  for (int it = 0; it < opts.refine_iterations; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = profile(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = profile(x2);
    }
  }
  const double th_ref = f1 > f2 ? x1 : x2;
  if (std::max(f1, f2) > best_val) th_best = th_ref;

  const cplx gain = beam(r, th_best, cfg) / static_cast<double>(cfg.n_antennas);
  DroneParams d;
  d.doa = th_best;
  d.power = power;
  const double mag = std::abs(gain);
  d.range = mag > 0.0 ? std::sqrt(power) * cfg.wavelength / (4.0 * kPi * mag) : 1e300;
  d.doppler = cfg.sample_rate * std::arg(gain) / (2.0 * kPi);
  if (std::abs(d.doppler) >= 0.5 * cfg.sample_rate) d.doppler = std::copysign(0.5 * cfg.sample_rate * (1.0 - 1e-12), d.doppler);
  return d;
}

}  // namespace

double residual_cost(const std::vector<DroneParams>& psi, const CVector& pilots, const SystemConfig& cfg) {
  const int n = cfg.n_antennas;
  if (pilots.size() == 0 || pilots.size() % n != 0) throw DomainError("pilot stack length must be a multiple of N");
  const CVector m = model_mean(psi, cfg, psi.size());
  double cost = 0.0;
  const Eigen::Index l = pilots.size() / n;
  for (Eigen::Index p = 0; p < l; ++p)
    for (int i = 0; i < n; ++i) cost += std::norm(pilots[p * n + i] - m[i]);
  return cost;
}

DroneParams subproblem_solve(const CVector& pilots, const SystemConfig& cfg,
                             const std::vector<DroneParams>& current, std::size_t k, const AoMlOptions& opts) {
  if (k >= current.size()) throw DomainError("drone index out of range");
  const PilotMean pm = pilot_mean(pilots, cfg);
  const CVector r = pm.mean - model_mean(current, cfg, k);
  std::vector<DroneParams> trial = current;
  trial[k] = fit_single(r, cfg, current[k].power, opts);
  if (residual_cost(trial, pilots, cfg) < residual_cost(current, pilots, cfg)) return trial[k];
  return current[k];
}

std::vector<DroneParams> grid_initialize(const CVector& pilots, const SystemConfig& cfg,
                                         const std::vector<double>& powers, const AoMlOptions& opts) {
  if (powers.empty()) throw DomainError("no drones");
  const PilotMean pm = pilot_mean(pilots, cfg);
  std::vector<std::size_t> order(powers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return powers[a] > powers[b]; });

  std::vector<DroneParams> psi(powers.size());
  CVector r = pm.mean;
  for (std::size_t k : order) {
    psi[k] = fit_single(r, cfg, powers[k], opts);
    const auto& d = psi[k];
    r -= std::sqrt(d.power) * std::polar(path_gain(d.range, cfg), 2.0 * kPi * d.doppler / cfg.sample_rate) *
         steering_vector(d.doa, cfg);
  }
  return psi;
}

LocationEstimate ao_ml_estimate(const CVector& pilots, const SystemConfig& cfg,
                                const std::vector<DroneParams>& init, const AoMlOptions& opts) {
  if (init.empty()) throw DomainError("no drones");
  LocationEstimate est;
  est.drones = init;
  double cost = residual_cost(est.drones, pilots, cfg);
  est.cost_history.push_back(cost);
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (std::size_t k = 0; k < est.drones.size(); ++k) est.drones[k] = subproblem_solve(pilots, cfg, est.drones, k, opts);
    const double next = residual_cost(est.drones, pilots, cfg);
    est.cost_history.push_back(next);
    est.iterations = sweep + 1;
    const double improvement = cost - next;
    cost = next;
    if (improvement <= opts.tolerance * std::max(est.cost_history[est.cost_history.size() - 2], 1e-300)) {
      est.converged = true;
      break;
    }
  }
  est.final_cost = cost;
  return est;
}

std::vector<ParamTriple> rmse(const std::vector<LocationEstimate>& estimates, const std::vector<DroneParams>& truth) {
  if (estimates.empty()) throw DomainError("rmse needs at least one estimate");
  std::vector<ParamTriple> acc(truth.size());
  for (const auto& e : estimates) {
    if (e.drones.size() != truth.size()) throw DomainError("estimate/truth drone count mismatch");
    for (std::size_t k = 0; k < truth.size(); ++k) {
      const double a = e.drones[k].doa - truth[k].doa;
      const double b = e.drones[k].range - truth[k].range;
      const double c = e.drones[k].doppler - truth[k].doppler;
      acc[k].doa += a * a;
      acc[k].range += b * b;
      acc[k].doppler += c * c;
    }
  }
  const double n = static_cast<double>(estimates.size());
  for (auto& t : acc) {
    t.doa = std::sqrt(t.doa / n);
    t.range = std::sqrt(t.range / n);
    t.doppler = std::sqrt(t.doppler / n);
  }
  return acc;
}

namespace {
double truncated_normal(CounterRng& rng, double sigma, Interval bounds) {
  if (sigma == 0.0) return 0.0;
  for (;;) {
    const double x = sigma * rng.normal();
    if (x >= bounds.lo && x <= bounds.hi) return x;
  }
}
}  // namespace

std::vector<ParamTriple> sample_errors(const LocalizationErrorModel& model, const SystemConfig& cfg,
                                       const CounterRng& rng, const std::vector<DroneParams>* truth) {
  if (truth && truth->size() != model.sigmas.size()) throw DomainError("error model/truth drone count mismatch");
  std::vector<ParamTriple> out(model.sigmas.size());
  for (std::size_t k = 0; k < model.sigmas.size(); ++k) {
    const auto& s = model.sigmas[k];
    CounterRng theta_rng = rng.substream(3 * k);
    CounterRng range_rng = rng.substream(3 * k + 1);
    CounterRng doppler_rng = rng.substream(3 * k + 2);
    Interval rb = model.range_bounds(k);
    if (truth) rb.lo = std::max(rb.lo, -kMaxRangeShrink * (*truth)[k].range);
    out[k].doa = truncated_normal(theta_rng, s.doa, model.theta_bounds);
    out[k].range = truncated_normal(range_rng, s.range, rb);
    out[k].doppler = truncated_normal(doppler_rng, s.doppler, model.doppler_bounds(k, cfg));
  }
  return out;
}

void associate_labels(LocationEstimate& est, const std::vector<DroneParams>& reference) {
  const std::size_t kk = reference.size();
  if (est.drones.size() != kk) throw DomainError("estimate/reference drone count mismatch");
  if (kk > 9) throw DomainError("label association supports at most 9 drones");
  std::vector<std::size_t> perm(kk), best;
  std::iota(perm.begin(), perm.end(), 0);
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
      const double d = est.drones[perm[k]].doa - reference[k].doa;
      c += d * d;
    }
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<DroneParams> out(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    out[k] = est.drones[best[k]];
    out[k].power = reference[k].power;
  }
  est.drones = std::move(out);
}

std::vector<DroneParams> perturb(const std::vector<DroneParams>& truth, const std::vector<ParamTriple>& errors) {
  if (truth.size() != errors.size()) throw DomainError("error/truth drone count mismatch");
  std::vector<DroneParams> out = truth;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    out[k].doa += errors[k].doa;
    out[k].range += errors[k].range;
    out[k].doppler += errors[k].doppler;
    if (!(out[k].range > 0.0)) throw DomainError("perturbed range is not positive");
  }
  return out;
}

}  // namespace pascalsim
