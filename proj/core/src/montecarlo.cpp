#include "pascalsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace pascalsim {

std::string_view to_string(ErrorSource s) noexcept { return s == ErrorSource::AoMl ? "aoml" : "sampled"; }
std::string_view to_string(WeightMode m) noexcept { return m == WeightMode::Exact ? "exact" : "neumann"; }
std::string_view to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::None: return "none";
    case SweepAxis::Snr: return "snr";
    case SweepAxis::Pilots: return "pilots";
    case SweepAxis::Drones: return "drones";
    case SweepAxis::Ratio: return "ratio";
  }
  return "?";
}

void Scenario::validate() const {
  system.validate();
  frame.validate();
  approx.validate();
  if (drones.empty()) throw DomainError("scenario has no drones");
  for (const auto& d : drones) d.validate(system);
  if (equalizers.empty()) throw DomainError("no equalizer selected");
  if (n_trials < 1) throw DomainError("n_trials must be >= 1");
  if (jobs < 1) throw DomainError("jobs must be >= 1");
  if (!(resource_ratio > 0.0)) throw DomainError("resource ratio must be positive");
  if (error_source == ErrorSource::SampledModel) {
    if (error_model.sigmas.size() != drones.size()) throw DomainError("error model needs one sigma triple per drone");
    error_model.validate();
  }
  if (!snr_db && !(system.noise_variance > 0.0) && error_source == ErrorSource::AoMl)
    throw DomainError("AO-ML mode needs a positive noise level");
}

SystemConfig Scenario::resolved_system() const {
  SystemConfig s = system;
  if (snr_db) s.noise_variance = noise_variance_for_snr(drones.front(), system, *snr_db);
  return s;
}

double Scenario::symbol_power() const noexcept {
  if (approx.symbol_power > 0.0) return approx.symbol_power;
  double s = 0.0;
  for (const auto& d : drones) s += d.power;
  return s / static_cast<double>(drones.size());
}

double ser_ci95(std::size_t errors, std::size_t symbols) {
  if (symbols == 0) return 0.0;
  const double n = static_cast<double>(symbols);
  const double p = static_cast<double>(errors) / n;
  double ci = 1.96 * std::sqrt(p * (1.0 - p) / n);
  if (errors < 5) ci = std::max(ci, 3.0 / n);
  return ci;
}

TrialOutcome run_trial(const Scenario& sc, std::uint64_t trial_id, bool simulate_data) {
  const SystemConfig sys = sc.resolved_system();
  const std::size_t kk = sc.drones.size();
  const CounterRng trial_rng = CounterRng(sc.seed).substream(trial_id);
  TrialOutcome out;
  out.errors.assign(sc.equalizers.size(), std::vector<std::size_t>(kk, 0));

  std::vector<DroneParams> psi_hat;
  if (sc.error_source == ErrorSource::AoMl) {
    CounterRng pilot_rng = trial_rng.substream(1);
    const CVector pilots = pilot_stack(sc.drones, sys, sc.frame.n_subframes, pilot_rng);
    const auto init = grid_initialize(pilots, sys, powers_of(sc.drones), sc.aoml);
    out.estimate = ao_ml_estimate(pilots, sys, init, sc.aoml);
    associate_labels(*out.estimate, sc.drones);
    psi_hat = out.estimate->drones;
  } else {
    psi_hat = perturb(sc.drones, sample_errors(sc.error_model, sys, trial_rng.substream(3), &sc.drones));
  }
  if (!simulate_data) return out;

  const ChannelMatrix h = channel_matrix(sc.drones, sys);
  const ChannelMatrix h_hat = channel_matrix(psi_hat, sys);
  const int order = sc.weights == WeightMode::Exact ? -1 : sc.approx.neumann_order;
  std::vector<CMatrix> w;
  try {
    for (auto kind : sc.equalizers)
      w.push_back(build_weights(kind, h_hat, sys.noise_variance, sc.symbol_power(), order, sc.approx.diagonal).matrix);
  } catch (const IllConditioned& e) {
    out.skipped = true;
    out.note = e.what();
    return out;
  }

  const int m = sc.frame.modulation_order;
  std::vector<double> amp(kk);
  for (std::size_t k = 0; k < kk; ++k) amp[k] = std::sqrt(sc.drones[k].power);
  CounterRng data_rng = trial_rng.substream(2);
  std::vector<int> idx(kk);
  CVector y(sys.n_antennas);
  const int t_count = sc.frame.symbols_per_subframe;
  for (int t = 0; t < t_count; ++t) {
    y.setZero();
    for (std::size_t k = 0; k < kk; ++k) {
      idx[k] = static_cast<int>(data_rng.below(static_cast<std::uint64_t>(m))) + 1;
      y += (amp[k] * mpsk_symbol(idx[k], m)) * h.entries.col(static_cast<Eigen::Index>(k));
    }
    if (sys.noise_variance > 0.0)
      for (Eigen::Index n = 0; n < y.size(); ++n) y[n] += data_rng.complex_normal(sys.noise_variance);
    for (std::size_t e = 0; e < w.size(); ++e) {
      const CVector x = w[e] * y;
      for (std::size_t k = 0; k < kk; ++k)
        if (detect_mpsk(x[static_cast<Eigen::Index>(k)], m) != idx[k]) ++out.errors[e][k];
    }
  }
  out.symbols_per_drone = static_cast<std::size_t>(t_count);
  return out;
}

CampaignPoint run_campaign_point(const Scenario& sc, const CampaignOptions& opts) {
  sc.validate();
  std::vector<TrialOutcome> outcomes(sc.n_trials);
  std::vector<std::string> failures(static_cast<std::size_t>(sc.jobs));
  auto worker = [&](int wid) {
    try {
      for (std::size_t i = static_cast<std::size_t>(wid); i < sc.n_trials; i += static_cast<std::size_t>(sc.jobs))
        outcomes[i] = run_trial(sc, i, opts.simulate_data);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(wid)] = e.what();
    }
  };
  if (sc.jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < sc.jobs; ++j) pool.emplace_back(worker, j);
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw NumericalFailure(f + " (seed " + std::to_string(sc.seed) + ")");

  CampaignPoint cp;
  const std::size_t kk = sc.drones.size();
  std::vector<LocationEstimate> estimates;
  for (const auto& o : outcomes) {
    if (o.skipped) ++cp.skipped_trials;
    if (o.estimate) estimates.push_back(*o.estimate);
  }
  if (static_cast<double>(cp.skipped_trials) > 0.01 * static_cast<double>(sc.n_trials))
    throw NumericalFailure(std::to_string(cp.skipped_trials) + " of " + std::to_string(sc.n_trials) +
                           " trials skipped as ill-conditioned (cap 1%, seed " + std::to_string(sc.seed) + ")");
  if (!estimates.empty()) {
    cp.rmse = rmse(estimates, sc.drones);
    if (opts.keep_errors)
      for (const auto& e : estimates) {
        std::vector<ParamTriple> d(kk);
        for (std::size_t k = 0; k < kk; ++k) {
          d[k].doa = e.drones[k].doa - sc.drones[k].doa;
          d[k].range = e.drones[k].range - sc.drones[k].range;
          d[k].doppler = e.drones[k].doppler - sc.drones[k].doppler;
        }
        cp.errors.push_back(std::move(d));
      }
  }
  if (!opts.simulate_data) return cp;

  for (std::size_t e = 0; e < sc.equalizers.size(); ++e) {
    SerResult r;
    r.kind = sc.equalizers[e];
    r.per_drone.resize(kk);
    r.skipped_trials = cp.skipped_trials;
    for (const auto& o : outcomes) {
      if (o.skipped) continue;
      for (std::size_t k = 0; k < kk; ++k) {
        r.per_drone[k].errors += o.errors[e][k];
        r.per_drone[k].symbols += o.symbols_per_drone;
      }
    }
    for (auto& d : r.per_drone) {
      d.ser = d.symbols ? static_cast<double>(d.errors) / static_cast<double>(d.symbols) : 0.0;
      d.ci95 = ser_ci95(d.errors, d.symbols);
      r.errors += d.errors;
      r.symbols += d.symbols;
    }
    r.ser = r.symbols ? static_cast<double>(r.errors) / static_cast<double>(r.symbols) : 0.0;
    r.ci95_halfwidth = ser_ci95(r.errors, r.symbols);
    cp.ser.push_back(std::move(r));
  }
  return cp;
}

std::vector<SerResult> estimate_ser(const Scenario& scenario) { return run_campaign_point(scenario).ser; }

std::vector<ParamTriple> measure_localization_rmse(const Scenario& scenario) {
  if (scenario.error_source != ErrorSource::AoMl) throw DomainError("RMSE measurement needs AO-ML mode");
  return *run_campaign_point(scenario, {.simulate_data = false}).rmse;
}

LocalizationErrorModel calibrate_error_model(const Scenario& scenario) {
  Scenario s = scenario;
  s.error_source = ErrorSource::AoMl;
  LocalizationErrorModel m = scenario.error_model;
  m.sigmas = measure_localization_rmse(s);
  return m;
}

Scenario apply_axis(const Scenario& base, SweepAxis axis, double value, std::size_t index) {
  Scenario s = base;
  auto as_count = [&](const char* what) {
    const double r = std::round(value);
    if (r < 1.0 || std::abs(r - value) > 1e-9) throw DomainError(std::string(what) + " axis value must be a positive integer");
    return static_cast<int>(r);
  };
  switch (axis) {
    case SweepAxis::None: break;
    case SweepAxis::Snr: s.snr_db = value; break;
    case SweepAxis::Pilots: s.frame.n_subframes = as_count("pilots"); break;
    case SweepAxis::Drones: {
      const int k = as_count("drones");
      if (static_cast<std::size_t>(k) > base.drones.size()) throw DomainError("drones axis value exceeds configured drones");
      s.drones.resize(static_cast<std::size_t>(k));
      if (s.error_model.sigmas.size() > s.drones.size()) s.error_model.sigmas.resize(s.drones.size());
      break;
    }
    case SweepAxis::Ratio:
      if (!(value > 0.0)) throw DomainError("ratio axis values must be positive");
      s.resource_ratio = value;
      break;
  }
  s.seed = CounterRng(base.seed).substream(index).key();
  return s;
}

std::vector<SweepPoint> sweep_campaign(const Scenario& base, SweepAxis axis, const std::vector<double>& values,
                                       const CampaignOptions& opts) {
  if (values.empty()) throw DomainError("sweep needs at least one value");
  std::vector<SweepPoint> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SweepPoint p;
    p.value = values[i];
    p.scenario = apply_axis(base, axis, values[i], i);
    p.result = run_campaign_point(p.scenario, opts);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace pascalsim
