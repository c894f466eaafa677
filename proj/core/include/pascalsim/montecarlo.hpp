#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pascalsim/equalize.hpp"
#include "pascalsim/localization.hpp"

namespace pascalsim {

enum class ErrorSource { AoMl, SampledModel };
enum class WeightMode { Exact, Neumann };
enum class SweepAxis { None, Snr, Pilots, Drones, Ratio };

std::string_view to_string(ErrorSource s) noexcept;
std::string_view to_string(WeightMode m) noexcept;
std::string_view to_string(SweepAxis a) noexcept;

struct Scenario {
  SystemConfig system;
  std::vector<DroneParams> drones;
  FrameConfig frame;  // n_subframes = pilots used for localization in a trial
  ErrorSource error_source = ErrorSource::AoMl;
  LocalizationErrorModel error_model;  // used in sampled-model mode
  std::vector<EqualizerKind> equalizers{EqualizerKind::MRC, EqualizerKind::ZF, EqualizerKind::MMSE};
  WeightMode weights = WeightMode::Exact;
  ApproxConfig approx;
  std::optional<double> snr_db;  // per-antenna SNR of drone 1; overrides system.noise_variance
  double resource_ratio = 1.0;   // pilot/data split label; PASCAL reuses pilots, so it has no effect
  std::size_t n_trials = 100;
  std::uint64_t seed = 1;
  AoMlOptions aoml;
  int jobs = 1;

  void validate() const;
  /// System config with the noise variance implied by snr_db.
  SystemConfig resolved_system() const;
  double symbol_power() const noexcept;
  bool operator==(const Scenario&) const = default;
};

struct TrialOutcome {
  std::vector<std::vector<std::size_t>> errors;  // [equalizer][drone]
  std::size_t symbols_per_drone = 0;
  std::optional<LocationEstimate> estimate;
  bool skipped = false;
  std::string note;
};

struct DroneSer {
  std::size_t errors = 0;
  std::size_t symbols = 0;
  double ser = 0.0;
  double ci95 = 0.0;
};

struct SerResult {
  EqualizerKind kind = EqualizerKind::ZF;
  double ser = 0.0;
  std::size_t errors = 0;
  std::size_t symbols = 0;
  double ci95_halfwidth = 0.0;
  std::vector<DroneSer> per_drone;
  std::size_t skipped_trials = 0;
};

/// 95% half-width: normal approximation, at least 3/n when fewer than 5 errors.
double ser_ci95(std::size_t errors, std::size_t symbols);

struct CampaignPoint {
  std::vector<SerResult> ser;                     // one per scenario equalizer (empty without data)
  std::optional<std::vector<ParamTriple>> rmse;   // AO-ML mode only
  std::vector<std::vector<ParamTriple>> errors;   // per-trial estimation errors, when requested
  std::size_t skipped_trials = 0;
};

struct CampaignOptions {
  bool simulate_data = true;
  bool keep_errors = false;
};

TrialOutcome run_trial(const Scenario& scenario, std::uint64_t trial_id, bool simulate_data = true);

CampaignPoint run_campaign_point(const Scenario& scenario, const CampaignOptions& opts = {});

/// One result per equalizer in scenario order.
std::vector<SerResult> estimate_ser(const Scenario& scenario);

/// AO-ML RMSE per drone over n_trials (no data symbols simulated).
std::vector<ParamTriple> measure_localization_rmse(const Scenario& scenario);

/// Error model whose sigmas equal the AO-ML RMSE of the scenario.
LocalizationErrorModel calibrate_error_model(const Scenario& scenario);

/// Scenario for the index-th sweep value, with its derived seed.
Scenario apply_axis(const Scenario& base, SweepAxis axis, double value, std::size_t index);

struct SweepPoint {
  double value = 0.0;
  Scenario scenario;
  CampaignPoint result;
};

std::vector<SweepPoint> sweep_campaign(const Scenario& base, SweepAxis axis, const std::vector<double>& values,
                                       const CampaignOptions& opts = {});

}  // namespace pascalsim
