#pragma once

#include <vector>

#include "pascalsim/signal_model.hpp"

namespace pascalsim {

struct LocationEstimate {
  std::vector<DroneParams> drones;  // power copied from the known powers
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  std::vector<double> cost_history;  // initial cost, then one entry per sweep
};

/// Per-parameter triple; used both for standard deviations and for error draws.
struct ParamTriple {
  double doa = 0.0;      // rad
  double range = 0.0;    // m
  double doppler = 0.0;  // Hz
  bool operator==(const ParamTriple&) const = default;
};

struct LocalizationErrorModel {
  std::vector<ParamTriple> sigmas;  // one per drone
  Interval theta_bounds{-kPi, kPi};
  double doppler_span = 6.0;  // truncation at +-span*sigma, clipped to +-fs/2
  double range_span = 6.0;

  static LocalizationErrorModel uniform(std::size_t drones, ParamTriple sigma);
  Interval doppler_bounds(std::size_t k, const SystemConfig& cfg) const;
  Interval range_bounds(std::size_t k) const;
  bool all_zero() const noexcept;
  void validate() const;
  bool operator==(const LocalizationErrorModel&) const = default;
};

struct AoMlOptions {
  int grid_points = 181;       // DOA grid over [-90 deg, 90 deg]
  int refine_iterations = 20;  // golden-section steps
  double tolerance = 1e-8;     // relative cost improvement
  int max_sweeps = 50;
  bool operator==(const AoMlOptions&) const = default;
};

/// ||y1 - mu(psi)||^2 over the whole pilot stack.
double residual_cost(const std::vector<DroneParams>& psi, const CVector& pilots, const SystemConfig& cfg);

/// Best single-drone update with the other drones frozen. DOA comes from a
/// grid plus golden-section search of the concentrated likelihood; range and
/// Doppler follow in closed form from the least-squares complex gain. The
/// current parameters are kept when no candidate improves on them.
DroneParams subproblem_solve(const CVector& pilots, const SystemConfig& cfg,
                             const std::vector<DroneParams>& current, std::size_t k,
                             const AoMlOptions& opts = {});

/// Sequential start: strongest drone first, each fitted to the residual of
/// the drones already placed.
std::vector<DroneParams> grid_initialize(const CVector& pilots, const SystemConfig& cfg,
                                         const std::vector<double>& powers, const AoMlOptions& opts = {});

LocationEstimate ao_ml_estimate(const CVector& pilots, const SystemConfig& cfg,
                                const std::vector<DroneParams>& init, const AoMlOptions& opts = {});

/// Root-mean-square error per drone and parameter.
std::vector<ParamTriple> rmse(const std::vector<LocationEstimate>& estimates,
                              const std::vector<DroneParams>& truth);

/// Largest fraction of the true range a sampled range error may remove.
inline constexpr double kMaxRangeShrink = 0.99;

/// One draw of truncated zero-mean Gaussian errors. Drone k uses its own
/// substream, so draws for one drone do not depend on the other drones' sigmas.
/// With truth given, range errors are also truncated below at
/// -kMaxRangeShrink * range so the perturbed range stays positive.
std::vector<ParamTriple> sample_errors(const LocalizationErrorModel& model, const SystemConfig& cfg,
                                       const CounterRng& rng, const std::vector<DroneParams>* truth = nullptr);

/// Relabels estimated drones so that the total squared DOA distance to the
/// reference list is minimal. Identical pilots leave labels ambiguous.
void associate_labels(LocationEstimate& est, const std::vector<DroneParams>& reference);

std::vector<DroneParams> perturb(const std::vector<DroneParams>& truth, const std::vector<ParamTriple>& errors);

}  // namespace pascalsim
