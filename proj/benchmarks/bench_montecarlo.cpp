#include <benchmark/benchmark.h>

#include "pascalsim/montecarlo.hpp"

using namespace pascalsim;

namespace {

Scenario scenario(ErrorSource src) {
  Scenario s;
  s.system = SystemConfig::half_wavelength(5, 2e-3, 1e5, 0.0);
  s.drones = {{10 * kDegree, 80.0, 1000.0, 1.0}, {25 * kDegree, 80.0, 2500.0, 1.0}};
  s.snr_db = 12.0;
  s.frame = {30, 100, 4};
  s.error_source = src;
  s.error_model = LocalizationErrorModel::uniform(2, {0.007, 1.8, 820.0});
  return s;
}

void BM_AoMlTrial(benchmark::State& st) {
  const Scenario s = scenario(ErrorSource::AoMl);
  std::uint64_t id = 0;
  for (auto _ : st) benchmark::DoNotOptimize(run_trial(s, id++, false).estimate->final_cost);
}
BENCHMARK(BM_AoMlTrial)->Unit(benchmark::kMicrosecond);

void BM_SampledTrial(benchmark::State& st) {
  const Scenario s = scenario(ErrorSource::SampledModel);
  std::uint64_t id = 0;
  for (auto _ : st) benchmark::DoNotOptimize(run_trial(s, id++).errors.size());
}
BENCHMARK(BM_SampledTrial)->Unit(benchmark::kMicrosecond);

}  // namespace
