#include <benchmark/benchmark.h>

#include "pascalsim/gaussian_moments.hpp"
#include "pascalsim/ser_analytic.hpp"

using namespace pascalsim;

namespace {

MomentContext context(EqualizerKind kind, int taylor) {
  MomentContext c;
  c.system = SystemConfig::half_wavelength(5, 2e-3, 1e5, 0.0);
  c.drones = {{10 * kDegree, 80.0, 1000.0, 1.0}, {25 * kDegree, 80.0, 2500.0, 1.0}};
  c.system.noise_variance = noise_variance_for_snr(c.drones[0], c.system, 12.0);
  c.errors = LocalizationErrorModel::uniform(2, {0.007, 1.8, 820.0});
  c.kind = kind;
  c.approx.taylor_order = taylor;
  return c;
}

void BM_AverageSer(benchmark::State& st) {
  const MomentContext c = context(static_cast<EqualizerKind>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(average_ser(c));
}
BENCHMARK(BM_AverageSer)
    ->Args({static_cast<int>(EqualizerKind::MRC), 8})
    ->Args({static_cast<int>(EqualizerKind::ZF), 4})
    ->Args({static_cast<int>(EqualizerKind::ZF), 8})
    ->Unit(benchmark::kMillisecond);

void BM_Semianalytic(benchmark::State& st) {
  const MomentContext c = context(EqualizerKind::ZF, 8);
  for (auto _ : st) benchmark::DoNotOptimize(average_ser_semianalytic(c, 1000, CounterRng(1)).ser);
}
BENCHMARK(BM_Semianalytic)->Unit(benchmark::kMillisecond);

void BM_TrigTriple(benchmark::State& st) {
  const TripleSigmas s{800.0, 0.01, 0.02, {-4800.0, 4800.0}, {-kPi, kPi}};
  double c1 = 0.1;
  for (auto _ : st) {
    benchmark::DoNotOptimize(trig_moment_triple({c1, 6e-5, 2.5, -1.7}, s, Parity::Cos));
    c1 += 1e-3;
  }
}
BENCHMARK(BM_TrigTriple);

}  // namespace
