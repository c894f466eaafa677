#include <benchmark/benchmark.h>

#include "pascalsim/equalize.hpp"
#include "pascalsim/signal_model.hpp"

using namespace pascalsim;

namespace {

ChannelMatrix channel(int n, int k) {
  const SystemConfig c = SystemConfig::half_wavelength(n, 2e-3, 1e5, 0.0);
  std::vector<DroneParams> d;
  for (int i = 0; i < k; ++i) d.push_back({(-40.0 + 80.0 * i / std::max(k - 1, 1)) * kDegree, 80.0, 1000.0 * (i + 1), 1.0});
  return channel_matrix(d, c);
}

void BM_ZfExact(benchmark::State& st) {
  const ChannelMatrix h = channel(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(zf_weights_exact(h).matrix.data());
}
BENCHMARK(BM_ZfExact)->Args({5, 2})->Args({16, 4})->Args({64, 8});

void BM_ZfNeumann(benchmark::State& st) {
  const ChannelMatrix h = channel(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  for (auto _ : st)
    benchmark::DoNotOptimize(zf_weights_neumann(h, 3, DiagonalMode::Measured).matrix.data());
}
BENCHMARK(BM_ZfNeumann)->Args({5, 2})->Args({16, 4})->Args({64, 8});

void BM_DetectQpsk(benchmark::State& st) {
  cplx x(0.3, -0.8);
  for (auto _ : st) {
    benchmark::DoNotOptimize(detect_mpsk(x, 4));
    x *= cplx(0.9998, 0.02);
  }
}
BENCHMARK(BM_DetectQpsk);

}  // namespace
