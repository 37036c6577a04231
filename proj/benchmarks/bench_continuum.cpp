#include <benchmark/benchmark.h>

#include "vacsep/continuum.hpp"
#include "vacsep/sweeps.hpp"

using namespace vacsep::continuum;

static void BM_EpsilonContinuum(benchmark::State& state) {
  const double gap = static_cast<double>(state.range(0)) / 100.0;
  const ContinuumConfig c{0.84, 4.5, gap, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(epsilon_value(c));
}
BENCHMARK(BM_EpsilonContinuum)->Arg(0)->Arg(20)->Arg(100)->Unit(benchmark::kMicrosecond);

static void BM_ProfileFourier(benchmark::State& state) {
  const TriangularProfile p{0.84, 4.5};
  double k = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(profile_fourier(p, k));
    k = k < 100.0 ? k * 1.01 : 0.1;
  }
}
BENCHMARK(BM_ProfileFourier);

static void BM_MaximizeEpsilon(benchmark::State& state) {
  SweepOptions opts;
  opts.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(maximize_epsilon(0.2, opts).eps_max);
}
BENCHMARK(BM_MaximizeEpsilon)->Unit(benchmark::kSecond)->Iterations(1);

BENCHMARK_MAIN();
