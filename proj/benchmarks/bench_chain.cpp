#include <cmath>

#include <benchmark/benchmark.h>

#include "vacsep/chain.hpp"
#include "vacsep/chain_optimizer.hpp"

using namespace vacsep::chain;

static void BM_GroundState(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    ChainGroundState g(n, 0.999);
    benchmark::DoNotOptimize(g.q_at(0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GroundState)->RangeMultiplier(2)->Range(64, 2048)->Complexity();

static void BM_CollectiveVariance(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto params = ChainParams::from_physical(1.0, std::sqrt(2.0), n, 4);
  const auto g = ground_state(params);
  const auto a = DiscreteProfile::uniform(n, 0);
  const auto b = a.mirrored(block_b_offset(params));
  for (auto _ : state) benchmark::DoNotOptimize(collective_variance(g, a, b));
}
BENCHMARK(BM_CollectiveVariance)->Arg(8)->Arg(43)->Arg(88);

// Mirrored profile search at the critical block sizes for d = 2, 8 and 16.
static void BM_OptimizeMirrored(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto params = ChainParams::from_physical(1.0, std::sqrt(2.0), n, d);
  const auto g = ground_state(params);
  for (auto _ : state) benchmark::DoNotOptimize(optimize_profile(g, params, true).epsilon_max);
}
BENCHMARK(BM_OptimizeMirrored)->Args({2, 8})->Args({8, 43})->Args({16, 88})->Unit(benchmark::kMillisecond);
