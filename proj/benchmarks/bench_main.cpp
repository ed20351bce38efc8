// Throughput of the hot paths: instruction draws, legal stabilization,
// strong-via-weak, the exact oracle and return probabilities.

#include <cstdint>

#include <benchmark/benchmark.h>

#include "arw/configuration.hpp"
#include "arw/engine.hpp"
#include "arw/estimators.hpp"
#include "arw/kernel.hpp"
#include "arw/oracle.hpp"
#include "arw/parallel.hpp"
#include "arw/params.hpp"
#include "arw/randomness.hpp"
#include "arw/volume.hpp"
#include "arw/walk.hpp"

namespace {

using namespace arw;

void BM_InstructionDraw(benchmark::State& state) {
  const InstructionStream stream(7, make_ssrw_kernel(static_cast<int>(state.range(0))), Params::with_rate(1.0));
  const int origin[3] = {0, 0, 0};
  const auto key = stream.site_key(std::span<const int>(origin, static_cast<std::size_t>(state.range(0))));
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(stream.draw_index(key, k++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_InstructionDraw)->Arg(1)->Arg(3);

// Legal stabilization of Bernoulli(rho) on B_n in d=1; items are topplings.
void BM_StabilizeD1(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const double rho = static_cast<double>(state.range(1)) / 100.0;
  const auto law = InitialLaw::bernoulli(rho);
  Engine engine(Volume::ball(1, n), InstructionStream(1, make_ssrw_kernel(1), Params::with_rate(1.0)));
  std::uint64_t replica = 0, topplings = 0;
  for (auto _ : state) {
    const auto seed = derive_seed(3, 0, replica++);
    engine.reset(seed);
    sample_initial(law, engine, seed);
    engine.stabilize(Mode::legal(), {SchedulerPolicy::kLifo, 0});
    topplings += engine.topplings();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(topplings));
}
BENCHMARK(BM_StabilizeD1)->Args({100, 25})->Args({500, 50})->Unit(benchmark::kMicrosecond);

// Strong-via-weak from a filled B_4 in d=3; items are replicas.
void BM_StrongViaWeakD3(benchmark::State& state) {
  const auto law = InitialLaw::filled_ball(4);
  Engine engine(Volume::ball(3, 4), InstructionStream(1, make_ssrw_kernel(3), Params::with_rate(1.0)));
  std::uint64_t replica = 0;
  for (auto _ : state) {
    engine.reset(derive_seed(5, 0, replica++));
    sample_initial(law, engine, 0);
    benchmark::DoNotOptimize(engine.strong_via_weak().chances);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StrongViaWeakD3)->Unit(benchmark::kMicrosecond);

// Exact solve of a filled B_1 in B_2 (d=1), floating point.
void BM_OracleSolve(benchmark::State& state) {
  const auto config = Configuration::filled_ball(Volume::ball(1, 2), 1);
  const auto kernel = make_ssrw_kernel(1);
  const auto params = Params::with_rate(1.0);
  oracle::Options options;
  options.arithmetic = oracle::Arithmetic::kFloating;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        oracle::exact_quantity(config, params, kernel, oracle::Quantity::kOriginOccupied, 0.0, options).value);
  }
}
BENCHMARK(BM_OracleSolve)->Unit(benchmark::kMillisecond);

void BM_ReturnProbabilitiesD3(benchmark::State& state) {
  const auto kernel = make_ssrw_kernel(3);
  for (auto _ : state) benchmark::DoNotOptimize(return_probabilities(kernel, static_cast<int>(state.range(0))).back());
}
BENCHMARK(BM_ReturnProbabilitiesD3)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
