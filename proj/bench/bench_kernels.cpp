// Serial reference vs production kernels on a traffic-sized slab.
// Run: build/bench/nnlft_bench [--benchmark_filter=...]

#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "nnlft/loss.hpp"
#include "nnlft/reference.hpp"
#include "nnlft/solver.hpp"
#include "test_support.hpp"

using namespace nnlft;

namespace {

struct Problem {
  SparseTensor3 data;
  FactorModel model;
};

// 214 sensors x 61 days x 144 slots at the given density, rank 20.
const Problem& problem(double density) {
  static std::map<double, Problem> cache;
  auto it = cache.find(density);
  if (it == cache.end()) {
    std::mt19937_64 rng(99);
    SparseTensor3 t = fixtures::random_tensor({214, 61, 144}, density, rng, 0.0, 90.0);
    FactorModel m = init_factors(t.dims(), kDefaultRank, 1);
    it = cache.emplace(density, Problem{std::move(t), std::move(m)}).first;
  }
  return it->second;
}

double density_arg(const benchmark::State& state) { return state.range(0) / 1000.0; }

void BM_UpdateReference(benchmark::State& state) {
  const Problem& p = problem(density_arg(state));
  for (auto _ : state) {
    FactorModel m = p.model;
    reference::update_mode(m, p.data, kDefaultLambda, Mode::Sensor, LossKind::hybrid(),
                           kDefaultDenomGuard);
    benchmark::DoNotOptimize(m.sensors().data().data());
  }
  state.SetItemsProcessed(state.iterations() * p.data.size());
}

template <Execution Exec>
void BM_Update(benchmark::State& state) {
  const Problem& p = problem(density_arg(state));
  for (auto _ : state) {
    FactorModel m = p.model;
    update_mode(m, p.data, kDefaultLambda, Mode::Sensor, kDefaultDenomGuard, Exec);
    benchmark::DoNotOptimize(m.sensors().data().data());
  }
  state.SetItemsProcessed(state.iterations() * p.data.size());
}

void BM_ObjectiveReference(benchmark::State& state) {
  const Problem& p = problem(density_arg(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::objective(p.model, p.data, kDefaultLambda, LossKind::hybrid()));
  }
  state.SetItemsProcessed(state.iterations() * p.data.size());
}

template <Execution Exec>
void BM_Objective(benchmark::State& state) {
  const Problem& p = problem(density_arg(state));
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective(p.model, p.data, kDefaultLambda, LossKind::hybrid(), Exec));
  }
  state.SetItemsProcessed(state.iterations() * p.data.size());
}

}  // namespace

// Density in permille: 0.5% and ~2.6% (the full-scale observed fraction).
BENCHMARK(BM_UpdateReference)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Update<Execution::Serial>)->Arg(5)->Arg(26)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Update<Execution::Parallel>)->Arg(5)->Arg(26)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObjectiveReference)->Arg(5)->Arg(26)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Objective<Execution::Serial>)->Arg(5)->Arg(26)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Objective<Execution::Parallel>)->Arg(5)->Arg(26)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
