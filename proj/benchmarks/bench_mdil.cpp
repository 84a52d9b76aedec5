// Microbenchmarks for the hot paths: decompositions, the global dynamics,
// exact path enumeration, simulation, and the operator extension.

#include <benchmark/benchmark.h>

#include <vector>

#include "mdil/chain.hpp"
#include "mdil/decompose.hpp"
#include "mdil/dilation.hpp"
#include "mdil/quantum.hpp"
#include "mdil/rng.hpp"

using namespace mdil;

namespace {

StochasticMatrix random_matrix(int n, std::uint64_t seed) {
  std::vector<double> e(static_cast<size_t>(n) * n);
  std::uint64_t step = 0;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double u = 1e-3 + counter_uniform(seed, 0, step++);
      e[static_cast<size_t>(i) * n + j] = u;
      sum += u;
    }
    for (int j = 0; j < n; ++j) e[static_cast<size_t>(i) * n + j] /= sum;
  }
  return StochasticMatrix(n, std::move(e));
}

void bm_decompose_full(benchmark::State& state) {
  StochasticMatrix p = random_matrix(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_full(p));
}
BENCHMARK(bm_decompose_full)->Arg(2)->Arg(3)->Arg(4);

void bm_decompose_greedy(benchmark::State& state) {
  StochasticMatrix p = random_matrix(static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(decompose_greedy(p));
}
BENCHMARK(bm_decompose_greedy)->Arg(2)->Arg(4)->Arg(6);

void bm_alpha_apply(benchmark::State& state) {
  int steps = static_cast<int>(state.range(0));
  DilationSpec spec = universal_dilation(random_matrix(3, 3));
  int m = spec.alphabet().size();
  std::vector<int> symbols(static_cast<size_t>(steps));
  for (int c = 0; c < steps; ++c)
    symbols[static_cast<size_t>(c)] = c % m;
  GlobalState z{0, EnvironmentWindow(1, symbols), 0};
  for (auto _ : state) {
    GlobalState out = alpha_apply(spec, z, steps);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(bm_alpha_apply)->Arg(16)->Arg(256);

void bm_exact_path_law(benchmark::State& state) {
  DilationSpec spec = universal_dilation(random_matrix(2, 4));
  int horizon = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(exact_path_law(spec, 0, horizon));
}
BENCHMARK(bm_exact_path_law)->Arg(4)->Arg(8);

void bm_simulate(benchmark::State& state) {
  DilationSpec spec = universal_dilation(random_matrix(2, 5));
  int count = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(simulate(spec, 0, 8, 99, count));
}
BENCHMARK(bm_simulate)->Arg(100)->Arg(10000);

void bm_kraus_apply(benchmark::State& state) {
  DilationSpec spec = universal_dilation(random_matrix(3, 6));
  KrausChannel chan =
      kraus_channel(UnitaryV(spec.coupling()), build_env_vector(spec.q(1)));
  CMatrix a = CMatrix::Random(3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(chan.apply(a));
}
BENCHMARK(bm_kraus_apply);

void bm_flow(benchmark::State& state) {
  DilationSpec spec = minimal_dilation(random_matrix(2, 7));
  UnitaryV v(spec.coupling());
  CVector ups = build_env_vector(spec.q(1));
  CMatrix a = CMatrix::Random(2, 2);
  int t = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flow(v, ups, a, t));
}
BENCHMARK(bm_flow)->Arg(1)->Arg(2)->Arg(3);

}  // namespace

BENCHMARK_MAIN();
