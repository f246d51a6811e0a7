#include "relugeo/erm.hpp"

#include <benchmark/benchmark.h>

using namespace relugeo;

static void BM_FitDivergentInstance(benchmark::State& state) {
  NetworkSpec spec({2, 2, 2}, Activation::Relu);
  SampleMatrix S = datasets::paper_s();
  ResponseMatrix T = datasets::paper_t();
  FitConfig cfg;
  cfg.restarts = state.range(0);
  cfg.max_iters = 20000;
  for (auto _ : state) benchmark::DoNotOptimize(fit(spec, S, T, cfg));
}
BENCHMARK(BM_FitDivergentInstance)->Arg(4)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_ReplicateSequence(benchmark::State& state) {
  std::vector<std::uint64_t> ks{1, 10, 100, 1000, 1000000};
  for (auto _ : state) benchmark::DoNotOptimize(replicate_nonclosed_sequence(ks));
}
BENCHMARK(BM_ReplicateSequence);
