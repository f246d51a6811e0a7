#include "relugeo/geometry.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace relugeo;

namespace {

struct Instance {
  Mat S;
  Vec t;
};

Instance line_instance(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat S(n, 1);
  for (Index i = 0; i < n; ++i) S(i, 0) = g(rng);
  std::sort(S.data(), S.data() + n);
  Vec t(n);
  for (Index i = 0; i < n; ++i) t[i] = 2.0 * g(rng);
  return {S, t};
}

}  // namespace

static void BM_Membership2LayerQ1(benchmark::State& state) {
  Instance inst = line_instance(state.range(0), 5);
  SampleMatrix S(inst.S);
  for (auto _ : state)
    benchmark::DoNotOptimize(membership_2layer_q1(S, inst.t, 2));
}
BENCHMARK(BM_Membership2LayerQ1)->Arg(4)->Arg(6)->Arg(8);

static void BM_FitDistance2LayerQ1(benchmark::State& state) {
  Instance inst = line_instance(state.range(0), 9);
  SampleMatrix S(inst.S);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_distance_2layer_q1(S, inst.t, 2));
}
BENCHMARK(BM_FitDistance2LayerQ1)->Arg(4)->Arg(6)->Arg(8);

static void BM_NumericalImageDim(benchmark::State& state) {
  SampleMatrix S = generate_monotone_sample(state.range(0), 2, 123);
  NetworkSpec spec({2, 2, 1}, Activation::Relu);
  for (auto _ : state)
    benchmark::DoNotOptimize(numerical_image_dim(spec, S, 50, 7));
}
BENCHMARK(BM_NumericalImageDim)->Arg(10)->Arg(30);
