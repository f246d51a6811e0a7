#include "relugeo/cone.hpp"
#include "relugeo/network.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace relugeo;

namespace {

SampleMatrix random_sample(Index n, Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Mat S(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) S(i, j) = g(rng);
  return SampleMatrix(S);
}

}  // namespace

static void BM_EnumerateFaces(benchmark::State& state) {
  SampleMatrix S = random_sample(state.range(0), 2, 11);
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_faces(S));
}
BENCHMARK(BM_EnumerateFaces)->Arg(6)->Arg(10)->Arg(14);

static void BM_ConeMembership(benchmark::State& state) {
  Index n = state.range(0);
  SampleMatrix S = random_sample(n, 3, 13);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  Vec a(3);
  a << g(rng), g(rng), g(rng);
  Vec x = activate(Activation::Relu, S.entries() * a + Vec::Constant(n, g(rng)));
  for (auto _ : state) benchmark::DoNotOptimize(cone_membership(S, x));
}
BENCHMARK(BM_ConeMembership)->Arg(8)->Arg(16)->Arg(64);
