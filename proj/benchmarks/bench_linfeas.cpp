#include "relugeo/linfeas.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace relugeo;

namespace {

LinearSystem random_system(Index vars, Index ineqs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  LinearSystem sys = LinearSystem::empty(vars);
  Vec x0(vars);
  for (Index j = 0; j < vars; ++j) x0[j] = g(rng);
  for (Index i = 0; i < ineqs; ++i) {
    Vec row(vars);
    for (Index j = 0; j < vars; ++j) row[j] = g(rng);
    sys.add_inequality(row, row.dot(x0) + std::abs(g(rng)));
  }
  return sys;
}

}  // namespace

static void BM_Feasibility(benchmark::State& state) {
  LinearSystem sys = random_system(state.range(0), 4 * state.range(0), 42);
  for (auto _ : state) benchmark::DoNotOptimize(solve_feasibility(sys));
}
BENCHMARK(BM_Feasibility)->Arg(5)->Arg(15)->Arg(40);

static void BM_NumericalRank(benchmark::State& state) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Index n = state.range(0);
  Mat A(n, n / 2);
  for (Index i = 0; i < A.size(); ++i) A(i / A.cols(), i % A.cols()) = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(numerical_rank(A));
}
BENCHMARK(BM_NumericalRank)->Arg(20)->Arg(100);
