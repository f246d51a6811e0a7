#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relugeo/erm.hpp"
#include "relugeo/linfeas.hpp"

#include <algorithm>
#include <random>

using namespace relugeo;

TEST_CASE("interval feasibility") {
  LinearSystem sys = LinearSystem::empty(1);
  Vec one(1);
  one << 1.0;
  sys.add_inequality(one, 1.0);    // x <= 1
  sys.add_inequality(-one, 0.0);   // -x <= 0
  auto r = solve_feasibility(sys);
  REQUIRE(r.status == FeasibilityStatus::Feasible);
  CHECK((*r.witness)[0] >= -1e-9);
  CHECK((*r.witness)[0] <= 1.0 + 1e-9);
  CHECK(r.max_violation <= 1e-9);
}

TEST_CASE("contradictory bounds are infeasible") {
  LinearSystem sys = LinearSystem::empty(1);
  Vec one(1);
  one << 1.0;
  sys.add_inequality(one, -1.0);   // x <= -1
  sys.add_inequality(-one, -1.0);  // x >= 1
  CHECK(solve_feasibility(sys).status == FeasibilityStatus::Infeasible);
}

TEST_CASE("face system for the full support on a line") {
  // s = (0,1,2): s_i a + b >= 1 for all i; a = 0, b = 1 is one witness.
  LinearSystem sys = LinearSystem::empty(2);
  for (double s : {0.0, 1.0, 2.0}) {
    Vec row(2);
    row << -s, -1.0;
    sys.add_inequality(row, -1.0);
  }
  auto r = solve_feasibility(sys);
  REQUIRE(r.status == FeasibilityStatus::Feasible);
  Vec w = *r.witness;
  for (double s : {0.0, 1.0, 2.0}) CHECK(s * w[0] + w[1] >= 1.0 - 1e-9);
}

TEST_CASE("feasibility status is invariant under row permutation") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Index v = 3, m = 6;
    Mat G(m, v);
    Vec h(m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < v; ++j) G(i, j) = g(rng);
      h[i] = g(rng);
    }
    LinearSystem a = LinearSystem::empty(v);
    a.G = G;
    a.h = h;
    std::vector<Index> perm(static_cast<std::size_t>(m));
    for (Index i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    LinearSystem b = LinearSystem::empty(v);
    b.G = Mat(m, v);
    b.h = Vec(m);
    for (Index i = 0; i < m; ++i) {
      b.G.row(i) = G.row(perm[static_cast<std::size_t>(i)]);
      b.h[i] = h[perm[static_cast<std::size_t>(i)]];
    }
    CHECK(solve_feasibility(a).status == solve_feasibility(b).status);
  }
}

TEST_CASE("feasible witnesses replay against the raw system") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  const double tol = 1e-9;
  for (int trial = 0; trial < 60; ++trial) {
    Index v = 4;
    LinearSystem sys = LinearSystem::empty(v);
    // random polytope around a known interior point
    Vec x0(v);
    for (Index j = 0; j < v; ++j) x0[j] = g(rng);
    for (int i = 0; i < 7; ++i) {
      Vec row(v);
      for (Index j = 0; j < v; ++j) row[j] = g(rng);
      sys.add_inequality(row, row.dot(x0) + std::abs(g(rng)));
    }
    Vec erow(v);
    for (Index j = 0; j < v; ++j) erow[j] = g(rng);
    sys.add_equality(erow, erow.dot(x0));
    auto r = solve_feasibility(sys, tol);
    REQUIRE(r.status == FeasibilityStatus::Feasible);
    Vec w = *r.witness;
    CHECK((sys.E * w - sys.f).cwiseAbs().maxCoeff() <= 2 * tol);
    CHECK((sys.G * w - sys.h).maxCoeff() <= 2 * tol);
  }
}

TEST_CASE("homogeneous face systems are scale consistent") {
  // Multiplying S by a positive constant never changes the status of
  // { s_i a + b >= 1 on I, <= 0 off I } once strictness is encoded via ">= 1".
  std::mt19937_64 rng(29);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 40; ++trial) {
    Index n = 5;
    Vec s(n);
    for (Index i = 0; i < n; ++i) s[i] = g(rng);
    std::uint32_t mask = rng() % (1u << n);
    for (double scale : {1.0, 3.5, 0.02}) {
      LinearSystem sys = LinearSystem::empty(2);
      for (Index i = 0; i < n; ++i) {
        Vec row(2);
        row << scale * s[i], 1.0;
        if (mask >> i & 1u)
          sys.add_inequality(-row, -1.0);
        else
          sys.add_inequality(row, 0.0);
      }
      LinearSystem ref = LinearSystem::empty(2);
      for (Index i = 0; i < n; ++i) {
        Vec row(2);
        row << s[i], 1.0;
        if (mask >> i & 1u)
          ref.add_inequality(-row, -1.0);
        else
          ref.add_inequality(row, 0.0);
      }
      CHECK(solve_feasibility(sys).status == solve_feasibility(ref).status);
    }
  }
}

TEST_CASE("least squares examples") {
  Mat I3 = Mat::Identity(3, 3);
  Vec b(3);
  b << 4, -1, 2;
  CHECK((least_squares(I3, b) - b).norm() <= 1e-14);

  Mat ones(2, 1);
  ones << 1, 1;
  Vec b2(2);
  b2 << 0, 2;
  CHECK(least_squares(ones, b2)[0] == doctest::Approx(1.0));
}

TEST_CASE("least squares residual is orthogonal to the column space") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    Mat A(10, 3);
    Vec b(10);
    for (Index i = 0; i < A.size(); ++i) A(i / 3, i % 3) = g(rng);
    for (Index i = 0; i < 10; ++i) b[i] = g(rng);
    Vec x = least_squares(A, b);
    double bound = 1e-10 * A.norm() * b.norm();
    CHECK((A.transpose() * (A * x - b)).cwiseAbs().maxCoeff() <= bound);
  }
}

TEST_CASE("minimum-norm solution on rank-deficient systems") {
  Mat A(2, 3);
  A << 1, 0, 0, 1, 0, 0;  // rank 1, x2/x3 free
  Vec b(2);
  b << 2, 2;
  Vec x = least_squares(A, b);
  CHECK(x[0] == doctest::Approx(2.0));
  CHECK(std::abs(x[1]) <= 1e-12);
  CHECK(std::abs(x[2]) <= 1e-12);
}

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(Mat::Identity(3, 3)) == 3);
  CHECK(numerical_rank(datasets::paper_s().augmented()) == 3);

  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  Vec u(6), v(4);
  for (Index i = 0; i < 6; ++i) u[i] = g(rng);
  for (Index i = 0; i < 4; ++i) v[i] = g(rng);
  Mat outer = u * v.transpose();
  CHECK(numerical_rank(outer) == 1);
  CHECK(numerical_rank(Mat::Zero(4, 4)) == 0);
}

TEST_CASE("rank is transpose invariant and bounded") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    Index r = 2 + static_cast<Index>(rng() % 5);
    Index c = 2 + static_cast<Index>(rng() % 5);
    Mat A(r, c);
    for (Index i = 0; i < A.size(); ++i) A(i / c, i % c) = g(rng);
    Index ra = numerical_rank(A);
    CHECK(ra == numerical_rank(Mat(A.transpose())));
    CHECK(ra <= std::min(r, c));
  }
}
