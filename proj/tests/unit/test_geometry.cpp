#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "relugeo/erm.hpp"
#include "relugeo/geometry.hpp"

#include <random>

using namespace relugeo;

namespace {

SampleMatrix line012() {
  Mat S(3, 1);
  S << 0, 1, 2;
  return SampleMatrix(S);
}

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Random realizable scalar target built by a forward pass.
Vec random_realizable(const SampleMatrix& S, Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  NetworkSpec spec({S.p(), d, 1}, Activation::Relu);
  Vec theta(spec.parameter_count());
  for (Index i = 0; i < theta.size(); ++i) theta[i] = g(rng);
  return weight_map(spec, Weights::unflatten(spec, theta), S).col(0);
}

}  // namespace

TEST_CASE("constant targets are members at any width") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Mat Sm(4, 2);
  for (Index i = 0; i < 8; ++i) Sm(i / 2, i % 2) = g(rng);
  SampleMatrix S(Sm);
  auto cert = membership_2layer_q1(S, Vec::Constant(4, 5.0), 1);
  REQUIRE(cert.verdict == MembershipVerdict::Member);
  CHECK(cert.residual <= 1e-9);
  CHECK(cert.lambda == doctest::Approx(5.0));
}

TEST_CASE("one-kink shortfall on the 3-point line") {
  auto cert = membership_2layer_q1(line012(), vec({0, 2, 1}), 1);
  CHECK(cert.verdict == MembershipVerdict::NonMember);
  auto cert2 = membership_2layer_q1(line012(), vec({0, 2, 1}), 2);
  REQUIRE(cert2.verdict == MembershipVerdict::Member);
  CHECK(cert2.residual <= 1e-7);
}

TEST_CASE("membership witnesses replay by forward pass") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    Index n = 3 + static_cast<Index>(rng() % 2);
    Index d = 1 + static_cast<Index>(rng() % 2);
    std::normal_distribution<double> g;
    Mat Sm(n, 1);
    for (Index i = 0; i < n; ++i) Sm(i, 0) = g(rng);
    SampleMatrix S(Sm);
    Vec t = random_realizable(S, d, rng);
    auto cert = membership_2layer_q1(S, t, d);
    REQUIRE(cert.verdict == MembershipVerdict::Member);
    CHECK(cert.residual <= 1e-7 * (1.0 + t.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("membership invariances") {
  std::mt19937_64 rng(7);
  SampleMatrix S = line012();
  Vec t = vec({0, 2, 1});

  // bias shift never changes the verdict
  for (double lam : {-3.0, 0.25, 10.0}) {
    auto v1 = membership_2layer_q1(S, t, 1).verdict;
    auto v2 = membership_2layer_q1(S, Vec(t.array() + lam), 1).verdict;
    CHECK(v1 == v2);
  }
  // scaling: members stay members under every real scale
  Vec m = random_realizable(S, 2, rng);
  for (double c : {2.0, -1.5, 0.0}) {
    CHECK(membership_2layer_q1(S, Vec(c * m), 2).verdict == MembershipVerdict::Member);
  }
  // width monotonicity
  auto narrow = membership_2layer_q1(S, m, 2).verdict;
  auto wide = membership_2layer_q1(S, m, 3).verdict;
  CHECK(narrow == MembershipVerdict::Member);
  CHECK(wide == MembershipVerdict::Member);
}

TEST_CASE("membership is row-permutation equivariant") {
  std::mt19937_64 rng(11);
  Mat Sm(4, 1);
  Sm << 0, 1, 2, 3;
  SampleMatrix S(Sm);
  Vec t = vec({1, -1, 2, 0});
  std::vector<Index> perm{2, 0, 3, 1};
  Mat Sp(4, 1);
  Vec tp(4);
  for (Index i = 0; i < 4; ++i) {
    Sp.row(i) = Sm.row(perm[static_cast<std::size_t>(i)]);
    tp[i] = t[perm[static_cast<std::size_t>(i)]];
  }
  CHECK(membership_2layer_q1(S, t, 2).verdict ==
        membership_2layer_q1(SampleMatrix(Sp), tp, 2).verdict);
}

TEST_CASE("fit distance: known one-kink projection") {
  auto r = fit_distance_2layer_q1(line012(), vec({0, 2, 1}), 1);
  CHECK(r.distance * r.distance == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(r.nearest[0] == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(r.nearest[1] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(r.nearest[2] == doctest::Approx(1.5).epsilon(1e-7));
}

TEST_CASE("fit distance vanishes on members and at zero") {
  std::mt19937_64 rng(13);
  CHECK(fit_distance_2layer_q1(line012(), Vec::Zero(3), 2).distance <= 1e-9);
  for (int trial = 0; trial < 15; ++trial) {
    Vec t = random_realizable(line012(), 2, rng);
    CHECK(fit_distance_2layer_q1(line012(), t, 2).distance <= 1e-7 * (1 + t.norm()));
  }
}

TEST_CASE("fit distance nearest point is itself a member") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 15; ++trial) {
    Index n = 4;
    Mat Sm(n, 1);
    for (Index i = 0; i < n; ++i) Sm(i, 0) = g(rng);
    std::sort(Sm.data(), Sm.data() + n);
    SampleMatrix S(Sm);
    Vec t(n);
    for (Index i = 0; i < n; ++i) t[i] = g(rng) * 2.0;
    Index d = 1 + static_cast<Index>(rng() % 2);
    auto r = fit_distance_2layer_q1(S, t, d);
    auto back = membership_2layer_q1(S, r.nearest, d, 1e-7);
    CHECK(back.verdict == MembershipVerdict::Member);
  }
}

TEST_CASE("general membership: constant rows and realizable targets") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g;
  Mat Sm(5, 2);
  for (Index i = 0; i < 10; ++i) Sm(i / 2, i % 2) = g(rng);
  SampleMatrix S(Sm);

  Mat Tconst(5, 2);
  for (Index i = 0; i < 5; ++i) Tconst.row(i) << 1.5, -2.0;
  GeneralMembershipConfig cfg;
  cfg.max_iters = 8000;
  auto cert = membership_2layer_general(S, ResponseMatrix(Tconst), 2, cfg);
  CHECK(cert.verdict == MembershipVerdict::MemberNumeric);

  NetworkSpec spec({2, 2, 2}, Activation::Relu);
  Vec theta(spec.parameter_count());
  for (Index i = 0; i < theta.size(); ++i) theta[i] = g(rng);
  Mat T = weight_map(spec, Weights::unflatten(spec, theta), S);
  auto cert2 = membership_2layer_general(S, ResponseMatrix(T), 2, cfg);
  CHECK(cert2.verdict == MembershipVerdict::MemberNumeric);
  CHECK(cert2.residual <= 1e-6);
}

TEST_CASE("general membership stays inconclusive on the divergent instance") {
  // The target is outside the image, so a norm-capped search can report
  // MEMBER_NUMERIC only through a tolerance failure. Minimal-norm
  // representations of nearby image points still reach residuals around
  // 1e-5 under this cap, so the meaningful assertion is the verdict plus
  // the tolerance floor, not a larger ad-hoc bound.
  GeneralMembershipConfig cfg;
  cfg.restarts = 6;
  cfg.max_iters = 3000;
  cfg.norm_cap = 1e3;
  auto cert = membership_2layer_general(datasets::paper_s(), datasets::paper_t(), 2, cfg);
  CHECK(cert.verdict == MembershipVerdict::Inconclusive);
  CHECK(cert.residual > cfg.tol);
}

TEST_CASE("dimension bounds") {
  CHECK(dim_upper_bound(datasets::paper_s(), 2, 1) == 7);
  CHECK(dim_upper_bound(datasets::paper_s(), 2, 2) == 12);
  CHECK(dim_upper_bound(SampleMatrix(Mat::Zero(3, 2)), 1, 1) == 2);
}

TEST_CASE("generic dimension formulas") {
  auto g1 = generic_dim_2layer(2, 2, 1, 10);
  REQUIRE(g1.value.has_value());
  CHECK(*g1.value == 7);
  CHECK_FALSE(g1.heuristic_threshold);

  auto g2 = generic_dim_2layer(1, 2, 2, 50);
  REQUIRE(g2.value.has_value());
  CHECK(*g2.value == 10);
  CHECK(g2.heuristic_threshold);

  auto g3 = generic_dim_2layer(1, 1, 1, 6);
  REQUIRE(g3.value.has_value());
  CHECK(*g3.value == 3);

  CHECK_FALSE(generic_dim_2layer(3, 3, 1, 5).value.has_value());
}

TEST_CASE("numerical image dimension probes") {
  SampleMatrix S = generate_monotone_sample(7, 1, 123);
  NetworkSpec spec({1, 2, 1}, Activation::Relu);
  auto rep = numerical_image_dim(spec, S, 120, 7);
  CHECK(rep.numerical_rank_max == 5);  // 2 * (1 + 1) + 1
  CHECK(rep.numerical_rank_max <= rep.theoretical_upper);

  NetworkSpec spec2({2, 3, 1}, Activation::Relu);
  SampleMatrix Z(Mat::Zero(5, 2));
  auto rep2 = numerical_image_dim(spec2, Z, 40, 11);
  CHECK(rep2.numerical_rank_max == 1);
}

TEST_CASE("monotone samples are strictly increasing per column") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SampleMatrix S = generate_monotone_sample(6, 2, seed);
    for (Index c = 0; c < 2; ++c)
      for (Index i = 0; i + 1 < 6; ++i) CHECK(S.entries()(i, c) < S.entries()(i + 1, c));
  }
  // determinism
  SampleMatrix a = generate_monotone_sample(5, 3, 42);
  SampleMatrix b = generate_monotone_sample(5, 3, 42);
  CHECK((a.entries() - b.entries()).norm() == 0.0);
}

TEST_CASE("deep chain membership") {
  Vec s = vec({1, 2, 3, 4});
  CHECK(deep_chain_membership(s, vec({2, 2, 3, 3})).member);
  CHECK(deep_chain_membership(s, vec({2, 2, 3, 3})).orientation == 1);
  CHECK_FALSE(deep_chain_membership(s, vec({0, 2, 1, 3})).member);
  CHECK(deep_chain_membership(s, s).member);  // identity, activations inactive
  auto desc = deep_chain_membership(s, vec({3, 3, 2, 2}));
  CHECK(desc.member);
  CHECK(desc.orientation == -1);
  CHECK_FALSE(deep_chain_membership(s, vec({0, 1, 1, 2})).member);
  CHECK_THROWS_AS(deep_chain_membership(vec({2, 1}), vec({0, 0})), std::invalid_argument);
}

TEST_CASE("deep chain membership agrees with a brute-force clip search") {
  // discretized (c, e, L, U) search over clip(c s + e, L, U)
  Vec s = vec({0, 1, 2, 3});
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> pick(-2, 2);
  auto oracle = [&](const Vec& x) {
    for (double c = -3.0; c <= 3.0; c += 0.25)
      for (double e = -4.0; e <= 4.0; e += 0.25)
        for (double L = -4.0; L <= 4.0; L += 0.25)
          for (double U = L; U <= 4.0; U += 0.25) {
            double worst = 0.0;
            for (Index i = 0; i < 4; ++i) {
              double y = std::min(std::max(c * s[i] + e, L), U);
              worst = std::max(worst, std::abs(y - x[i]));
            }
            if (worst <= 1e-9) return true;
          }
    return false;
  };
  int checked = 0;
  for (int trial = 0; trial < 200 && checked < 40; ++trial) {
    Vec x(4);
    for (Index i = 0; i < 4; ++i) x[i] = pick(rng);
    bool ours = deep_chain_membership(s, x).member;
    bool ref = oracle(x);
    // The oracle only *finds* members on its grid; everything it reaches we
    // must accept.
    if (ref) {
      CHECK(ours);
      ++checked;
    }
  }
  CHECK(checked >= 20);
}
