#include "relugeo/smooth.hpp"

#include "relugeo/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace relugeo {

namespace {

/// Weighted pool-adjacent-violators projection onto the nondecreasing cone.
Vec pava_nondecreasing(const Vec& t) {
  const Index n = t.size();
  std::vector<double> value;
  std::vector<double> weight;
  value.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    value.push_back(t[i]);
    weight.push_back(1.0);
    while (value.size() >= 2 && value[value.size() - 2] > value.back()) {
      double w = weight[weight.size() - 2] + weight.back();
      double v = (value[value.size() - 2] * weight[weight.size() - 2] +
                  value.back() * weight.back()) /
                 w;
      value.pop_back();
      weight.pop_back();
      value.back() = v;
      weight.back() = w;
    }
  }
  Vec out(n);
  Index at = 0;
  for (std::size_t b = 0; b < value.size(); ++b)
    for (Index r = 0; r < static_cast<Index>(weight[b]); ++r) out[at++] = value[b];
  return out;
}

}  // namespace

IsotonicBound isotonic_bound(const Vec& t) {
  detail::require(t.size() >= 1, "isotonic_bound: need n >= 1");
  Vec up = pava_nondecreasing(t);
  Vec rev = t.reverse();
  Vec down_rev = pava_nondecreasing(rev);
  Vec down = down_rev.reverse();
  double du = (up - t).squaredNorm();
  double dd = (down - t).squaredNorm();
  IsotonicBound out;
  if (du <= dd) {
    out.sq_distance = du;
    out.minimizer = up;
    out.nondecreasing = true;
  } else {
    out.sq_distance = dd;
    out.minimizer = down;
    out.nondecreasing = false;
  }
  return out;
}

namespace {

double sigma(Activation act, double x) {
  switch (act) {
    case Activation::Tanh: return std::tanh(x);
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    default: throw std::invalid_argument("chain analysis needs a smooth activation");
  }
}

/// Exact interpolation of a strictly monotone 3-point target by
/// c sigma(a s + b) + d on s = (0, 1, 2). The difference ratio
/// (t2-t1)/(t3-t2) sweeps (exp(-ga), exp(ga)) as b runs over R (g = 2 for
/// tanh, 1 for sigmoid), so a wide enough slope plus a bisection on b works.
std::optional<Weights> monotone_witness(Activation act, const Vec& t) {
  double d1 = t[1] - t[0], d2 = t[2] - t[1];
  if (d1 == 0.0 || d2 == 0.0 || (d1 > 0) != (d2 > 0)) return std::nullopt;
  double r = d1 / d2;
  double growth = act == Activation::Tanh ? 2.0 : 1.0;
  double a = std::log(std::max(r, 1.0 / r)) / growth + 1.0;

  auto g = [&](double b) {
    double num = sigma(act, a + b) - sigma(act, b);
    double den = sigma(act, 2 * a + b) - sigma(act, a + b);
    if (den == 0.0) return num >= 0 ? 1e300 : -1e300;
    return num / den - r;
  };
  double B = 4.0;
  while (B < 320.0 && !(g(-B) < 0.0 && g(B) > 0.0)) B *= 2.0;
  if (!(g(-B) < 0.0 && g(B) > 0.0)) return std::nullopt;
  double lo = -B, hi = B;
  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  double b = 0.5 * (lo + hi);
  double den = sigma(act, a + b) - sigma(act, b);
  if (den == 0.0) return std::nullopt;
  double c = d1 / den;
  double dd = t[0] - c * sigma(act, b);

  Mat A1(1, 1), A2(1, 1);
  A1 << a;
  A2 << c;
  Vec b1(1), b2(1);
  b1 << b;
  b2 << dd;
  return Weights({{A1, b1}, {A2, b2}});
}

}  // namespace

ChainAnalysis tanh_example_analysis(const Vec& t, const ChainAnalysisConfig& config) {
  detail::require(t.size() == 3, "tanh_example_analysis: 3-sample example");
  Vec s = datasets::tanh_example_s();
  ChainAnalysis out;
  out.sample = s;
  out.target = t;
  out.isotonic = isotonic_bound(t);

  NetworkSpec spec({1, 1, 1}, config.activation);
  SampleMatrix S{Mat(s)};
  ResponseMatrix T{Mat(t)};

  FitReport rep = fit(spec, S, T, config.fit);
  out.best_sq_loss = rep.best_sq_loss;
  out.best_norm = rep.best_norm;
  out.final_norm = rep.trajectories[static_cast<std::size_t>(rep.best_restart)].back().norm;

  // Constant targets are realized with a zero output weight; strictly
  // monotone ones by exact interpolation. Anything else (a pooled tie in the
  // isotonic projection) lies in the closure but not the image.
  std::optional<Weights> witness;
  if (t.maxCoeff() - t.minCoeff() == 0.0) {
    Mat A1(1, 1), A2(1, 1);
    A1 << 1.0;
    A2 << 0.0;
    Vec b1(1), b2(1);
    b1 << 0.0;
    b2 << t[0];
    witness = Weights({{A1, b1}, {A2, b2}});
  } else {
    witness = monotone_witness(config.activation, t);
  }
  if (witness) {
    Vec y = weight_map(spec, *witness, S).col(0);
    double res = (y - t).cwiseAbs().maxCoeff();
    if (res <= 1e-8) {
      out.exact_witness = witness;
      out.witness_residual = res;
      out.best_sq_loss = std::min(out.best_sq_loss, (y - t).squaredNorm());
      out.classification = AttainmentClass::LikelyAttained;
      return out;
    }
  }

  bool at_bound = out.best_sq_loss <= out.isotonic.sq_distance + config.bound_tol;
  bool diverged = out.final_norm > 50.0 * std::max(rep.median_init_norm, 1e-12);
  if (at_bound && diverged)
    out.classification = AttainmentClass::SuspectedNonAttained;
  else
    out.classification = AttainmentClass::Inconclusive;
  return out;
}

EpsilonGridReport epsilon_grid_analysis(const Vec& t_center, double eps, Index grid_points,
                                        const ChainAnalysisConfig& config) {
  detail::require(t_center.size() == 3, "epsilon_grid_analysis: 3-sample example");
  detail::require(eps >= 0.0, "epsilon_grid_analysis: eps >= 0");
  detail::require(grid_points >= 1, "epsilon_grid_analysis: grid_points >= 1");

  std::vector<Vec> targets;
  if (grid_points == 1 || eps == 0.0) {
    targets.push_back(t_center);
  } else {
    for (Index i = 0; i < grid_points; ++i)
      for (Index j = 0; j < grid_points; ++j)
        for (Index k = 0; k < grid_points; ++k) {
          Vec t(3);
          double step = 2.0 * eps / static_cast<double>(grid_points - 1);
          t[0] = t_center[0] - eps + step * static_cast<double>(i);
          t[1] = t_center[1] - eps + step * static_cast<double>(j);
          t[2] = t_center[2] - eps + step * static_cast<double>(k);
          targets.push_back(t);
        }
  }

  EpsilonGridReport rep;
  rep.analyses.resize(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    ChainAnalysisConfig cfg = config;
    cfg.fit.seed = config.fit.seed + i;
    rep.analyses[i] = tanh_example_analysis(targets[i], cfg);
  });
  Index suspected = 0;
  for (const auto& a : rep.analyses)
    if (a.classification == AttainmentClass::SuspectedNonAttained) ++suspected;
  rep.suspected_fraction =
      static_cast<double>(suspected) / static_cast<double>(rep.analyses.size());
  return rep;
}

}  // namespace relugeo
