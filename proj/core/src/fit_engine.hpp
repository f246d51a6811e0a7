#pragma once

// Internal single-restart optimizer shared by erm::fit and the numeric
// membership search. Not installed.

#include "relugeo/network.hpp"
#include "relugeo/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace relugeo::fitdetail {

struct EngineConfig {
  Index max_iters = 50000;
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double init_scale = 1.0;
  std::uint64_t rng_seed = 1;
  double norm_cap = 0.0;              // 0: unconstrained (raw parameter norm)
  double divergence_stop_norm = 0.0;  // stop once the iterate norm passes this
  double target_loss = 0.0;           // early stop threshold (0: run the budget)
  Index traj_points = 1000;
};

struct TrajPoint {
  Index iter;
  double best_loss;
  double norm;
};

struct EngineResult {
  Weights best;
  double best_loss = std::numeric_limits<double>::infinity();
  double best_norm = 0.0;
  std::vector<TrajPoint> traj;
  Index iters_used = 0;
  double init_norm = 0.0;
  double final_slope = 0.0;  // best-loss change per iteration, strict phase
  bool norm_increasing = false;
  bool diverged_stop = false;  // halted by the divergence guard mid-descent
  double final_norm = 0.0;
};

inline double sq_loss(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S,
                      const ResponseMatrix& T) {
  return (weight_map(spec, w, S) - T.entries()).squaredNorm();
}

/// Subgradient of the squared Frobenius loss; ReLU uses sigma'(0) = 0.
inline Weights loss_gradient(const NetworkSpec& spec, const Weights& w, const SampleMatrix& S,
                             const ResponseMatrix& T) {
  const Index k = spec.depth();
  Weights g = Weights::zeros(spec);
  for (Index si = 0; si < S.n(); ++si) {
    Vec z = S.row(si).transpose();
    std::vector<Vec> zs{z};
    std::vector<Vec> us;
    for (Index i = 0; i < k; ++i) {
      Vec u = w.layer(i).A * zs.back() + w.layer(i).b;
      us.push_back(u);
      zs.push_back(i + 1 < k ? activate(spec.activation(), u) : u);
    }
    Vec gu = 2.0 * (zs.back() - T.entries().row(si).transpose());
    for (Index i = k - 1; i >= 0; --i) {
      g.layer(i).A += gu * zs[static_cast<std::size_t>(i)].transpose();
      g.layer(i).b += gu;
      if (i > 0) {
        gu = (w.layer(i).A.transpose() * gu).cwiseProduct(
            activate_deriv(spec.activation(), us[static_cast<std::size_t>(i) - 1]));
      }
    }
  }
  return g;
}

inline double grad_norm(const Weights& g) {
  double sq = 0.0;
  for (const auto& l : g.layers()) sq += l.A.squaredNorm() + l.b.squaredNorm();
  return std::sqrt(sq);
}

inline Weights gaussian_init(const NetworkSpec& spec, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Weights w = Weights::zeros(spec);
  for (Index i = 0; i < spec.depth(); ++i) {
    double std = scale / std::sqrt(static_cast<double>(spec.width(i)));
    auto& l = w.layer(i);
    for (Index r = 0; r < l.A.rows(); ++r)
      for (Index c = 0; c < l.A.cols(); ++c) l.A(r, c) = std * gauss(rng);
    for (Index r = 0; r < l.b.size(); ++r) l.b[r] = std * gauss(rng);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Two-layer separable stage. Hidden parameters H are a d x (p+1) matrix
// (affine rows); the output layer is eliminated by exact least squares, so
// the search runs on the reduced objective
//   f(H) = min_C |T - [sigma(S~ H^T), 1] C|_F^2
// (variable projection). Divergent valleys are straight lines in H-space,
// which is what makes secant extrapolation ride them.
// ---------------------------------------------------------------------------

struct Reduced {
  double loss = 0.0;
  Mat coeffs;  // (d+1) x q, last row is the output bias
};

class TwoLayerEngine {
 public:
  TwoLayerEngine(const NetworkSpec& spec, const SampleMatrix& S, const ResponseMatrix& T)
      : spec_(spec), T_(T.entries()), Saug_(S.augmented()), n_(S.n()),
        d_(spec.width(1)), p_(spec.input_dim()), q_(spec.output_dim()) {}

  Reduced reduced(const Mat& H) const {
    Mat U = Saug_ * H.transpose();  // n x d pre-activations
    Mat X(n_, d_ + 1);
    for (Index j = 0; j < d_; ++j) X.col(j) = activate(spec_.activation(), U.col(j));
    X.col(d_).setOnes();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(X);
    Mat C = cod.solve(T_);
    return {(X * C - T_).squaredNorm(), std::move(C)};
  }

  /// Gauss-Newton target for the hidden parameters with the output layer
  /// frozen: linearize sigma about the current pre-activations (exact within
  /// a ReLU activation pattern) and solve the resulting least squares.
  Mat hidden_target(const Mat& H, const Mat& C) const {
    Mat U = Saug_ * H.transpose();
    Mat D(n_, d_);
    Mat Z(n_, d_);
    for (Index j = 0; j < d_; ++j) {
      D.col(j) = activate_deriv(spec_.activation(), U.col(j));
      Z.col(j) = activate(spec_.activation(), U.col(j));
    }
    const Index nv = d_ * (p_ + 1);
    Mat Areg(n_ * q_, nv);
    Vec rhs(n_ * q_);
    for (Index j = 0; j < n_; ++j) {
      for (Index o = 0; o < q_; ++o) {
        double base = C(d_, o);
        for (Index l = 0; l < d_; ++l) base += C(l, o) * (Z(j, l) - D(j, l) * U(j, l));
        rhs[j * q_ + o] = T_(j, o) - base;
        for (Index l = 0; l < d_; ++l)
          for (Index c = 0; c <= p_; ++c)
            Areg(j * q_ + o, l * (p_ + 1) + c) = C(l, o) * D(j, l) * Saug_(j, c);
      }
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Areg);
    Vec sol = cod.solve(rhs);
    Mat Ht(d_, p_ + 1);
    for (Index l = 0; l < d_; ++l)
      for (Index c = 0; c <= p_; ++c) Ht(l, c) = sol[l * (p_ + 1) + c];
    return Ht;
  }

  Weights assemble(const Mat& H, const Mat& C) const {
    Weights w = Weights::zeros(spec_);
    w.layer(0).A = H.leftCols(p_);
    w.layer(0).b = H.col(p_);
    w.layer(1).A = C.topRows(d_).transpose();
    w.layer(1).b = C.row(d_).transpose();
    return w;
  }

  double full_norm(const Mat& H, const Mat& C) const {
    return std::sqrt(H.squaredNorm() + C.squaredNorm());
  }

  /// Joint Gauss-Newton refinement of (H, C) with the activation pattern
  /// refreshed each round; min-norm steps absorb the per-neuron scaling
  /// degeneracy. Returns the number of objective evaluations spent.
  Index joint_polish(Mat& H, Reduced& cur, Index max_rounds = 25) const {
    Index evals = 0;
    Mat C = cur.coeffs;
    double loss = cur.loss;
    const Index nh = d_ * (p_ + 1);
    const Index nc = (d_ + 1) * q_;
    for (Index round = 0; round < max_rounds; ++round) {
      Mat U = Saug_ * H.transpose();
      Mat D(n_, d_), Z(n_, d_);
      for (Index j = 0; j < d_; ++j) {
        D.col(j) = activate_deriv(spec_.activation(), U.col(j));
        Z.col(j) = activate(spec_.activation(), U.col(j));
      }
      Mat J(n_ * q_, nh + nc);
      Vec r(n_ * q_);
      for (Index j = 0; j < n_; ++j) {
        for (Index o = 0; o < q_; ++o) {
          double pred = C(d_, o);
          for (Index l = 0; l < d_; ++l) pred += C(l, o) * Z(j, l);
          r[j * q_ + o] = pred - T_(j, o);
          for (Index l = 0; l < d_; ++l)
            for (Index c = 0; c <= p_; ++c)
              J(j * q_ + o, l * (p_ + 1) + c) = C(l, o) * D(j, l) * Saug_(j, c);
          for (Index l = 0; l <= d_; ++l)
            for (Index oo = 0; oo < q_; ++oo)
              J(j * q_ + o, nh + l * q_ + oo) =
                  (oo == o) ? (l < d_ ? Z(j, l) : 1.0) : 0.0;
        }
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
      Vec step = cod.solve(-r);
      // Candidate with near-kink pre-activations pinned to zero: optima of
      // piecewise-smooth fits often sit exactly on activation boundaries,
      // where the unconstrained step keeps hopping across.
      std::vector<Vec> steps{step};
      {
        double uscale = 1e-7 * (1.0 + U.cwiseAbs().maxCoeff());
        std::vector<std::pair<Index, Index>> pins;
        for (Index j = 0; j < n_; ++j)
          for (Index l = 0; l < d_; ++l)
            if (std::abs(U(j, l)) <= uscale) pins.push_back({j, l});
        if (!pins.empty() && static_cast<Index>(pins.size()) < nh) {
          Mat P = Mat::Zero(static_cast<Index>(pins.size()), nh + nc);
          Vec pb(static_cast<Index>(pins.size()));
          for (std::size_t k = 0; k < pins.size(); ++k) {
            auto [j, l] = pins[k];
            for (Index c = 0; c <= p_; ++c)
              P(static_cast<Index>(k), l * (p_ + 1) + c) = Saug_(j, c);
            pb[static_cast<Index>(k)] = -U(j, l);
          }
          Eigen::CompleteOrthogonalDecomposition<Mat> pcod(P);
          Vec s0 = pcod.solve(pb);
          Eigen::JacobiSVD<Mat> psvd(P, Eigen::ComputeFullV);
          Index prank = 0;
          for (Index i = 0; i < psvd.singularValues().size(); ++i)
            if (psvd.singularValues()[i] > 1e-12 * psvd.singularValues()[0]) ++prank;
          if (prank < nh + nc) {
            Mat Z = psvd.matrixV().rightCols(nh + nc - prank);
            Eigen::CompleteOrthogonalDecomposition<Mat> zcod(J * Z);
            steps.push_back(s0 + Z * zcod.solve(-(r + J * s0)));
          }
        }
      }
      bool improved = false;
      for (const Vec& cand : steps) {
      double a = 1.0;
      for (int half = 0; half < 12; ++half) {
        Mat Hc = H;
        Mat Cc = C;
        for (Index l = 0; l < d_; ++l)
          for (Index c = 0; c <= p_; ++c) Hc(l, c) += a * cand[l * (p_ + 1) + c];
        for (Index l = 0; l <= d_; ++l)
          for (Index o = 0; o < q_; ++o) Cc(l, o) += a * cand[nh + l * q_ + o];
        Mat Uc = Saug_ * Hc.transpose();
        Mat Xc(n_, d_ + 1);
        for (Index j = 0; j < d_; ++j) Xc.col(j) = activate(spec_.activation(), Uc.col(j));
        Xc.col(d_).setOnes();
        double lc = (Xc * Cc - T_).squaredNorm();
        ++evals;
        if (lc < loss) {
          H = Hc;
          C = Cc;
          loss = lc;
          improved = true;
          break;
        }
        a *= 0.5;
      }
      if (improved) break;
      }
      if (!improved) break;
    }
    Reduced fin = reduced(H);
    ++evals;
    if (fin.loss <= loss + 1e-18) cur = fin;
    else cur = {loss, C};
    return evals;
  }

  const NetworkSpec& spec_;
  Mat T_;
  Mat Saug_;
  Index n_, d_, p_, q_;
};

inline EngineResult run_two_layer(const NetworkSpec& spec, const SampleMatrix& S,
                                  const ResponseMatrix& T, const EngineConfig& cfg) {
  TwoLayerEngine eng(spec, S, T);
  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Weights w0 = gaussian_init(spec, cfg.init_scale, rng);
  Mat H(eng.d_, eng.p_ + 1);
  H.leftCols(eng.p_) = w0.layer(0).A;
  H.col(eng.p_) = w0.layer(0).b;

  EngineResult res;
  res.init_norm = weight_norm(w0);

  Index iters = 0;
  const Index reserve = std::min<Index>(400, cfg.max_iters / 5);
  auto evals_left = [&] { return iters < cfg.max_iters - reserve; };
  auto any_evals_left = [&] { return iters < cfg.max_iters; };

  Reduced cur = eng.reduced(H);
  ++iters;

  Mat bestH = H;
  Reduced bestRed = cur;
  res.best_loss = cur.loss;
  Mat best_prevH = H;  // predecessor of the best point along accepted steps
  bool have_best_prev = false;
  // Long secant anchor for the divergence probe: the last accepted point
  // whose loss was at least 4x the current best. Valleys are straight in
  // H-space, so this difference is dominated by the valley direction.
  Mat anchorH = H;
  double anchor_loss = cur.loss;
  bool have_anchor = false;

  const Index traj_stride =
      std::max<Index>(1, cfg.max_iters / std::max<Index>(1, cfg.traj_points));
  auto record = [&](double norm_now) {
    if (iters % traj_stride == 0 || iters <= 1)
      res.traj.push_back({iters, res.best_loss, norm_now});
  };

  auto norm_ok = [&](const Mat& Hc, const Mat& Cc) {
    return cfg.norm_cap <= 0.0 || eng.full_norm(Hc, Cc) <= cfg.norm_cap;
  };

  double alpha_hint = 1.0;
  Mat prevH;
  bool have_prev = false;
  Index stall = 0;
  Index hops = 0;
  double last_loss = cur.loss;

  while (evals_left()) {
    if (cfg.divergence_stop_norm > 0.0 &&
        eng.full_norm(H, cur.coeffs) > cfg.divergence_stop_norm) {
      res.diverged_stop = true;
      break;
    }
    if (cfg.target_loss > 0.0 && res.best_loss <= cfg.target_loss) break;

    Mat Ht = eng.hidden_target(H, cur.coeffs);
    Mat dH = Ht - H;
    Mat oldH = H;

    // Largest step along dH before any ReLU pre-activation changes sign: up
    // to there the frozen linearization is the true objective, so this step
    // is exactly optimal within the current activation pattern.
    double alpha_kink = std::numeric_limits<double>::infinity();
    if (spec.activation() == Activation::Relu) {
      Mat U = eng.Saug_ * H.transpose();
      Mat dU = eng.Saug_ * dH.transpose();
      for (Index j = 0; j < U.rows(); ++j)
        for (Index l = 0; l < U.cols(); ++l) {
          if (dU(j, l) != 0.0) {
            double cross = -U(j, l) / dU(j, l);
            if (cross > 1e-12 && cross < alpha_kink) alpha_kink = cross;
          }
        }
    }

    bool accepted = false;
    double alpha = std::max(alpha_hint * 2.0, 1.0);
    bool tried_kink = false;
    while (alpha > 1e-7 && evals_left()) {
      double a = alpha;
      if (!tried_kink && alpha_kink < alpha && alpha_kink > 0.5 * alpha) {
        a = alpha_kink * 0.999999;
        tried_kink = true;
      }
      Mat Hc = H + a * dH;
      Reduced rc = eng.reduced(Hc);
      ++iters;
      if (rc.loss < cur.loss && norm_ok(Hc, rc.coeffs)) {
        H = Hc;
        cur = rc;
        alpha_hint = a;
        accepted = true;
        break;
      }
      if (a == alpha) alpha *= 0.5;
    }
    if (!accepted) alpha_hint = 1.0;

    if (accepted && have_prev && evals_left()) {
      // Secant extrapolation along the accepted path (strict improvement).
      Mat dir = H - prevH;
      double beta = 1.0;
      while (evals_left() && beta < 1e15) {
        Mat Hc = H + beta * dir;
        Reduced rc = eng.reduced(Hc);
        ++iters;
        if (rc.loss < cur.loss && norm_ok(Hc, rc.coeffs)) {
          H = Hc;
          cur = rc;
          beta *= 2.0;
          if (cfg.divergence_stop_norm > 0.0 &&
              eng.full_norm(H, cur.coeffs) > cfg.divergence_stop_norm) {
            res.diverged_stop = true;
            break;
          }
        } else {
          break;
        }
      }
    }
    if (accepted) {
      prevH = oldH;
      have_prev = true;
    }

    if (cur.loss < res.best_loss) {
      best_prevH = have_prev ? prevH : bestH;
      have_best_prev = have_prev;
      if (res.best_loss > 4.0 * cur.loss || !have_anchor) {
        anchorH = bestH;
        anchor_loss = res.best_loss;
        have_anchor = true;
      }
      res.best_loss = cur.loss;
      bestH = H;
      bestRed = cur;
    }
    record(eng.full_norm(H, cur.coeffs));

    // Stalls trigger seeded exploration, cycling three moves: perturb around
    // the best point, reinitialize outright, or aim each neuron's kink
    // hyperplane through a random sample row (activation patterns are what
    // separate basins, so sampling them directly beats blind noise).
    if (last_loss - cur.loss < 1e-12 * std::max(1.0, cur.loss)) ++stall;
    else stall = 0;
    last_loss = cur.loss;
    if (stall > 8 && res.best_loss > 1e-10) {
      // settle this basin exactly before leaving it
      iters += eng.joint_polish(H, cur);
      if (cur.loss < res.best_loss) {
        best_prevH = have_prev ? prevH : bestH;
        have_best_prev = have_prev;
        res.best_loss = cur.loss;
        bestH = H;
        bestRed = cur;
      }
      ++hops;
      double scale = cfg.init_scale * (1.0 + 0.5 * static_cast<double>(hops % 8));
      auto unit = [&] {
        return static_cast<double>(rng() % (1ull << 53)) / static_cast<double>(1ull << 53);
      };
      switch (hops % 4) {
        case 1:
          H = bestH;
          for (Index r = 0; r < H.rows(); ++r)
            for (Index c = 0; c < H.cols(); ++c) H(r, c) += scale * gauss(rng);
          break;
        case 2:
          for (Index r = 0; r < H.rows(); ++r)
            for (Index c = 0; c < H.cols(); ++c) H(r, c) = scale * gauss(rng);
          break;
        case 3:
          // random direction, kink position uniform across the projected
          // sample range: covers activation patterns evenly
          for (Index l = 0; l < eng.d_; ++l) {
            double lo = 0.0, hi = 0.0;
            for (Index c = 0; c < eng.p_; ++c) H(l, c) = gauss(rng);
            for (Index j = 0; j < eng.n_; ++j) {
              double proj = 0.0;
              for (Index c = 0; c < eng.p_; ++c) proj += H(l, c) * eng.Saug_(j, c);
              if (j == 0 || proj < lo) lo = (j == 0) ? proj : std::min(lo, proj);
              if (j == 0 || proj > hi) hi = (j == 0) ? proj : std::max(hi, proj);
            }
            double pad = 0.05 * (hi - lo + 1e-12);
            H(l, eng.p_) = -(lo - pad + (hi - lo + 2 * pad) * unit());
          }
          break;
        default:
          // kink inside a uniformly chosen gap of the sorted projections,
          // with the slope matched to the gap width: clustered samples leave
          // needle gaps whose basins need both the position and a slope of
          // order 1/width
          for (Index l = 0; l < eng.d_; ++l) {
            std::vector<double> proj(static_cast<std::size_t>(eng.n_));
            for (Index c = 0; c < eng.p_; ++c) H(l, c) = gauss(rng);
            for (Index j = 0; j < eng.n_; ++j) {
              proj[static_cast<std::size_t>(j)] = 0.0;
              for (Index c = 0; c < eng.p_; ++c)
                proj[static_cast<std::size_t>(j)] += H(l, c) * eng.Saug_(j, c);
            }
            std::sort(proj.begin(), proj.end());
            double spread = std::max(proj.back() - proj.front(), 1e-9);
            std::size_t gap = rng() % (proj.size() + 1);
            double kink, width;
            if (gap == 0) {
              kink = proj.front() - 0.05 * spread * (unit() + 1e-3);
              width = 0.3 * spread;
            } else if (gap == proj.size()) {
              kink = proj.back() + 0.05 * spread * (unit() + 1e-3);
              width = 0.3 * spread;
            } else {
              width = std::max(proj[gap] - proj[gap - 1], 1e-9 * spread);
              kink = proj[gap - 1] + width * (0.25 + 0.5 * unit());
            }
            double f = (0.5 + 1.5 * unit()) / width;
            for (Index c = 0; c < eng.p_; ++c) H(l, c) *= f;
            H(l, eng.p_) = -kink * f;
          }
          break;
      }
      cur = eng.reduced(H);
      ++iters;
      stall = 0;
      have_prev = false;
      alpha_hint = 1.0;
    }
  }

  // Strict-phase statistics before the divergence probe.
  res.final_norm = eng.full_norm(H, cur.coeffs);
  if (res.traj.empty() || res.traj.back().iter != iters)
    res.traj.push_back({iters, res.best_loss, res.final_norm});
  if (res.traj.size() >= 2) {
    std::size_t start = res.traj.size() - std::max<std::size_t>(2, res.traj.size() / 10);
    const auto& a = res.traj[start];
    const auto& b = res.traj.back();
    if (b.iter > a.iter) res.final_slope = (b.best_loss - a.best_loss) / double(b.iter - a.iter);
  }

  // Divergence probe: from the best point, push along the incoming secant
  // direction (Gauss-Newton direction as fallback) accepting equal-or-better
  // loss. True divergent valleys keep improving below double resolution, so
  // the norm keeps growing at frozen recorded loss; interior minima reject
  // every candidate immediately.
  if (res.best_loss > 1e-15 * (1.0 + eng.T_.squaredNorm())) {
    double stop = cfg.divergence_stop_norm > 0.0 ? cfg.divergence_stop_norm : 1e7;
    for (int which = 0; which < 4; ++which) {
      Mat dir;
      if (which == 0) {
        if (!have_anchor || anchor_loss <= 2.0 * res.best_loss) continue;
        dir = bestH - anchorH;
      } else if (which == 1) {
        if (!have_best_prev) continue;
        dir = bestH - best_prevH;
      } else if (which == 2) {
        if (!any_evals_left()) break;
        dir = eng.hidden_target(bestH, bestRed.coeffs) - bestH;
        ++iters;
      } else {
        // radial scale-up of the hidden layer: meaningful for saturating
        // activations (pushes toward the step limit at equal loss), a pure
        // reparameterization for ReLU, so skipped there
        if (spec.activation() == Activation::Relu) continue;
        dir = bestH;
      }
      if (dir.norm() == 0.0) continue;
      Mat Hp = bestH;
      Reduced curp = bestRed;
      double beta = 1.0;
      int steps = 0;
      int rejects = 0;
      bool moved = false;
      // a few ulps of slack: the mathematical loss along the valley keeps
      // falling even when doubles cannot resolve it
      auto close_enough = [](double a, double b) { return a <= b * (1.0 + 1e-12) + 1e-300; };
      while (steps < 80 && rejects < 8 && any_evals_left()) {
        Mat Hc = Hp + beta * dir;
        Reduced rc = eng.reduced(Hc);
        ++iters;
        ++steps;
        if (close_enough(rc.loss, curp.loss) && norm_ok(Hc, rc.coeffs) &&
            eng.full_norm(Hc, rc.coeffs) <= 16.0 * stop) {
          Hp = Hc;
          curp = rc;
          beta *= 2.0;
          moved = true;
          if (eng.full_norm(Hp, curp.coeffs) > stop) break;
        } else {
          beta *= 0.25;
          ++rejects;
        }
      }
      double probe_norm = eng.full_norm(Hp, curp.coeffs);
      if (probe_norm > stop) res.diverged_stop = true;
      if (moved && close_enough(curp.loss, res.best_loss) &&
          probe_norm > eng.full_norm(bestH, bestRed.coeffs)) {
        res.norm_increasing =
            res.norm_increasing || probe_norm > 1.25 * eng.full_norm(bestH, bestRed.coeffs);
        double recorded = std::min(res.best_loss, curp.loss);
        bestH = Hp;
        bestRed = curp;
        res.best_loss = recorded;
        res.final_norm = probe_norm;
        res.traj.push_back({iters, recorded, probe_norm});
        break;
      }
    }
  }

  // Final exact settle of the best basin.
  if (any_evals_left()) {
    Mat Hp = bestH;
    Reduced rp = bestRed;
    iters += eng.joint_polish(Hp, rp, 60);
    if (rp.loss < res.best_loss) {
      res.best_loss = rp.loss;
      bestH = Hp;
      bestRed = rp;
    }
  }

  res.iters_used = iters;
  res.best = eng.assemble(bestH, bestRed.coeffs);
  res.best_norm = eng.full_norm(bestH, bestRed.coeffs);
  return res;
}

inline EngineResult run_adam(const NetworkSpec& spec, const SampleMatrix& S,
                             const ResponseMatrix& T, const EngineConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  Weights w = gaussian_init(spec, cfg.init_scale, rng);

  EngineResult res;
  res.init_norm = weight_norm(w);

  Vec theta = w.flatten();
  Vec m = Vec::Zero(theta.size()), v = Vec::Zero(theta.size());
  res.best = w;
  res.best_loss = sq_loss(spec, w, S, T);
  res.best_norm = res.init_norm;

  const Index traj_stride =
      std::max<Index>(1, cfg.max_iters / std::max<Index>(1, cfg.traj_points));
  for (Index t = 1; t <= cfg.max_iters; ++t) {
    Weights wt = Weights::unflatten(spec, theta);
    double L = sq_loss(spec, wt, S, T);
    double nn = weight_norm(wt);
    if (L < res.best_loss) {
      res.best_loss = L;
      res.best = wt;
      res.best_norm = nn;
    }
    if (t % traj_stride == 0 || t == 1) res.traj.push_back({t, res.best_loss, nn});
    res.iters_used = t;
    if (cfg.target_loss > 0.0 && res.best_loss <= cfg.target_loss) break;
    if (cfg.divergence_stop_norm > 0.0 && nn > cfg.divergence_stop_norm) break;
    Vec g = loss_gradient(spec, wt, S, T).flatten();
    double b1t = 1.0 - std::pow(cfg.beta1, double(t));
    double b2t = 1.0 - std::pow(cfg.beta2, double(t));
    for (Index j = 0; j < theta.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      theta[j] -= cfg.lr * (m[j] / b1t) / (std::sqrt(v[j] / b2t) + 1e-8);
    }
    if (cfg.norm_cap > 0.0) {
      double nrm = theta.norm();
      if (nrm > cfg.norm_cap) theta *= cfg.norm_cap / nrm;
    }
  }
  Weights wf = Weights::unflatten(spec, theta);
  res.final_norm = weight_norm(wf);
  if (res.traj.empty() || res.traj.back().iter != res.iters_used)
    res.traj.push_back({res.iters_used, res.best_loss, res.final_norm});
  if (res.traj.size() >= 2) {
    std::size_t start = res.traj.size() - std::max<std::size_t>(2, res.traj.size() / 10);
    const auto& a = res.traj[start];
    const auto& b = res.traj.back();
    if (b.iter > a.iter) res.final_slope = (b.best_loss - a.best_loss) / double(b.iter - a.iter);
    res.norm_increasing = b.norm > a.norm * (1.0 + 1e-9);
  }
  return res;
}

inline EngineResult run_restart(const NetworkSpec& spec, const SampleMatrix& S,
                                const ResponseMatrix& T, const EngineConfig& cfg) {
  if (spec.depth() == 2) return run_two_layer(spec, S, T, cfg);
  return run_adam(spec, S, T, cfg);
}

}  // namespace relugeo::fitdetail
