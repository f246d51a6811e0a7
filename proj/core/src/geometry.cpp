#include "relugeo/geometry.hpp"

#include "fit_engine.hpp"
#include "relugeo/erm.hpp"
#include "relugeo/linfeas.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace relugeo {

std::string to_string(MembershipVerdict v) {
  switch (v) {
    case MembershipVerdict::Member: return "MEMBER";
    case MembershipVerdict::NonMember: return "NON_MEMBER";
    case MembershipVerdict::MemberNumeric: return "MEMBER_NUMERIC";
    case MembershipVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

struct PatternOption {
  std::vector<Index> face;  // empty together with sign 0 means "neuron unused"
  int sign = 0;
};

/// Options ordered by (support size, face, + before -), with the unused slot
/// first; multisets over this order give the spec'd search order.
std::vector<PatternOption> pattern_options(const FaceDecomposition& faces) {
  std::vector<PatternOption> opts;
  opts.push_back({{}, 0});
  for (const auto& f : faces.faces) {
    if (f.indices.empty()) continue;
    opts.push_back({f.indices, +1});
    opts.push_back({f.indices, -1});
  }
  return opts;
}

/// All size-d multisets of option indices, sorted by total support size then
/// lexicographic option order. Symmetric-neuron duplicates are visited once.
std::vector<std::vector<std::size_t>> pattern_multisets(const std::vector<PatternOption>& opts,
                                                        Index d) {
  std::vector<std::vector<std::size_t>> all;
  std::vector<std::size_t> cur(static_cast<std::size_t>(d), 0);
  for (;;) {
    all.push_back(cur);
    // next multiset (nondecreasing index tuples)
    Index pos = d - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == opts.size() - 1) --pos;
    if (pos < 0) break;
    std::size_t v = ++cur[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < d; ++j) cur[static_cast<std::size_t>(j)] = v;
  }
  auto support = [&](const std::vector<std::size_t>& ms) {
    std::size_t s = 0;
    for (std::size_t oi : ms) s += opts[oi].face.size();
    return s;
  };
  std::stable_sort(all.begin(), all.end(),
                   [&](const auto& a, const auto& b) { return support(a) < support(b); });
  return all;
}

PatternAssignment to_assignment(const std::vector<PatternOption>& opts,
                                const std::vector<std::size_t>& ms) {
  PatternAssignment pa;
  for (std::size_t oi : ms) pa.neurons.push_back({opts[oi].face, opts[oi].sign});
  return pa;
}

struct PatternSystem {
  Mat A;            // model map: n x vars, vars = (active neuron affine params..., lambda)
  Mat G;            // sign-consistency constraints G v <= 0
  std::vector<std::size_t> active;  // indices into the assignment's neurons
};

PatternSystem build_pattern_system(const SampleMatrix& S, const PatternAssignment& pa) {
  const Index n = S.n(), p = S.p();
  PatternSystem ps;
  for (std::size_t i = 0; i < pa.neurons.size(); ++i)
    if (pa.neurons[i].sign != 0) ps.active.push_back(i);
  const Index nact = static_cast<Index>(ps.active.size());
  const Index vars = nact * (p + 1) + 1;

  ps.A = Mat::Zero(n, vars);
  ps.G = Mat::Zero(nact * n, vars);
  Mat aug = S.augmented();

  for (Index ai = 0; ai < nact; ++ai) {
    const auto& np = pa.neurons[ps.active[static_cast<std::size_t>(ai)]];
    std::vector<bool> on(static_cast<std::size_t>(n), false);
    for (Index j : np.face) on[static_cast<std::size_t>(j)] = true;
    for (Index j = 0; j < n; ++j) {
      double sgn = on[static_cast<std::size_t>(j)] ? -1.0 : 1.0;
      for (Index c = 0; c <= p; ++c) {
        ps.G(ai * n + j, ai * (p + 1) + c) = sgn * aug(j, c);
        if (on[static_cast<std::size_t>(j)])
          ps.A(j, ai * (p + 1) + c) += np.sign * aug(j, c);
      }
    }
  }
  ps.A.col(vars - 1).setOnes();  // lambda
  return ps;
}

Weights reconstruct_weights(const SampleMatrix& S, const PatternAssignment& pa,
                            const PatternSystem& ps, const Vec& v) {
  const Index p = S.p();
  const Index d = static_cast<Index>(pa.neurons.size());
  Mat A1 = Mat::Zero(d, p);
  Vec b1 = Vec::Zero(d);
  Mat A2 = Mat::Zero(1, d);
  for (std::size_t ai = 0; ai < ps.active.size(); ++ai) {
    std::size_t slot = ps.active[ai];
    Index base = static_cast<Index>(ai) * (p + 1);
    A1.row(static_cast<Index>(slot)) = v.segment(base, p).transpose();
    b1[static_cast<Index>(slot)] = v[base + p];
    A2(0, static_cast<Index>(slot)) = pa.neurons[slot].sign;
  }
  Vec b2(1);
  b2[0] = v[v.size() - 1];
  return Weights({{A1, b1}, {A2, b2}});
}

// --------------------------- pattern QP -----------------------------------
// minimize |A v - t|^2 subject to G v <= 0. Projected gradient with Dykstra
// projections, then an active-set polish that certifies the KKT system.

Vec project_cone(const Mat& Gn, const Vec& v0, int max_sweeps = 120) {
  if (Gn.rows() == 0) return v0;
  Vec v = v0;
  Mat corr = Mat::Zero(Gn.rows(), v.size());
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double worst = 0.0;
    for (Index i = 0; i < Gn.rows(); ++i) {
      Vec y = v + corr.row(i).transpose();
      double viol = Gn.row(i).dot(y);
      Vec ynew = y;
      if (viol > 0.0) ynew -= viol * Gn.row(i).transpose();
      corr.row(i) = (y - ynew).transpose();
      v = ynew;
      worst = std::max(worst, Gn.row(i).dot(v));
    }
    if (worst <= 1e-13) break;
  }
  return v;
}

struct QPResult {
  double sq_dist = 0.0;
  Vec v;
  bool certified = false;
};

QPResult solve_pattern_qp(const Mat& A, const Vec& t, const Mat& G, Index max_iters = 100000,
                          double pg_tol = 1e-8) {
  QPResult out;
  // Unconstrained minimum first; feasible means done.
  Vec v = least_squares(A, t);
  if (G.rows() == 0 || (G * v).maxCoeff() <= 1e-11) {
    out.v = v;
    out.sq_dist = (A * v - t).squaredNorm();
    out.certified = true;
    return out;
  }

  Mat Gn = G;
  for (Index i = 0; i < Gn.rows(); ++i) {
    double nrm = Gn.row(i).norm();
    if (nrm > 0) Gn.row(i) /= nrm;
  }
  const Index nv = A.cols(), mg = Gn.rows();

  // Short projected-gradient warm start toward the right face.
  Eigen::JacobiSVD<Mat> svd(A);
  double smax = svd.singularValues().size() ? svd.singularValues()[0] : 1.0;
  double L = 2.0 * smax * smax + 1e-12;
  v = Vec::Zero(nv);
  double step = 1.0 / L;
  Index warm = std::min<Index>(max_iters, 300);
  for (Index it = 0; it < warm; ++it) {
    Vec grad = 2.0 * A.transpose() * (A * v - t);
    Vec vn = project_cone(Gn, v - step * grad);
    if ((vn - v).norm() / step <= pg_tol) {
      v = vn;
      break;
    }
    v = vn;
  }

  // Primal active-set method: equality-solve on the working set, take the
  // largest feasible step toward it, exchange constraints by blocking rows
  // and multiplier signs. Exact on these small dense systems.
  auto eq_min = [&](const std::vector<Index>& W) -> Vec {
    if (W.empty()) return least_squares(A, t);
    Mat GW(static_cast<Index>(W.size()), nv);
    for (std::size_t i = 0; i < W.size(); ++i) GW.row(static_cast<Index>(i)) = Gn.row(W[i]);
    Eigen::JacobiSVD<Mat> s(GW, Eigen::ComputeFullV);
    Index rank = 0;
    for (Index i = 0; i < s.singularValues().size(); ++i)
      if (s.singularValues()[i] > 1e-12 * s.singularValues()[0]) ++rank;
    if (rank >= nv) return Vec::Zero(nv);
    Mat Z = s.matrixV().rightCols(nv - rank);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(A * Z);
    return Z * cod.solve(t);
  };

  std::vector<Index> W;
  for (Index i = 0; i < mg; ++i)
    if (Gn.row(i).dot(v) > -1e-9) W.push_back(i);

  Vec best_v = project_cone(Gn, v);
  double best_f = (A * best_v - t).squaredNorm();
  const int max_rounds = 60 + 4 * static_cast<int>(mg);
  for (int round = 0; round < max_rounds; ++round) {
    Vec target = eq_min(W);
    Vec dir = target - v;
    if (dir.norm() > 1e-13 * (1.0 + v.norm())) {
      // largest feasible step toward the working-set minimizer
      double alpha = 1.0;
      Index blocker = -1;
      for (Index i = 0; i < mg; ++i) {
        if (std::find(W.begin(), W.end(), i) != W.end()) continue;
        double gd = Gn.row(i).dot(dir);
        if (gd > 1e-14) {
          double room = -Gn.row(i).dot(v) / gd;
          if (room < alpha) {
            alpha = std::max(room, 0.0);
            blocker = i;
          }
        }
      }
      v += alpha * dir;
      if (blocker >= 0) {
        W.push_back(blocker);
        continue;
      }
    }
    // At the working-set minimizer: check multiplier signs.
    Vec grad = 2.0 * A.transpose() * (A * v - t);
    if (W.empty()) {
      out.certified = grad.norm() <= 1e-7 * (1.0 + 2.0 * smax * t.norm());
      break;
    }
    Mat GWt(nv, static_cast<Index>(W.size()));
    for (std::size_t i = 0; i < W.size(); ++i)
      GWt.col(static_cast<Index>(i)) = Gn.row(W[i]).transpose();
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(GWt);
    Vec mu = cod.solve(-grad);
    double stat = (GWt * mu + grad).norm();
    double mu_min = mu.size() ? mu.minCoeff() : 0.0;
    if (stat <= 1e-7 * (1.0 + grad.norm()) && mu_min >= -1e-9) {
      out.certified = true;
      break;
    }
    Index drop = 0;
    for (Index i = 1; i < mu.size(); ++i)
      if (mu[i] < mu[drop]) drop = i;
    W.erase(W.begin() + drop);
  }

  double f = (A * v - t).squaredNorm();
  double feas = mg ? (Gn * v).maxCoeff() : 0.0;
  if (feas <= 1e-9 && f < best_f) {
    best_f = f;
    best_v = v;
  }
  out.v = best_v;
  out.sq_dist = best_f;
  return out;
}

}  // namespace

MembershipCertificate membership_2layer_q1(const SampleMatrix& S, const Vec& t, Index d,
                                           double tol, Index cap) {
  detail::require(t.size() == S.n(), "membership_2layer_q1: length mismatch");
  detail::require(d >= 1, "membership_2layer_q1: d >= 1");
  FaceDecomposition faces = enumerate_faces(S, cap);
  auto opts = pattern_options(faces);
  auto multis = pattern_multisets(opts, d);

  MembershipCertificate cert;
  for (const auto& ms : multis) {
    PatternAssignment pa = to_assignment(opts, ms);
    PatternSystem ps = build_pattern_system(S, pa);
    LinearSystem sys = LinearSystem::empty(ps.A.cols());
    sys.E = ps.A;
    sys.f = t;
    sys.G = ps.G;
    sys.h = Vec::Zero(ps.G.rows());
    FeasibilityResult fr = solve_feasibility(sys, tol);
    if (fr.status == FeasibilityStatus::Feasible) {
      cert.verdict = MembershipVerdict::Member;
      cert.pattern = pa;
      cert.lambda = (*fr.witness)[fr.witness->size() - 1];
      Weights w = reconstruct_weights(S, pa, ps, *fr.witness);
      NetworkSpec spec({S.p(), static_cast<Index>(pa.neurons.size()), 1}, Activation::Relu);
      Vec reproduced = weight_map(spec, w, S).col(0);
      cert.residual = (reproduced - t).cwiseAbs().maxCoeff();
      cert.witness = std::move(w);
      return cert;
    }
  }
  cert.verdict = MembershipVerdict::NonMember;
  return cert;
}

FitDistanceResult fit_distance_2layer_q1(const SampleMatrix& S, const Vec& t, Index d,
                                         double tol, Index cap) {
  detail::require(t.size() == S.n(), "fit_distance_2layer_q1: length mismatch");
  detail::require(d >= 1, "fit_distance_2layer_q1: d >= 1");
  FaceDecomposition faces = enumerate_faces(S, cap);
  auto opts = pattern_options(faces);
  auto multis = pattern_multisets(opts, d);

  FitDistanceResult best;
  double best_sq = std::numeric_limits<double>::infinity();
  for (const auto& ms : multis) {
    PatternAssignment pa = to_assignment(opts, ms);
    PatternSystem ps = build_pattern_system(S, pa);
    // The unconstrained residual lower-bounds the constrained one: prune.
    Vec v0 = least_squares(ps.A, t);
    double lb = (ps.A * v0 - t).squaredNorm();
    if (lb >= best_sq) continue;
    QPResult qp = solve_pattern_qp(ps.A, t, ps.G);
    if (qp.sq_dist < best_sq) {
      best_sq = qp.sq_dist;
      best.nearest = ps.A * qp.v;
      best.pattern = pa;
      best.lambda = qp.v[qp.v.size() - 1];
      best.witness = reconstruct_weights(S, pa, ps, qp.v);
    }
  }
  best.distance = std::sqrt(std::max(0.0, best_sq));
  (void)tol;
  return best;
}

MembershipCertificate membership_2layer_general(const SampleMatrix& S, const ResponseMatrix& T,
                                                Index d, const GeneralMembershipConfig& config) {
  detail::require(T.n() == S.n(), "membership_2layer_general: row mismatch");
  detail::require(d >= 1, "membership_2layer_general: d >= 1");
  NetworkSpec spec({S.p(), d, T.q()}, Activation::Relu);
  FitConfig fc;
  fc.restarts = config.restarts;
  fc.max_iters = config.max_iters;
  fc.seed = config.seed;
  fc.norm_cap = config.norm_cap;
  FitReport rep = fit(spec, S, T, fc);

  MembershipCertificate cert;
  cert.residual = std::sqrt(std::max(0.0, rep.best_sq_loss));
  cert.witness = rep.best_weights;
  cert.lambda = rep.best_weights.layer(1).b.size() ? rep.best_weights.layer(1).b[0] : 0.0;
  // Report the activation pattern of the found witness.
  Mat H(d, S.p() + 1);
  H.leftCols(S.p()) = rep.best_weights.layer(0).A;
  H.col(S.p()) = rep.best_weights.layer(0).b;
  Mat U = S.augmented() * H.transpose();
  for (Index l = 0; l < d; ++l) {
    NeuronPattern np;
    for (Index j = 0; j < S.n(); ++j)
      if (U(j, l) > 0.0) np.face.push_back(j);
    double colnorm = rep.best_weights.layer(1).A.col(l).norm();
    np.sign = colnorm > 0 ? 1 : 0;
    cert.pattern.neurons.push_back(std::move(np));
  }
  cert.verdict = cert.residual <= config.tol ? MembershipVerdict::MemberNumeric
                                             : MembershipVerdict::Inconclusive;
  return cert;
}

Index dim_upper_bound(const SampleMatrix& S, Index d, Index q) {
  detail::require(d >= 1 && q >= 1, "dim_upper_bound: d, q >= 1");
  Index rk = cone_dim(S);
  return q == 1 ? d * rk + 1 : (q + rk) * d + q;
}

GenericDimension generic_dim_2layer(Index p, Index d, Index q, Index n) {
  detail::require(p >= 1 && d >= 1 && q >= 1 && n >= 1, "generic_dim_2layer: bad args");
  GenericDimension out;
  if (q == 1) {
    Index v = d * (p + 1) + 1;
    if (n >= v) out.value = v;
  } else {
    Index v = (p + q + 1) * d + q;
    if (n >= v) {
      out.value = v;
      out.heuristic_threshold = true;
    }
  }
  return out;
}

DimensionReport numerical_image_dim(const NetworkSpec& spec, const SampleMatrix& S, Index trials,
                                    std::uint64_t seed, double rel_tol) {
  detail::require(trials >= 1, "numerical_image_dim: trials >= 1");
  detail::require(S.p() == spec.input_dim(), "numerical_image_dim: sample width mismatch");

  DimensionReport rep;
  rep.trials = trials;
  rep.seed = seed;
  if (spec.depth() == 2) {
    rep.theoretical_upper = dim_upper_bound(S, spec.width(1), spec.output_dim());
    rep.generic_formula =
        generic_dim_2layer(S.p(), spec.width(1), spec.output_dim(), S.n()).value;
  } else {
    rep.theoretical_upper = std::min(spec.parameter_count(), S.n() * spec.output_dim());
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Index done = 0;
  for (Index t = 0; t < trials; ++t) {
    Vec theta(spec.parameter_count());
    for (Index j = 0; j < theta.size(); ++j) theta[j] = gauss(rng);
    Weights w = Weights::unflatten(spec, theta);
    try {
      Mat J = jacobian(spec, w, S, JacobianMode::Analytic);
      Index r = numerical_rank(J, rel_tol);
      rep.rank_histogram[r] += 1;
      rep.numerical_rank_max = std::max(rep.numerical_rank_max, r);
      ++done;
    } catch (const KinkTouchError&) {
      ++rep.skipped_kink_draws;
    }
  }
  if (done == 0)
    throw std::runtime_error(
        "numerical_image_dim: every draw touched a ReLU kink; the sample is "
        "degenerate, resample or perturb S");
  return rep;
}

SampleMatrix generate_monotone_sample(Index n, Index p, std::uint64_t seed) {
  detail::require(n >= 2 && p >= 1, "generate_monotone_sample: n >= 2, p >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat S(n, p);
  for (Index c = 0; c < p; ++c) {
    for (;;) {
      std::vector<double> col(static_cast<std::size_t>(n));
      for (auto& x : col) x = gauss(rng);
      std::sort(col.begin(), col.end());
      bool strict = true;
      for (Index i = 0; i + 1 < n; ++i)
        if (col[static_cast<std::size_t>(i)] >= col[static_cast<std::size_t>(i) + 1])
          strict = false;
      if (strict) {
        for (Index i = 0; i < n; ++i) S(i, c) = col[static_cast<std::size_t>(i)];
        break;
      }
    }
  }
  return SampleMatrix(S);
}

namespace {

bool ascending_clipped(const Vec& s, const Vec& x, double tol) {
  const Index n = x.size();
  if (n <= 1) return true;
  if (x.maxCoeff() - x.minCoeff() <= tol) return true;
  for (Index i = 0; i + 1 < n; ++i)
    if (x[i + 1] < x[i] - tol) return false;

  const double L = x[0], U = x[n - 1];
  Index l = 0;
  while (l + 1 < n && std::abs(x[l + 1] - L) <= tol) ++l;
  Index r = n - 1;
  while (r >= 1 && std::abs(x[r - 1] - U) <= tol) --r;
  if (r <= l) return false;  // plateaus overlap yet L != U

  const Index mcount = r - l - 1;
  if (mcount == 0) return s[r] > s[l];
  if (mcount == 1) {
    Index mid = l + 1;
    bool left_ok = s[mid] > s[l] || x[mid] <= L + tol;
    bool right_ok = s[r] > s[mid] || x[mid] >= U - tol;
    return left_ok && right_ok;
  }
  Index m0 = l + 1, m1 = r - 1;
  double ds = s[m1] - s[m0];
  if (ds <= 0.0) {
    for (Index i = m0; i <= m1; ++i)
      if (std::abs(x[i] - x[m0]) > tol) return false;
    bool left_ok = s[m0] > s[l] || x[m0] <= L + tol;
    bool right_ok = s[r] > s[m1] || x[m1] >= U - tol;
    return left_ok && right_ok;
  }
  double c = (x[m1] - x[m0]) / ds;
  double e = x[m0] - c * s[m0];
  if (c < -tol) return false;
  for (Index i = m0; i <= m1; ++i)
    if (std::abs(c * s[i] + e - x[i]) > tol * (1.0 + std::abs(x[i]))) return false;
  if (c * s[l] + e > L + tol * (1.0 + std::abs(L))) return false;
  if (c * s[r] + e < U - tol * (1.0 + std::abs(U))) return false;
  return true;
}

}  // namespace

DeepChainResult deep_chain_membership(const Vec& s, const Vec& x, double tol) {
  detail::require(s.size() == x.size(), "deep_chain_membership: length mismatch");
  for (Index i = 0; i + 1 < s.size(); ++i)
    detail::require(s[i] <= s[i + 1], "deep_chain_membership: s must be sorted");
  DeepChainResult out;
  if (ascending_clipped(s, x, tol)) {
    out.member = true;
    out.orientation = +1;
  } else if (ascending_clipped(s, Vec(-x), tol)) {
    out.member = true;
    out.orientation = -1;
  }
  return out;
}

}  // namespace relugeo
