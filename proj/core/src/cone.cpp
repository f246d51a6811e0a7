#include "relugeo/cone.hpp"

#include "relugeo/network.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <unordered_map>

namespace relugeo {

namespace {

using Mask = std::uint32_t;

std::vector<Index> mask_to_indices(Mask m, Index n) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (m >> i & 1u) out.push_back(i);
  return out;
}

/// Feasibility of { s_i.a + b >= 1 (i in I), s_j.a + b <= 0 (j off I) },
/// optionally with one extra forced-negative row (s_e.a + b <= -1).
FeasibilityResult face_system(const SampleMatrix& S, Mask I, Index extra_negative = -1) {
  const Index p = S.p();
  LinearSystem sys = LinearSystem::empty(p + 1);
  for (Index i = 0; i < S.n(); ++i) {
    Vec row(p + 1);
    row.head(p) = S.row(i).transpose();
    row[p] = 1.0;
    if (I >> i & 1u) {
      sys.add_inequality(-row, -1.0);
    } else if (i == extra_negative) {
      sys.add_inequality(row, -1.0);
    } else {
      sys.add_inequality(row, 0.0);
    }
  }
  return solve_feasibility(sys);
}

Mask support_of(const SampleMatrix& S, const Vec& a, double b) {
  Mask m = 0;
  for (Index i = 0; i < S.n(); ++i) {
    double v = S.row(i).dot(a) + b;
    if (v > 0.0) m |= (1u << i);
  }
  return m;
}

}  // namespace

Index cone_dim(const SampleMatrix& S, double rel_tol) {
  return numerical_rank(S.augmented(), rel_tol);
}

ConeMembership cone_membership(const SampleMatrix& S, const Vec& x, double tol) {
  detail::require(x.size() == S.n(), "cone_membership: length mismatch");
  ConeMembership out;
  if ((x.array() < 0.0).any()) return out;
  if (tol < 0.0) tol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());

  const Index p = S.p();
  LinearSystem sys = LinearSystem::empty(p + 1);
  for (Index i = 0; i < S.n(); ++i) {
    Vec row(p + 1);
    row.head(p) = S.row(i).transpose();
    row[p] = 1.0;
    if (x[i] > tol)
      sys.add_equality(row, x[i]);
    else
      sys.add_inequality(row, 0.0);
  }
  FeasibilityResult fr = solve_feasibility(sys, std::max(tol, 1e-12));
  if (fr.status != FeasibilityStatus::Feasible) return out;

  Vec a = fr.witness->head(p);
  double b = (*fr.witness)[p];
  Vec rebuilt = activate(Activation::Relu, S.entries() * a + Vec::Constant(S.n(), b));
  out.member = true;
  out.witness_a = a;
  out.witness_b = b;
  out.roundtrip_residual = (rebuilt - x).cwiseAbs().maxCoeff();
  return out;
}

FaceDecomposition enumerate_faces(const SampleMatrix& S, Index cap) {
  const Index n = S.n();
  if (n > cap) throw EnumerationCapError(n, cap);

  std::unordered_map<Mask, bool> known;  // mask -> realizable
  std::deque<Mask> queue;

  auto probe = [&](Mask m) {
    if (known.count(m)) return;
    FeasibilityResult fr = face_system(S, m);
    bool ok = fr.status == FeasibilityStatus::Feasible;
    known[m] = ok;
    if (ok) queue.push_back(m);
  };

  // The empty pattern is always realizable (a = 0, b = -1). Random witness
  // probes seed components the single-flip walk might reach late.
  probe(0);
  std::mt19937_64 rng(0x5eedC0DEull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 64; ++trial) {
    Vec a(S.p());
    for (Index j = 0; j < a.size(); ++j) a[j] = gauss(rng);
    double b = gauss(rng);
    probe(support_of(S, a, b));
    probe(support_of(S, -a, -b));
  }

  // Identical sample rows share a hyperplane, so their signs only ever move
  // together; give the walk those grouped flips as extra edges.
  std::vector<Mask> group_flips;
  for (Index i = 0; i < n; ++i) {
    Mask g = 1u << i;
    for (Index j = i + 1; j < n; ++j)
      if ((S.row(i) - S.row(j)).cwiseAbs().maxCoeff() == 0.0) g |= (1u << j);
    if (__builtin_popcount(g) > 1) group_flips.push_back(g);
  }

  while (!queue.empty()) {
    Mask m = queue.front();
    queue.pop_front();
    for (Index i = 0; i < n; ++i) probe(m ^ (1u << i));
    for (Mask g : group_flips) probe(m ^ g);
  }

  std::vector<Mask> realizable;
  for (const auto& [m, ok] : known)
    if (ok) realizable.push_back(m);
  std::sort(realizable.begin(), realizable.end(), [n](Mask a, Mask b) {
    int pa = __builtin_popcount(a), pb = __builtin_popcount(b);
    if (pa != pb) return pa < pb;
    return mask_to_indices(a, n) < mask_to_indices(b, n);
  });

  FaceDecomposition out;
  for (Mask m : realizable) {
    ConeFace face;
    face.indices = mask_to_indices(m, n);
    if (m == 0) {
      face.dimension = 0;
      face.witness_a = Vec::Zero(S.p());
      face.witness_b = -1.0;
    } else {
      FeasibilityResult fr = face_system(S, m);
      face.witness_a = fr.witness->head(S.p());
      face.witness_b = (*fr.witness)[S.p()];
      face.dimension = face_dim(S, face.indices);
    }
    out.faces.push_back(std::move(face));
  }
  return out;
}

Index face_dim(const SampleMatrix& S, const std::vector<Index>& I, double rel_tol) {
  if (I.empty()) return 0;
  const Index n = S.n(), p = S.p();
  Mask m = 0;
  for (Index i : I) {
    detail::require(i >= 0 && i < n, "face_dim: index out of range");
    m |= (1u << i);
  }
  if (face_system(S, m).status != FeasibilityStatus::Feasible) throw FaceNotRealizableError();

  // Off-I constraints that the face polyhedron forces to equality.
  std::vector<Index> implicit;
  for (Index j = 0; j < n; ++j) {
    if (m >> j & 1u) continue;
    if (face_system(S, m, j).status != FeasibilityStatus::Feasible) implicit.push_back(j);
  }

  Mat basis = Mat::Identity(p + 1, p + 1);
  if (!implicit.empty()) {
    Mat R(static_cast<Index>(implicit.size()), p + 1);
    for (std::size_t r = 0; r < implicit.size(); ++r) {
      R.row(static_cast<Index>(r)).head(p) = S.row(implicit[r]);
      R(static_cast<Index>(r), p) = 1.0;
    }
    Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeFullV);
    Index rank = numerical_rank(R, rel_tol);
    basis = svd.matrixV().rightCols(p + 1 - rank);
    if (basis.cols() == 0) return 0;
  }

  Mat SI(static_cast<Index>(I.size()), p + 1);
  for (std::size_t r = 0; r < I.size(); ++r) {
    SI.row(static_cast<Index>(r)).head(p) = S.row(I[r]);
    SI(static_cast<Index>(r), p) = 1.0;
  }
  return numerical_rank(SI * basis, rel_tol);
}

double threshold_shift(const Vec& x, Index k) {
  const Index n = x.size();
  detail::require(k >= 1 && k <= n, "threshold_shift: k out of range");
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end());
  for (Index i = 0; i + 1 < n; ++i)
    detail::require(sorted[static_cast<std::size_t>(i)] != sorted[static_cast<std::size_t>(i) + 1],
                    "threshold_shift: entries must be pairwise distinct");
  if (k == n) return sorted.front() - 1.0;
  double lo = sorted[static_cast<std::size_t>(n - k - 1)];
  double hi = sorted[static_cast<std::size_t>(n - k)];
  return 0.5 * (lo + hi);
}

}  // namespace relugeo
