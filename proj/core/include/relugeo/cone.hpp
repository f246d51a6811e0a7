#pragma once

#include "relugeo/linfeas.hpp"
#include "relugeo/types.hpp"

#include <optional>
#include <vector>

namespace relugeo {

/// The ReLU cone of S is { relu(S a + b 1) : a in R^p, b in R }: a closed
/// pointed cone whose members are clamped affine images of the sample rows.

class EnumerationCapError : public std::runtime_error {
 public:
  explicit EnumerationCapError(Index n, Index cap)
      : std::runtime_error("face enumeration cap exceeded: n = " + std::to_string(n) +
                           " > cap = " + std::to_string(cap)) {}
};

class FaceNotRealizableError : public std::runtime_error {
 public:
  FaceNotRealizableError() : std::runtime_error("index set is not a realizable face") {}
};

/// A realizable support pattern I together with a strictly feasible witness:
/// s_i.a + b >= 1 on I and <= 0 off I (strictness via positive homogeneity).
struct ConeFace {
  std::vector<Index> indices;  // sorted
  Index dimension = 0;
  Vec witness_a;
  double witness_b = 0.0;
};

struct FaceDecomposition {
  std::vector<ConeFace> faces;  // sorted by (size, lexicographic), includes the empty set
};

/// dim C(S) = rank of [S, 1].
Index cone_dim(const SampleMatrix& S, double rel_tol = 1e-8);

struct ConeMembership {
  bool member = false;
  std::optional<Vec> witness_a;
  std::optional<double> witness_b;
  double roundtrip_residual = 0.0;  // |relu(S a + b 1) - x|_inf for the witness
};

/// Exact membership test: x belongs to the cone iff x >= 0 and the support
/// system { s_i.a + b = x_i on supp(x), <= 0 off supp(x) } is feasible,
/// where supp(x) = { i : x_i > tol }. Pass tol < 0 for the default
/// 1e-9 * (1 + |x|_inf).
ConeMembership cone_membership(const SampleMatrix& S, const Vec& x, double tol = -1.0);

/// All realizable support patterns of the hyperplane arrangement
/// { s_i.a + b = 0 }, found by breadth-first sign-flip search with
/// feasibility pruning (plus randomized witness seeding).
FaceDecomposition enumerate_faces(const SampleMatrix& S, Index cap = 16);

/// Dimension of span F_I(S): the rank of [S_I, 1] restricted to the affine
/// hull of the face's feasible (a,b) region, with implicit equalities among
/// the off-I constraints detected first.
Index face_dim(const SampleMatrix& S, const std::vector<Index>& I, double rel_tol = 1e-8);

/// For x with pairwise distinct entries, a shift lambda such that
/// relu(x - lambda 1) has support exactly the k largest entries. Midpoint of
/// the two relevant order statistics; one below the minimum when k = n.
double threshold_shift(const Vec& x, Index k);

}  // namespace relugeo
