#pragma once

#include "relugeo/cone.hpp"
#include "relugeo/network.hpp"
#include "relugeo/types.hpp"

#include <cstdint>
#include <map>
#include <optional>

namespace relugeo {

/// One hidden neuron's role in a two-layer representation: a realizable face
/// of the sample's ReLU cone together with an output sign. The output
/// coefficient's magnitude is absorbed into the neuron's affine parameters,
/// so sign 0 means the neuron is unused.
struct NeuronPattern {
  std::vector<Index> face;  // sorted support indices
  int sign = 0;             // -1, 0, +1
};

struct PatternAssignment {
  std::vector<NeuronPattern> neurons;
  Index total_support() const {
    Index s = 0;
    for (const auto& np : neurons)
      if (np.sign != 0) s += static_cast<Index>(np.face.size());
    return s;
  }
};

enum class MembershipVerdict { Member, NonMember, MemberNumeric, Inconclusive };

std::string to_string(MembershipVerdict v);

struct MembershipCertificate {
  MembershipVerdict verdict = MembershipVerdict::Inconclusive;
  std::optional<Weights> witness;  // two-layer weights reproducing the target
  double lambda = 0.0;             // coefficient of the all-ones direction
  PatternAssignment pattern;
  double residual = 0.0;  // forward-pass check of the witness (exact path)
};

/// Exact membership of t in the width-d two-layer ReLU image with scalar
/// output: enumerate sign/face assignments and solve each linear system.
/// NonMember verdicts are exhaustive and therefore exact.
MembershipCertificate membership_2layer_q1(const SampleMatrix& S, const Vec& t, Index d,
                                           double tol = 1e-9, Index cap = 16);

struct FitDistanceResult {
  double distance = 0.0;  // Euclidean, not squared
  Vec nearest;
  PatternAssignment pattern;
  std::optional<Weights> witness;
  double lambda = 0.0;
};

/// Exact distance from t to the width-d two-layer image (scalar output):
/// per-pattern convex quadratic minimization over the sign-consistency
/// polyhedron, minimized across patterns. The image is a finite union of
/// closed polyhedra for q = 1, so the distance is attained.
FitDistanceResult fit_distance_2layer_q1(const SampleMatrix& S, const Vec& t, Index d,
                                         double tol = 1e-9, Index cap = 16);

struct GeneralMembershipConfig {
  Index restarts = 8;
  Index max_iters = 4000;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  double norm_cap = 0.0;  // 0 disables the cap
};

/// Numeric-only membership for q >= 1 via alternating optimization (exact
/// least squares for the output layer, masked Gauss-Newton steps for the
/// shared hidden layer). Returns MemberNumeric or Inconclusive, never
/// NonMember: a search cannot certify absence for the bilinear q > 1 case.
MembershipCertificate membership_2layer_general(const SampleMatrix& S, const ResponseMatrix& T,
                                                Index d, const GeneralMembershipConfig& config);

/// Upper bound on the dimension of the two-layer image:
/// q = 1: d rk[S,1] + 1;  q > 1: (q + rk[S,1]) d + q.
Index dim_upper_bound(const SampleMatrix& S, Index d, Index q);

struct GenericDimension {
  std::optional<Index> value;
  bool heuristic_threshold = false;  // the q > 1 sample-size threshold is heuristic
};

/// Generic image dimension when the sample is large and general:
/// q = 1 and n >= d(p+1)+1: d(p+1)+1;  q > 1 and n >= (p+q+1)d+q: (p+q+1)d+q.
GenericDimension generic_dim_2layer(Index p, Index d, Index q, Index n);

struct DimensionReport {
  Index theoretical_upper = 0;
  std::optional<Index> generic_formula;
  Index numerical_rank_max = 0;
  Index trials = 0;
  std::uint64_t seed = 0;
  std::map<Index, Index> rank_histogram;
  Index skipped_kink_draws = 0;
};

/// Max numerical Jacobian rank over random Gaussian weight draws; a local
/// probe of the image dimension. Kink-touching ReLU draws are skipped.
DimensionReport numerical_image_dim(const NetworkSpec& spec, const SampleMatrix& S, Index trials,
                                    std::uint64_t seed, double rel_tol = 1e-8);

/// Sample with strictly increasing columns: entries drawn i.i.d. standard
/// normal, then sorted per column. Deterministic given the seed.
SampleMatrix generate_monotone_sample(Index n, Index p, std::uint64_t seed);

struct DeepChainResult {
  bool member = false;
  int orientation = 0;  // +1 nondecreasing shape, -1 nonincreasing, 0 not a member
};

/// Membership in the image of a deep chain of 1-wide ReLU layers (depth >= 3)
/// over a sorted sample: plateau / affine-in-s / plateau shapes. Both
/// orientations are accepted; the result flags which one matched.
DeepChainResult deep_chain_membership(const Vec& s, const Vec& x, double tol = 1e-9);

}  // namespace relugeo
