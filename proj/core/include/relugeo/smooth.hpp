#pragma once

#include "relugeo/erm.hpp"
#include "relugeo/types.hpp"

#include <optional>
#include <vector>

namespace relugeo {

struct IsotonicBound {
  double sq_distance = 0.0;
  Vec minimizer;
  bool nondecreasing = true;  // which orientation attained the minimum
};

/// Squared distance from t to the monotone cone (both orientations), via
/// pool-adjacent-violators. A scalar chain c.sigma(a s + b) + d with monotone
/// sigma only produces coordinatewise-monotone outputs, so this lower-bounds
/// its fit loss; on the built-in 3-sample example the bound is exact.
IsotonicBound isotonic_bound(const Vec& t);

struct ChainAnalysis {
  Vec sample;
  Vec target;
  IsotonicBound isotonic;
  double best_sq_loss = 0.0;
  double best_norm = 0.0;   // |theta| at the best iterate
  double final_norm = 0.0;  // |theta| at the end of the best run
  AttainmentClass classification = AttainmentClass::Inconclusive;
  std::optional<Weights> exact_witness;  // present when the infimum is attained
  double witness_residual = 0.0;
};

struct ChainAnalysisConfig {
  ChainAnalysisConfig() {
    fit.restarts = 6;
    fit.max_iters = 8000;
  }
  FitConfig fit;
  Activation activation = Activation::Tanh;
  double bound_tol = 1e-3;  // "loss reached the bound" margin for classification
};

/// Analysis of the scalar two-layer chain on the fixed 3-point sample
/// s = (0, 1, 2): fit, isotonic lower bound, attainment classification, and
/// an exact interpolation witness whenever one exists (strictly monotone or
/// constant targets).
ChainAnalysis tanh_example_analysis(const Vec& t, const ChainAnalysisConfig& config = {});

struct EpsilonGridReport {
  std::vector<ChainAnalysis> analyses;  // row-major over the grid
  double suspected_fraction = 0.0;
};

/// tanh_example_analysis over a uniform grid on the box |t_i - center_i| <= eps.
EpsilonGridReport epsilon_grid_analysis(const Vec& t_center, double eps, Index grid_points,
                                        const ChainAnalysisConfig& config = {});

}  // namespace relugeo
