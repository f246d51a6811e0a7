#pragma once

#include "relugeo/network.hpp"
#include "relugeo/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace relugeo {

struct FitConfig {
  Index restarts = 20;
  Index max_iters = 50000;
  double learning_rate = 0.05;     // Adam step scale
  double adam_beta1 = 0.9;         // step schedule parameters
  double adam_beta2 = 0.999;
  double init_scale = 1.0;         // init std = init_scale / sqrt(fan_in)
  std::uint64_t seed = 1;
  double norm_divergence_threshold = 0.0;  // 0: use 1e3 x median initial norm
  double grad_tol = 1e-6;
  double norm_cap = 0.0;  // 0 disables; constrained searches set it
};

enum class AttainmentClass { LikelyAttained, SuspectedNonAttained, Inconclusive };

std::string to_string(AttainmentClass c);

struct TrajectoryPoint {
  Index iter = 0;
  double best_loss = 0.0;  // best-so-far squared loss, monotone nonincreasing
  double norm = 0.0;       // parameter norm at the current iterate
};

struct FitReport {
  double best_sq_loss = 0.0;
  Weights best_weights;
  std::vector<std::vector<TrajectoryPoint>> trajectories;  // per restart, subsampled
  AttainmentClass classification = AttainmentClass::Inconclusive;
  std::uint64_t seed = 0;
  Index iterations_used = 0;  // summed over restarts
  Index best_restart = 0;
  double final_grad_norm = 0.0;    // subgradient norm at the best weights
  double best_norm = 0.0;          // |theta| of the best weights
  double median_init_norm = 0.0;   // across restarts
  double final_window_slope = 0.0; // best restart, loss change per iteration
  bool norm_increasing = false;    // over the best restart's final window
  bool diverged_stop = false;      // best restart halted by the norm guard mid-descent
  double zero_floor = 0.0;         // numeric floor below which the loss counts as zero
};

/// Multi-restart minimization of |T - psi_k(theta)|_F^2. The base method is
/// per-parameter adaptive subgradient descent; two-layer networks add a
/// separable refinement stage (exact output-layer least squares with
/// Gauss-Newton hidden steps and secant extrapolation along the accepted
/// path), which is what lets minimizing sequences track divergent valleys.
/// Deterministic given config.seed; restarts run in parallel.
FitReport fit(const NetworkSpec& spec, const SampleMatrix& S, const ResponseMatrix& T,
              const FitConfig& config);

/// Heuristic attainment diagnosis from a completed fit run. Labeled
/// heuristic everywhere it is surfaced; exact non-membership claims only
/// come from the q = 1 enumeration path.
AttainmentClass classify_attainment(const FitReport& report, const FitConfig& config);

struct NonclosedPoint {
  std::uint64_t k = 0;
  double distance = 0.0;  // |T - psi_2(theta_k)|_F
  double norm = 0.0;      // |theta_k|
};

/// Evaluate the built-in divergent weight sequence on the built-in 6x2
/// counterexample data: distance sqrt(5)/k with norm growing like 2k.
std::vector<NonclosedPoint> replicate_nonclosed_sequence(const std::vector<std::uint64_t>& ks);

/// The weights theta_k of the divergent sequence.
Weights nonclosed_weights(std::uint64_t k);

/// Squared loss of the best constant-rows fit (column means); a sanity
/// ceiling every fit must beat.
double baseline_loss(const ResponseMatrix& T);

namespace datasets {
/// Built-in 6x2 design matrix of the non-attainment counterexample.
SampleMatrix paper_s();
/// Built-in 6x2 response matrix paired with paper_s.
ResponseMatrix paper_t();
/// Built-in 3-sample scalar chain example: s = (0, 1, 2).
Vec tanh_example_s();
/// Response (0, 2, 1) whose best chain fit is approached but not attained.
Vec tanh_example_t();
}  // namespace datasets

}  // namespace relugeo
