#pragma once

#include "relugeo/types.hpp"

#include <optional>

namespace relugeo {

/// Equalities E x = f together with inequalities G x <= h over v free variables.
/// Strict inequalities are never represented here; callers on positively
/// homogeneous systems encode "> 0" as ">= 1".
struct LinearSystem {
  Mat E;  // may have zero rows
  Vec f;
  Mat G;  // may have zero rows
  Vec h;
  Index vars = 0;

  static LinearSystem empty(Index vars) {
    return {Mat::Zero(0, vars), Vec::Zero(0), Mat::Zero(0, vars), Vec::Zero(0), vars};
  }
  void add_equality(const Vec& row, double rhs);
  void add_inequality(const Vec& row, double rhs);  // row * x <= rhs
  void validate() const;
};

enum class FeasibilityStatus { Feasible, Infeasible };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::optional<Vec> witness;       // present iff Feasible
  double max_violation = 0.0;       // of the witness against the raw system
  double condition_estimate = 1.0;  // max/min |pivot| seen during elimination
};

/// Phase-1 simplex feasibility for a small dense system. Feasible results
/// carry a witness with max violation <= tol; infeasible means the phase-1
/// optimum stays above tol.
FeasibilityResult solve_feasibility(const LinearSystem& sys, double tol = 1e-9);

/// Minimizer of |A x - b|_2; minimum-norm solution when rank-deficient.
Vec least_squares(const Mat& A, const Vec& b);

/// Count of singular values above rel_tol times the largest one.
Index numerical_rank(const Mat& A, double rel_tol = 1e-8);

}  // namespace relugeo
