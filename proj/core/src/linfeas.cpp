#include "relugeo/linfeas.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace relugeo {

void LinearSystem::add_equality(const Vec& row, double rhs) {
  detail::require(row.size() == vars, "LinearSystem: row width != vars");
  E.conservativeResize(E.rows() + 1, vars);
  E.row(E.rows() - 1) = row.transpose();
  f.conservativeResize(f.size() + 1);
  f[f.size() - 1] = rhs;
}

void LinearSystem::add_inequality(const Vec& row, double rhs) {
  detail::require(row.size() == vars, "LinearSystem: row width != vars");
  G.conservativeResize(G.rows() + 1, vars);
  G.row(G.rows() - 1) = row.transpose();
  h.conservativeResize(h.size() + 1);
  h[h.size() - 1] = rhs;
}

void LinearSystem::validate() const {
  detail::require(E.cols() == vars && G.cols() == vars, "LinearSystem: column mismatch");
  detail::require(E.rows() == f.size() && G.rows() == h.size(), "LinearSystem: rhs mismatch");
  detail::require(E.allFinite() && G.allFinite() && f.allFinite() && h.allFinite(),
                  "LinearSystem: entries must be finite");
}

namespace {

double max_violation_of(const LinearSystem& sys, const Vec& x) {
  double v = 0.0;
  if (sys.E.rows() > 0) v = (sys.E * x - sys.f).cwiseAbs().maxCoeff();
  if (sys.G.rows() > 0) v = std::max(v, (sys.G * x - sys.h).maxCoeff());
  return std::max(v, 0.0);
}

}  // namespace

FeasibilityResult solve_feasibility(const LinearSystem& sys, double tol) {
  sys.validate();
  detail::require(tol > 0.0, "solve_feasibility: tol must be positive");

  const Index v = sys.vars;
  const Index me = sys.E.rows();
  const Index mi = sys.G.rows();
  const Index rows = me + mi;

  FeasibilityResult res;
  if (rows == 0) {
    res.status = FeasibilityStatus::Feasible;
    res.witness = Vec::Zero(v);
    return res;
  }

  // Standard form: z = [x+, x-, slack] >= 0, one artificial per row, rhs >= 0.
  const Index nstruct = 2 * v + mi;
  const Index ncols = nstruct + rows;
  Mat T = Mat::Zero(rows + 1, ncols + 1);

  for (Index r = 0; r < rows; ++r) {
    Vec row;
    double rhs;
    if (r < me) {
      row = sys.E.row(r).transpose();
      rhs = sys.f[r];
    } else {
      row = sys.G.row(r - me).transpose();
      rhs = sys.h[r - me];
    }
    double scale = std::max(row.cwiseAbs().maxCoeff(), std::abs(rhs));
    if (scale <= 0.0) scale = 1.0;
    row /= scale;
    rhs /= scale;
    double sgn = (rhs < 0.0) ? -1.0 : 1.0;
    for (Index c = 0; c < v; ++c) {
      T(r, c) = sgn * row[c];
      T(r, v + c) = -sgn * row[c];
    }
    if (r >= me) T(r, 2 * v + (r - me)) = sgn;  // slack
    T(r, nstruct + r) = 1.0;                    // artificial
    T(r, ncols) = sgn * rhs;
  }

  // Phase-1 objective: minimize sum of artificials. Cost row holds reduced
  // costs once the artificial columns are priced out.
  for (Index c = 0; c < rows; ++c) T(rows, nstruct + c) = 1.0;
  for (Index r = 0; r < rows; ++r) T.row(rows) -= T.row(r);

  std::vector<Index> basis(static_cast<std::size_t>(rows));
  for (Index r = 0; r < rows; ++r) basis[static_cast<std::size_t>(r)] = nstruct + r;

  const double eps = 1e-11;
  double min_pivot = std::numeric_limits<double>::max(), max_pivot = 0.0;
  const long max_iters = 20000L * (rows + ncols);

  for (long it = 0; it < max_iters; ++it) {
    // Bland: smallest-index column with negative reduced cost.
    Index enter = -1;
    for (Index c = 0; c < ncols; ++c) {
      if (T(rows, c) < -eps) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;

    Index leave = -1;
    double best_ratio = 0.0;
    for (Index r = 0; r < rows; ++r) {
      if (T(r, enter) > eps) {
        double ratio = T(r, ncols) / T(r, enter);
        if (leave < 0 || ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 &&
             basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
          leave = r;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0) break;  // cannot happen in phase 1; objective bounded below

    double piv = T(leave, enter);
    min_pivot = std::min(min_pivot, std::abs(piv));
    max_pivot = std::max(max_pivot, std::abs(piv));
    T.row(leave) /= piv;
    for (Index r = 0; r <= rows; ++r) {
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    }
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  double phase1 = -T(rows, ncols);
  if (max_pivot > 0.0) res.condition_estimate = max_pivot / std::max(min_pivot, 1e-300);

  if (phase1 > tol) {
    res.status = FeasibilityStatus::Infeasible;
    return res;
  }

  Vec x = Vec::Zero(v);
  for (Index r = 0; r < rows; ++r) {
    Index bc = basis[static_cast<std::size_t>(r)];
    if (bc < v) x[bc] += T(r, ncols);
    else if (bc < 2 * v) x[bc - v] -= T(r, ncols);
  }
  res.status = FeasibilityStatus::Feasible;
  res.witness = x;
  res.max_violation = max_violation_of(sys, x);
  return res;
}

Vec least_squares(const Mat& A, const Vec& b) {
  detail::require(A.rows() > 0 && A.cols() > 0, "least_squares: A must be nonempty");
  detail::require(A.rows() == b.size(), "least_squares: row mismatch");
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  return cod.solve(b);
}

Index numerical_rank(const Mat& A, double rel_tol) {
  detail::require(rel_tol > 0.0 && rel_tol < 1.0, "numerical_rank: rel_tol in (0,1)");
  if (A.rows() == 0 || A.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  const double thresh = rel_tol * sv[0];
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv[i] > thresh) ++r;
  return r;
}

}  // namespace relugeo
