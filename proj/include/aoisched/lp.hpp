#pragma once

#include <Eigen/Dense>

#include "aoisched/errors.hpp"

namespace aoi::lp {

/// min c'z  s.t.  A_eq z = b_eq,  A_ub z <= b_ub,  lo <= z <= hi,
/// with every variable boxed inside [0, 1]. The box is handled by the
/// bounded-variable simplex directly, not by extra constraint rows.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ub_matrix;
  Eigen::VectorXd ub_rhs;
  Eigen::VectorXd lower_bounds;
  Eigen::VectorXd upper_bounds;

  int num_vars() const { return static_cast<int>(objective.size()); }

  /// Throws DimensionMismatch on inconsistent sizes, non-finite
  /// coefficients, or bounds outside 0 <= lo <= hi <= 1.
  void check() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd values;
  double objective_value = 0.0;
  long pivots = 0;
  // Residuals of the refactorized optimal point; all <= 1e-7 when Optimal.
  double max_eq_residual = 0.0;
  double max_ub_violation = 0.0;
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  long max_pivots = 1000000;
};

/// Two-phase dense tableau simplex with Bland's anti-cycling rule and
/// bounded variables. Deterministic: re-solving the same program yields a
/// bit-identical solution. Throws IterationLimit past max_pivots.
LpSolution solve(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace aoi::lp
