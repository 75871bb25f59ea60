#pragma once

#include "aoisched/cmdp.hpp"

namespace aoi {

/// Differential (or discounted) cost table of the unconstrained Lagrangian
/// MDP together with the greedy policy it induces. Row x holds age x + 1.
/// thresholds(q) is the smallest age scheduled in channel state q; the
/// boundary age x_max is always scheduled.
struct ValueFunction {
  int x_max = 0;
  Eigen::MatrixXd values;
  double avg_cost = 0.0;
  Eigen::MatrixXi policy;      // 0 = idle, 1 = schedule
  Eigen::VectorXi thresholds;  // 1-based ages
  int sweeps = 0;
  double final_span = 0.0;

  StationaryPolicy as_stationary_policy() const {
    return StationaryPolicy{x_max, policy.cast<double>()};
  }
};

struct RviOptions {
  double span_tol = 1e-9;
  double accept_tol = 1e-6;  // NoConvergence only if the span stays above this
  int max_sweeps = 100000;
};

/// Relative value iteration on the Lagrangian MDP with one-step cost
/// x + W s + lambda omega(q) s, reference state (age 1, state 1). An
/// aperiodicity damping is applied so deterministic cycles (for instance the
/// pure period-2 policy of a single-state channel) still contract; it leaves
/// the average cost, greedy policy and monotonicity of the values unchanged.
ValueFunction relative_value_iteration(const ChannelModel& channel, double w, double lambda,
                                       int x_max, const RviOptions& opts = {});

/// Standard discounted value iteration (discount alpha in (0,1)) to sup-norm
/// tolerance 1e-10; avg_cost reports (1 - alpha) V(1,1) as a diagnostic.
ValueFunction discounted_value_iteration(const ChannelModel& channel, double w, double lambda,
                                         double alpha, int x_max, double tol = 1e-10);

/// Result of solving the single-sensor CMDP without the LP: a bisection on
/// the power multiplier lambda yields two deterministic threshold policies
/// bracketing the budget, mixed with weight rho on the high-power side.
struct BisectionResult {
  double lambda_star = 0.0;
  double mixed_cost = 0.0;  // rho * g_high + (1 - rho) * g_low
  double rho = 1.0;
  ValueFunction high_policy;  // power above the budget (lambda just below)
  ValueFunction low_policy;   // power within the budget (lambda just above)
  PolicyMetrics high_metrics;
  PolicyMetrics low_metrics;
};

/// Bisects lambda until the stationary power of the greedy policy brackets
/// the sensor budget within `lambda_tol`, growing the upper end
/// geometrically first. Throws InfeasiblePower if even the most patient
/// policy overshoots the budget, and SolveError if the empirically observed
/// power-versus-lambda curve is not monotone nonincreasing.
BisectionResult solve_cmdp_by_bisection(const SensorSpec& sensor, double w, int x_max,
                                        double lambda_tol = 1e-8);

}  // namespace aoi
