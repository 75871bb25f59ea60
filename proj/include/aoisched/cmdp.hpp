#pragma once

#include <optional>

#include "aoisched/channel.hpp"
#include "aoisched/lp.hpp"

namespace aoi {

/// One power-constrained sensor: its fading channel plus the time-average
/// power budget (units of omega per slot).
struct SensorSpec {
  ChannelModel channel;
  double power_budget = 0.0;

  SensorSpec(ChannelModel ch, double budget) : channel(std::move(ch)), power_budget(budget) {
    if (!(power_budget >= 0.0)) {
      throw ConfigError("power budget must be nonnegative");
    }
  }
};

/// Steady-state occupancy pair on the truncated (age x channel-state) grid.
/// Row x (0-based) holds age x+1. mu(x, q) is the probability of sitting in
/// state (x+1, q); y(x, q) = mu(x, q) * xi(x, q) is the scheduled share.
struct OccupancyMeasure {
  int x_max = 0;
  Eigen::MatrixXd mu;
  Eigen::MatrixXd y;

  double avg_age() const;
  double total_activation() const { return y.sum(); }
  double avg_power(const ChannelModel& channel) const;
  double boundary_mass() const { return mu.row(x_max - 1).sum(); }

  /// Checks 0 <= y <= mu <= 1, normalization and the stationarity balance
  /// against the channel, all within `tol`. Throws SolveError on violation.
  void validate(const ChannelModel& channel, double tol = 1e-7) const;
};

/// Scheduling probabilities xi(x, q) over the truncated grid; row x_max - 1
/// is all ones (forced scheduling at the truncation boundary). Ages beyond
/// the grid use the last row.
struct StationaryPolicy {
  int x_max = 0;
  Eigen::MatrixXd xi;

  /// xi for 1-based age `age`, clamped to the boundary row.
  double at_age(int age, int q) const {
    int row = age >= x_max ? x_max - 1 : age - 1;
    return xi(row, q);
  }
};

struct PolicyMetrics {
  double avg_aoi = 0.0;         // X-bar
  double avg_activation = 0.0;  // A-bar
  double avg_power = 0.0;
  double g_value = 0.0;         // X-bar + W * A-bar
};

/// Assembles the occupancy-measure LP of the decoupled sensor problem at
/// scheduling penalty W: objective sum(W y + age * mu), stationarity and
/// normalization as equalities, y <= mu, the power row, and optionally a cap
/// on the total activation sum(y) <= activation_cap.
lp::LinearProgram build_lp(const SensorSpec& sensor, double w, int x_max,
                           std::optional<double> activation_cap = std::nullopt);

/// Solves the decoupled sensor LP. If mass sticks to the truncation
/// boundary (> 1e-6) or the LP is infeasible at the current grid, x_max is
/// doubled and the solve repeated, up to four doublings. Throws
/// InfeasiblePower or TruncationTooTight when that fails.
OccupancyMeasure solve_decoupled(const SensorSpec& sensor, double w, int x_max,
                                 std::optional<double> activation_cap = std::nullopt);

/// Recovers the stationary randomized policy from an occupancy measure:
/// xi = y / mu, with xi forced to 1 once a forced state is reached, mu
/// vanishes (<= 1e-9), or the boundary row is hit.
StationaryPolicy extract_policy(const OccupancyMeasure& occ);

/// Time-average AoI, activation, power and Lagrangian value g = X + W * A
/// of an occupancy measure.
PolicyMetrics policy_metrics(const OccupancyMeasure& occ, const SensorSpec& sensor, double w);

/// Stationary distribution of the chain a policy induces: forward moves
/// (x,q) -> (x+1,q') with (1 - xi) p, resets (x,q) -> (1,q') with xi p.
/// Requires xi = 1 on the boundary row so no mass escapes the grid.
Eigen::MatrixXd policy_stationary_distribution(const ChannelModel& channel,
                                               const StationaryPolicy& policy);

/// Exact metrics of a policy from its induced stationary distribution.
PolicyMetrics evaluate_policy(const ChannelModel& channel, const StationaryPolicy& policy,
                              double w);

}  // namespace aoi
