#include "aoisched/cmdp.hpp"

#include <cmath>
#include <string>

namespace aoi {

namespace {

constexpr double kBoundaryMassTol = 1e-6;
constexpr double kMuZeroTol = 1e-9;  // "mu = 0" in the xi recovery case split
constexpr int kMaxDoublings = 4;

}  // namespace

double OccupancyMeasure::avg_age() const {
  double s = 0.0;
  for (int x = 0; x < x_max; ++x) s += (x + 1) * mu.row(x).sum();
  return s;
}

double OccupancyMeasure::avg_power(const ChannelModel& channel) const {
  return (y * channel.power()).sum();
}

void OccupancyMeasure::validate(const ChannelModel& channel, double tol) const {
  const int q_count = channel.num_states();
  if (mu.rows() != x_max || mu.cols() != q_count || y.rows() != x_max || y.cols() != q_count) {
    throw DimensionMismatch("occupancy tables do not match x_max x Q");
  }
  auto fail = [](const std::string& msg) { throw SolveError("InvalidOccupancy", msg); };
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      if (y(x, q) < -tol || y(x, q) > mu(x, q) + tol || mu(x, q) > 1.0 + tol) {
        fail("0 <= y <= mu <= 1 violated at age " + std::to_string(x + 1));
      }
    }
  }
  if (std::abs(mu.sum() - 1.0) > tol) fail("occupancy mass differs from 1");

  const Eigen::MatrixXd& p = channel.transition();
  // mu_{1,q} collects every reset: sum_{x,q'} y_{x,q'} p_{q',q}.
  Eigen::RowVectorXd resets = Eigen::RowVectorXd::Zero(q_count);
  for (int x = 0; x < x_max; ++x) resets += y.row(x) * p;
  if ((mu.row(0) - resets).cwiseAbs().maxCoeff() > tol) fail("reset balance violated");
  for (int x = 1; x < x_max; ++x) {
    Eigen::RowVectorXd forward = (mu.row(x - 1) - y.row(x - 1)) * p;
    if ((mu.row(x) - forward).cwiseAbs().maxCoeff() > tol) {
      fail("forward balance violated at age " + std::to_string(x + 1));
    }
  }
}

lp::LinearProgram build_lp(const SensorSpec& sensor, double w, int x_max,
                           std::optional<double> activation_cap) {
  if (x_max < 2) {
    throw InvalidTruncation("x_max must be at least 2, got " + std::to_string(x_max));
  }
  if (!(w >= 0.0)) {
    throw ConfigError("scheduling penalty W must be nonnegative");
  }
  const ChannelModel& ch = sensor.channel;
  const Eigen::MatrixXd& p = ch.transition();
  const int q_count = ch.num_states();
  const int cells = x_max * q_count;
  const int n = 2 * cells;  // mu block then y block
  auto mu_col = [&](int x, int q) { return x * q_count + q; };
  auto y_col = [&](int x, int q) { return cells + x * q_count + q; };

  lp::LinearProgram prog;
  prog.objective = Eigen::VectorXd::Zero(n);
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      prog.objective(mu_col(x, q)) = static_cast<double>(x + 1);
      prog.objective(y_col(x, q)) = w;
    }
  }

  const int eq_rows = cells + 1;
  prog.eq_matrix = Eigen::MatrixXd::Zero(eq_rows, n);
  prog.eq_rhs = Eigen::VectorXd::Zero(eq_rows);
  // Reset balance rows: mu_{1,q} - sum_{x,q'} y_{x,q'} p_{q',q} = 0.
  for (int q = 0; q < q_count; ++q) {
    prog.eq_matrix(q, mu_col(0, q)) = 1.0;
    for (int x = 0; x < x_max; ++x) {
      for (int qp = 0; qp < q_count; ++qp) {
        prog.eq_matrix(q, y_col(x, qp)) -= p(qp, q);
      }
    }
  }
  // Forward balance rows: mu_{x,q} - sum_{q'} (mu_{x-1,q'} - y_{x-1,q'}) p_{q',q} = 0.
  for (int x = 1; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      int r = x * q_count + q;
      prog.eq_matrix(r, mu_col(x, q)) = 1.0;
      for (int qp = 0; qp < q_count; ++qp) {
        prog.eq_matrix(r, mu_col(x - 1, qp)) -= p(qp, q);
        prog.eq_matrix(r, y_col(x - 1, qp)) += p(qp, q);
      }
    }
  }
  // Normalization.
  for (int c = 0; c < cells; ++c) prog.eq_matrix(cells, c) = 1.0;
  prog.eq_rhs(cells) = 1.0;

  const int ub_rows = cells + 1 + (activation_cap ? 1 : 0);
  prog.ub_matrix = Eigen::MatrixXd::Zero(ub_rows, n);
  prog.ub_rhs = Eigen::VectorXd::Zero(ub_rows);
  for (int c = 0; c < cells; ++c) {
    prog.ub_matrix(c, cells + c) = 1.0;  // y <= mu
    prog.ub_matrix(c, c) = -1.0;
  }
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      prog.ub_matrix(cells, y_col(x, q)) = ch.power()(q);
    }
  }
  prog.ub_rhs(cells) = sensor.power_budget;
  if (activation_cap) {
    for (int c = 0; c < cells; ++c) prog.ub_matrix(cells + 1, cells + c) = 1.0;
    prog.ub_rhs(cells + 1) = *activation_cap;
  }

  prog.lower_bounds = Eigen::VectorXd::Zero(n);
  prog.upper_bounds = Eigen::VectorXd::Ones(n);
  return prog;
}

OccupancyMeasure solve_decoupled(const SensorSpec& sensor, double w, int x_max,
                                 std::optional<double> activation_cap) {
  const int q_count = sensor.channel.num_states();
  int grid = x_max;
  for (int attempt = 0; attempt <= kMaxDoublings; ++attempt, grid *= 2) {
    lp::LinearProgram prog = build_lp(sensor, w, grid, activation_cap);
    lp::LpSolution sol = lp::solve(prog);
    if (sol.status == lp::LpStatus::Infeasible) {
      // The grid itself forces a minimum amount of scheduling; a larger one
      // may still be feasible, so treat infeasibility like boundary mass.
      if (attempt == kMaxDoublings) {
        throw InfeasiblePower("power budget " + std::to_string(sensor.power_budget) +
                              " cannot support the mandatory boundary scheduling at x_max " +
                              std::to_string(grid));
      }
      continue;
    }
    if (sol.status != lp::LpStatus::Optimal) {
      throw SolveError("LpFailure", "decoupled sensor LP did not reach an optimum");
    }

    OccupancyMeasure occ;
    occ.x_max = grid;
    occ.mu.resize(grid, q_count);
    occ.y.resize(grid, q_count);
    const int cells = grid * q_count;
    for (int x = 0; x < grid; ++x) {
      for (int q = 0; q < q_count; ++q) {
        occ.mu(x, q) = std::max(0.0, sol.values(x * q_count + q));
        occ.y(x, q) = std::max(0.0, sol.values(cells + x * q_count + q));
      }
    }
    if (occ.boundary_mass() <= kBoundaryMassTol) {
      return occ;
    }
    if (attempt == kMaxDoublings) {
      throw TruncationTooTight("boundary mass " + std::to_string(occ.boundary_mass()) +
                               " persists at x_max " + std::to_string(grid));
    }
  }
  throw SolveError("Unreachable", "solve_decoupled fell through");
}

StationaryPolicy extract_policy(const OccupancyMeasure& occ) {
  const int q_count = static_cast<int>(occ.mu.cols());
  StationaryPolicy policy;
  policy.x_max = occ.x_max;
  policy.xi.resize(occ.x_max, q_count);
  for (int q = 0; q < q_count; ++q) {
    bool forced = false;
    for (int x = 0; x < occ.x_max; ++x) {
      if (forced || occ.mu(x, q) <= kMuZeroTol || x == occ.x_max - 1) {
        policy.xi(x, q) = 1.0;
        forced = true;
      } else {
        double ratio = occ.y(x, q) / occ.mu(x, q);
        policy.xi(x, q) = std::min(1.0, std::max(0.0, ratio));
        if (policy.xi(x, q) >= 1.0) forced = true;
      }
    }
  }
  return policy;
}

PolicyMetrics policy_metrics(const OccupancyMeasure& occ, const SensorSpec& sensor, double w) {
  PolicyMetrics m;
  m.avg_aoi = occ.avg_age();
  m.avg_activation = occ.total_activation();
  m.avg_power = occ.avg_power(sensor.channel);
  m.g_value = m.avg_aoi + w * m.avg_activation;
  return m;
}

Eigen::MatrixXd policy_stationary_distribution(const ChannelModel& channel,
                                               const StationaryPolicy& policy) {
  const int q_count = channel.num_states();
  const int x_max = policy.x_max;
  for (int q = 0; q < q_count; ++q) {
    if (policy.xi(x_max - 1, q) < 1.0 - 1e-12) {
      throw SolveError("InvalidPolicy", "boundary row of xi must be 1");
    }
  }
  const Eigen::MatrixXd& p = channel.transition();
  const int states = x_max * q_count;
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(states, states);
  auto id = [&](int x, int q) { return x * q_count + q; };
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      double xi = policy.xi(x, q);
      for (int qp = 0; qp < q_count; ++qp) {
        chain(id(x, q), id(0, qp)) += xi * p(q, qp);
        if (x + 1 < x_max) {
          chain(id(x, q), id(x + 1, qp)) += (1.0 - xi) * p(q, qp);
        }
      }
    }
  }
  Eigen::VectorXd pi = stationary_distribution(chain);
  Eigen::MatrixXd mu(x_max, q_count);
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) mu(x, q) = pi(id(x, q));
  }
  return mu;
}

PolicyMetrics evaluate_policy(const ChannelModel& channel, const StationaryPolicy& policy,
                              double w) {
  Eigen::MatrixXd mu = policy_stationary_distribution(channel, policy);
  PolicyMetrics m;
  for (int x = 0; x < policy.x_max; ++x) {
    for (int q = 0; q < channel.num_states(); ++q) {
      double scheduled = mu(x, q) * policy.xi(x, q);
      m.avg_aoi += (x + 1) * mu(x, q);
      m.avg_activation += scheduled;
      m.avg_power += scheduled * channel.power()(q);
    }
  }
  m.g_value = m.avg_aoi + w * m.avg_activation;
  return m;
}

}  // namespace aoi
