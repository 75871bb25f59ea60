#include "aoisched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace aoi {

namespace {

constexpr double kDamping = 0.9;  // weight on real transitions in the lazy operator

// Greedy action table for a value table: schedule iff the scheduling branch
// is no worse than idling (ties schedule, which keeps thresholds the
// smallest age consistent with the policy). The boundary age is forced.
Eigen::MatrixXi greedy_policy(const ChannelModel& ch, const Eigen::MatrixXd& v, double w,
                              double lambda) {
  const int x_max = static_cast<int>(v.rows());
  const int q_count = ch.num_states();
  const Eigen::MatrixXd& p = ch.transition();
  Eigen::MatrixXi policy(x_max, q_count);
  Eigen::VectorXd reset = p * v.row(0).transpose();
  for (int x = 0; x < x_max; ++x) {
    for (int q = 0; q < q_count; ++q) {
      if (x == x_max - 1) {
        policy(x, q) = 1;
        continue;
      }
      double forward = p.row(q).dot(v.row(x + 1));
      double schedule_extra = w + lambda * ch.power()(q) + reset(q);
      policy(x, q) = (schedule_extra <= forward) ? 1 : 0;
    }
  }
  return policy;
}

Eigen::VectorXi thresholds_of(const Eigen::MatrixXi& policy) {
  const int x_max = static_cast<int>(policy.rows());
  const int q_count = static_cast<int>(policy.cols());
  Eigen::VectorXi tau(q_count);
  for (int q = 0; q < q_count; ++q) {
    int first = x_max;
    for (int x = 0; x < x_max; ++x) {
      if (policy(x, q) == 1) {
        first = x + 1;
        break;
      }
    }
    tau(q) = first;
  }
  return tau;
}

struct BisectionEval {
  double lambda = 0.0;
  ValueFunction vf;
  PolicyMetrics metrics;
};

}  // namespace

ValueFunction relative_value_iteration(const ChannelModel& channel, double w, double lambda,
                                       int x_max, const RviOptions& opts) {
  if (x_max < 2) throw InvalidTruncation("x_max must be at least 2");
  if (!(w >= 0.0) || !(lambda >= 0.0)) {
    throw ConfigError("multipliers W and lambda must be nonnegative");
  }
  const int q_count = channel.num_states();
  const Eigen::MatrixXd& p = channel.transition();
  const Eigen::VectorXd& omega = channel.power();

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(x_max, q_count);
  Eigen::MatrixXd next(x_max, q_count);
  double span = 0.0;
  double gamma = 0.0;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    Eigen::VectorXd reset = p * v.row(0).transpose();
    for (int x = 0; x < x_max; ++x) {
      Eigen::VectorXd forward =
          (x + 1 < x_max) ? Eigen::VectorXd(p * v.row(x + 1).transpose()) : Eigen::VectorXd();
      for (int q = 0; q < q_count; ++q) {
        double schedule = (x + 1) + w + lambda * omega(q) + kDamping * reset(q);
        double best;
        if (x == x_max - 1) {
          best = schedule;
        } else {
          double idle = (x + 1) + kDamping * forward(q);
          best = std::min(idle, schedule);
        }
        next(x, q) = (1.0 - kDamping) * v(x, q) + best;
      }
    }
    Eigen::MatrixXd diff = next - v;
    double hi = diff.maxCoeff();
    double lo = diff.minCoeff();
    span = hi - lo;
    gamma = 0.5 * (hi + lo);
    v = next.array() - next(0, 0);
    if (span < opts.span_tol) {
      ++sweep;
      break;
    }
  }
  if (span >= opts.accept_tol) {
    throw NoConvergence("relative value iteration span " + std::to_string(span) + " after " +
                        std::to_string(sweep) + " sweeps");
  }

  ValueFunction vf;
  vf.x_max = x_max;
  vf.values = v;
  vf.avg_cost = gamma;
  // The damped table is V_true / kDamping; rescale so the greedy comparison
  // matches the undamped Bellman equation.
  Eigen::MatrixXd scaled = kDamping * v;
  vf.policy = greedy_policy(channel, scaled, w, lambda);
  vf.thresholds = thresholds_of(vf.policy);
  vf.sweeps = sweep;
  vf.final_span = span;
  return vf;
}

ValueFunction discounted_value_iteration(const ChannelModel& channel, double w, double lambda,
                                         double alpha, int x_max, double tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("discount must lie in (0,1)");
  if (x_max < 2) throw InvalidTruncation("x_max must be at least 2");
  const int q_count = channel.num_states();
  const Eigen::MatrixXd& p = channel.transition();
  const Eigen::VectorXd& omega = channel.power();

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(x_max, q_count);
  Eigen::MatrixXd next(x_max, q_count);
  int sweep = 0;
  double diff = 0.0;
  const int max_sweeps = 2000000;
  for (; sweep < max_sweeps; ++sweep) {
    Eigen::VectorXd reset = p * v.row(0).transpose();
    for (int x = 0; x < x_max; ++x) {
      Eigen::VectorXd forward =
          (x + 1 < x_max) ? Eigen::VectorXd(p * v.row(x + 1).transpose()) : Eigen::VectorXd();
      for (int q = 0; q < q_count; ++q) {
        double schedule = (x + 1) + w + lambda * omega(q) + alpha * reset(q);
        if (x == x_max - 1) {
          next(x, q) = schedule;
        } else {
          next(x, q) = std::min((x + 1) + alpha * forward(q), schedule);
        }
      }
    }
    diff = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (diff < tol) {
      ++sweep;
      break;
    }
  }

  ValueFunction vf;
  vf.x_max = x_max;
  vf.values = v;
  vf.avg_cost = (1.0 - alpha) * v(0, 0);
  // Greedy extraction reuses the average-cost helper; alpha scales both
  // branches' continuations equally so the same comparison applies.
  Eigen::MatrixXd scaled = alpha * v;
  vf.policy = greedy_policy(channel, scaled, w, lambda);
  vf.thresholds = thresholds_of(vf.policy);
  vf.sweeps = sweep;
  vf.final_span = diff;
  return vf;
}

BisectionResult solve_cmdp_by_bisection(const SensorSpec& sensor, double w, int x_max,
                                        double lambda_tol) {
  const ChannelModel& ch = sensor.channel;
  const double budget = sensor.power_budget;
  std::vector<BisectionEval> evals;

  auto eval = [&](double lambda) {
    // The span test must scale with the one-step cost, which grows with
    // lambda; the greedy policy stabilizes far earlier than the values.
    double scale = std::max(1.0, w + lambda * ch.power().maxCoeff());
    RviOptions opts;
    opts.span_tol = 1e-9 * scale;
    opts.accept_tol = 1e-6 * scale;
    BisectionEval e;
    e.lambda = lambda;
    e.vf = relative_value_iteration(ch, w, lambda, x_max, opts);
    StationaryPolicy sp = e.vf.as_stationary_policy();
    e.metrics = evaluate_policy(ch, sp, w);
    evals.push_back(e);
    return e;
  };

  auto check_monotone = [&]() {
    std::vector<const BisectionEval*> sorted;
    for (const auto& e : evals) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* a, const auto* b) { return a->lambda < b->lambda; });
    for (size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i]->metrics.avg_power > sorted[i - 1]->metrics.avg_power + 1e-9) {
        throw SolveError("NonMonotonePower",
                         "stationary power increased with lambda near lambda = " +
                             std::to_string(sorted[i]->lambda));
      }
    }
  };

  BisectionEval at_zero = eval(0.0);
  if (at_zero.metrics.avg_power <= budget + 1e-12) {
    BisectionResult r;
    r.lambda_star = 0.0;
    r.rho = 1.0;
    r.high_policy = at_zero.vf;
    r.low_policy = at_zero.vf;
    r.high_metrics = at_zero.metrics;
    r.low_metrics = at_zero.metrics;
    r.mixed_cost = at_zero.metrics.g_value;
    return r;
  }

  BisectionEval lo_side = at_zero;  // power above the budget
  double lambda_hi = 1.0;
  BisectionEval hi_side = eval(lambda_hi);
  while (hi_side.metrics.avg_power > budget) {
    lambda_hi *= 2.0;
    if (lambda_hi > 1e12) {
      throw InfeasiblePower("budget " + std::to_string(budget) +
                            " is below the power forced by boundary scheduling");
    }
    lo_side = hi_side;
    hi_side = eval(lambda_hi);
  }

  while (hi_side.lambda - lo_side.lambda > lambda_tol) {
    double mid = 0.5 * (hi_side.lambda + lo_side.lambda);
    BisectionEval e = eval(mid);
    if (e.metrics.avg_power > budget) {
      lo_side = e;
    } else {
      hi_side = e;
    }
  }
  check_monotone();

  double p_high = lo_side.metrics.avg_power;
  double p_low = hi_side.metrics.avg_power;
  BisectionResult r;
  r.lambda_star = 0.5 * (lo_side.lambda + hi_side.lambda);
  r.high_policy = lo_side.vf;
  r.low_policy = hi_side.vf;
  r.high_metrics = lo_side.metrics;
  r.low_metrics = hi_side.metrics;
  if (p_high - p_low > 1e-15) {
    r.rho = std::min(1.0, std::max(0.0, (budget - p_low) / (p_high - p_low)));
  } else {
    r.rho = 0.0;
  }
  r.mixed_cost = r.rho * lo_side.metrics.g_value + (1.0 - r.rho) * hi_side.metrics.g_value;
  return r;
}

}  // namespace aoi
