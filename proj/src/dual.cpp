#include "aoisched/dual.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <optional>
#include <thread>
#include <vector>

namespace aoi {

namespace {

constexpr double kActTol = 1e-6;  // "activation equals M" tolerance

int worker_count(int requested, int jobs) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 2;
  int t = requested > 0 ? requested : hw;
  return std::max(1, std::min(t, jobs));
}

// Solves every sensor's decoupled LP at multiplier w on a small worker
// fan-out. Exceptions are rethrown for the lowest failing sensor index so
// runs stay deterministic.
std::vector<OccupancyMeasure> solve_sensors(const NetworkSpec& network, double w, int x_max,
                                            int threads) {
  const int n = network.size();
  std::vector<std::optional<OccupancyMeasure>> out(n);
  std::vector<std::exception_ptr> errors(n);

  int t = worker_count(threads, n);
  std::atomic<int> cursor{0};
  auto work = [&]() {
    while (true) {
      int i = cursor.fetch_add(1);
      if (i >= n) break;
      try {
        out[i] = solve_decoupled(network.sensors[i], w, x_max);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::future<void>> futures;
  futures.reserve(t - 1);
  for (int i = 0; i + 1 < t; ++i) futures.push_back(std::async(std::launch::async, work));
  work();
  for (auto& f : futures) f.get();

  for (int i = 0; i < n; ++i) {
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const InfeasiblePower& e) {
        throw InfeasiblePower("sensor " + std::to_string(i + 1) + ": " + e.what());
      } catch (const SolveError& e) {
        throw SolveError(e.code(), "sensor " + std::to_string(i + 1) + ": " + e.what());
      }
    }
  }
  std::vector<OccupancyMeasure> occ;
  occ.reserve(n);
  for (int i = 0; i < n; ++i) occ.push_back(std::move(*out[i]));
  return occ;
}

OccupancyMeasure pad_to(const OccupancyMeasure& occ, int x_max) {
  if (occ.x_max == x_max) return occ;
  OccupancyMeasure padded;
  padded.x_max = x_max;
  padded.mu = Eigen::MatrixXd::Zero(x_max, occ.mu.cols());
  padded.y = Eigen::MatrixXd::Zero(x_max, occ.y.cols());
  padded.mu.topRows(occ.x_max) = occ.mu;
  padded.y.topRows(occ.x_max) = occ.y;
  return padded;
}

OccupancyMeasure mix(const OccupancyMeasure& low, const OccupancyMeasure& up, double nu) {
  int x_max = std::max(low.x_max, up.x_max);
  OccupancyMeasure a = pad_to(low, x_max);
  OccupancyMeasure b = pad_to(up, x_max);
  OccupancyMeasure m;
  m.x_max = x_max;
  m.mu = nu * a.mu + (1.0 - nu) * b.mu;
  m.y = nu * a.y + (1.0 - nu) * b.y;
  return m;
}

struct Bracket {
  double w = 0.0;
  double activation = 0.0;
  std::vector<OccupancyMeasure> occupancies;
  bool set = false;
};

}  // namespace

DualValue dual_value(const NetworkSpec& network, double w, int x_max, int threads) {
  network.validate(/*strict_bandwidth=*/false);
  if (!(w >= 0.0)) throw ConfigError("multiplier W must be nonnegative");

  DualValue dv;
  dv.occupancies = solve_sensors(network, w, x_max, threads);
  const int n = network.size();
  dv.per_sensor.reserve(n);
  double g_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    PolicyMetrics m = policy_metrics(dv.occupancies[i], network.sensors[i], w);
    g_sum += m.g_value;
    dv.sum_activation += m.avg_activation;
    dv.per_sensor.push_back(m);
  }
  dv.g = g_sum / n - w * network.bandwidth;
  return dv;
}

DualResult run_algorithm1(const NetworkSpec& network, const DualOptions& opts) {
  network.validate(/*strict_bandwidth=*/true);
  if (opts.eps <= 0.0) throw ConfigError("eps must be positive");
  if (opts.gamma0 < 0.0) throw ConfigError("gamma0 must be nonnegative");
  const int n = network.size();
  const double m_band = static_cast<double>(network.bandwidth);

  DualResult result;
  auto finish_unmixed = [&](double w, const std::vector<OccupancyMeasure>& occ, double nu) {
    result.nu = nu;
    result.mixed = false;
    result.w_star = w;
    result.mixed_occupancy = occ;
    result.policies.clear();
    double lb = 0.0;
    for (const auto& o : occ) {
      result.policies.push_back(extract_policy(o));
      lb += o.avg_age();
    }
    result.aoi_lower_bound = lb / n;
  };

  DualValue dv = dual_value(network, 0.0, opts.x_max, opts.threads);
  result.w_trace.push_back({0, 0.0, dv.sum_activation, dv.g});
  if (dv.sum_activation <= m_band + kActTol) {
    // Relaxed bandwidth constraint already satisfied at W = 0.
    finish_unmixed(0.0, dv.occupancies, 1.0);
    return result;
  }

  double gamma0 = opts.gamma0 > 0.0 ? opts.gamma0 : 2.0 * dv.g / n;
  Bracket lower;  // activation <= M, the largest such activation
  Bracket upper;  // activation > M, the smallest such activation
  upper = {0.0, dv.sum_activation, dv.occupancies, true};

  auto offer = [&](double w, const DualValue& v) {
    if (v.sum_activation <= m_band) {
      if (!lower.set || v.sum_activation > lower.activation ||
          (v.sum_activation == lower.activation && w < lower.w)) {
        lower = {w, v.sum_activation, v.occupancies, true};
      }
    } else {
      if (!upper.set || v.sum_activation < upper.activation ||
          (v.sum_activation == upper.activation && w < upper.w)) {
        upper = {w, v.sum_activation, v.occupancies, true};
      }
    }
  };

  double w = 0.0;
  double activation = dv.sum_activation;
  int k = 0;
  for (k = 1; k <= opts.max_iter; ++k) {
    double step = gamma0 / k;
    double w_next = std::max(0.0, w + step * (activation - m_band));
    dv = dual_value(network, w_next, opts.x_max, opts.threads);
    result.w_trace.push_back({k, w_next, dv.sum_activation, dv.g});
    offer(w_next, dv);
    bool converged = std::abs(w_next - w) < opts.eps && dv.sum_activation <= m_band + kActTol;
    w = w_next;
    activation = dv.sum_activation;
    if (converged) break;
  }
  result.iterations = std::min(k, opts.max_iter);

  if (std::abs(activation - m_band) <= kActTol) {
    finish_unmixed(w, dv.occupancies, 1.0);
    return result;
  }
  if (!lower.set) {
    throw NoBracket("no iterate with total activation <= M = " + std::to_string(m_band) +
                    " after " + std::to_string(result.iterations) +
                    " iterations (last activation " + std::to_string(activation) + ")");
  }

  // Bracket bisection: narrows [W_u, W_l] (upper bracket has the smaller
  // multiplier) to sharpen the mixing coefficient.
  for (int r = 0; r < opts.refine_rounds; ++r) {
    double mid = 0.5 * (lower.w + upper.w);
    if (!(std::abs(lower.w - upper.w) > 1e-12)) break;
    DualValue v = dual_value(network, mid, opts.x_max, opts.threads);
    result.w_trace.push_back({++k, mid, v.sum_activation, v.g});
    offer(mid, v);
  }

  double m_l = lower.activation;
  double m_u = upper.activation;
  if (std::abs(m_l - m_band) <= kActTol) {
    finish_unmixed(lower.w, lower.occupancies, 1.0);
    return result;
  }
  double nu = (m_u - m_band) / (m_u - m_l);
  nu = std::min(1.0, std::max(0.0, nu));
  result.nu = nu;
  result.mixed = true;
  result.w_star = 0.5 * (lower.w + upper.w);
  result.mixed_occupancy.clear();
  result.policies.clear();
  double lb = 0.0;
  for (int i = 0; i < n; ++i) {
    OccupancyMeasure mixed = mix(lower.occupancies[i], upper.occupancies[i], nu);
    result.policies.push_back(extract_policy(mixed));
    lb += mixed.avg_age();
    result.mixed_occupancy.push_back(std::move(mixed));
  }
  result.aoi_lower_bound = lb / n;
  return result;
}

double lower_bound(const DualResult& result) {
  if (result.mixed_occupancy.empty()) return 0.0;
  double lb = 0.0;
  for (const auto& occ : result.mixed_occupancy) lb += occ.avg_age();
  return lb / static_cast<double>(result.mixed_occupancy.size());
}

}  // namespace aoi
