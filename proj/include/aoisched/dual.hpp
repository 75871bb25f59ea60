#pragma once

#include <vector>

#include "aoisched/cmdp.hpp"

namespace aoi {

/// N sensors sharing M orthogonal channels per slot.
struct NetworkSpec {
  std::vector<SensorSpec> sensors;
  int bandwidth = 0;

  int size() const { return static_cast<int>(sensors.size()); }

  /// Simulations allow M = N; the relaxation-based solver requires the
  /// non-trivial M < N case, enforced with `strict_bandwidth`.
  void validate(bool strict_bandwidth) const {
    if (sensors.empty()) throw ConfigError("network needs at least one sensor");
    if (bandwidth < 1 || bandwidth > size()) {
      throw ConfigError("bandwidth M must satisfy 1 <= M <= N");
    }
    if (strict_bandwidth && bandwidth >= size()) {
      throw ConfigError("bandwidth M must satisfy M < N for the relaxed solver");
    }
  }
};

struct DualIterate {
  int k = 0;
  double w = 0.0;
  double sum_activation = 0.0;
  double g = 0.0;
};

/// Output of the dual search: the multiplier trace, the mixed per-sensor
/// occupancy measures and recovered policies, the mixing weight nu on the
/// low-activation bracket, and the network AoI lower bound
/// (1/N) sum_n sum_{x,q} (age) mu*.
struct DualResult {
  std::vector<DualIterate> w_trace;
  std::vector<OccupancyMeasure> mixed_occupancy;
  std::vector<StationaryPolicy> policies;
  double aoi_lower_bound = 0.0;
  double nu = 1.0;
  bool mixed = false;
  double w_star = 0.0;
  int iterations = 0;
};

struct DualOptions {
  double gamma0 = 0.0;  // 0 -> auto: 2 g(0) / N
  double eps = 1e-3;
  int max_iter = 200;
  int x_max = 200;
  int refine_rounds = 8;  // bracket bisection rounds after the subgradient loop
  int threads = 0;        // 0 -> hardware concurrency
};

struct DualValue {
  double g = 0.0;
  double sum_activation = 0.0;
  std::vector<PolicyMetrics> per_sensor;
  std::vector<OccupancyMeasure> occupancies;
};

/// Dual function at multiplier W: solves every sensor's decoupled LP and
/// aggregates g = (1/N) sum g_n - W M. Per-sensor solves run on `threads`
/// workers. InfeasiblePower is rethrown with the offending sensor index.
DualValue dual_value(const NetworkSpec& network, double w, int x_max, int threads = 0);

/// Algorithm: subgradient iterations W <- max(0, W + gamma_k (sum A_n - M))
/// with gamma_k = gamma0 / k, bracket tracking on both sides of M, optional
/// bracket bisection, and occupancy mixing so the relaxed bandwidth
/// constraint is met with equality. Throws NoBracket if every iterate stays
/// on one side of M.
DualResult run_algorithm1(const NetworkSpec& network, const DualOptions& opts = {});

/// Deterministic re-aggregation of the lower bound from the mixed measures.
double lower_bound(const DualResult& result);

}  // namespace aoi
