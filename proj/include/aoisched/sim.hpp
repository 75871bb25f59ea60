#pragma once

#include <cstdint>
#include <vector>

#include "aoisched/dual.hpp"

namespace aoi {

enum class SchedulerKind { Truncated, GreedyPowerAware, RoundRobin };

/// One slotted Monte-Carlo run. All sensors start synchronized at age 1.
/// Channel evolution uses one seeded stream per sensor and policy
/// randomness a separate stream, so every scheduler sees identical channel
/// sample paths under the same seed.
struct SimConfig {
  NetworkSpec network;
  long horizon = 0;
  std::uint64_t seed = 0;
  SchedulerKind kind = SchedulerKind::RoundRobin;
  std::vector<StationaryPolicy> policies;  // per sensor, Truncated only
  int trace_stride = 0;                    // > 0 records the network AoI every stride slots

  void validate() const;
};

struct SimulationResult {
  double network_avg_aoi = 0.0;
  std::vector<double> per_sensor_avg_aoi;
  std::vector<double> per_sensor_avg_power;
  std::vector<double> per_sensor_activation;  // fraction of slots actually scheduled
  int max_scheduled_per_slot = 0;
  std::vector<double> aoi_trace;
};

/// Uniformly selects min(M, |candidates|) entries via a seeded partial
/// Fisher-Yates shuffle; under capacity the whole candidate set is kept.
std::vector<int> truncate_decisions(std::vector<int> candidates, int bandwidth,
                                    std::mt19937_64& rng);

/// Runs the configured scheduler for `horizon` slots and reports the AoI,
/// power and scheduling accounting. Deterministic given (config, seed).
SimulationResult run(const SimConfig& config);

/// Greedy baseline: schedules the up-to-M highest-AoI sensors among those
/// whose cumulative budget allows a transmission (ties to the lowest
/// index). Requires config.kind == GreedyPowerAware.
SimulationResult run_greedy(const SimConfig& config);

}  // namespace aoi
