#pragma once

#include <Eigen/Dense>
#include <random>

#include "aoisched/errors.hpp"

namespace aoi {

/// Uniform double in [0, 1) built from the top 53 bits of one generator
/// draw. Used everywhere instead of std::uniform_real_distribution so that
/// streams are reproducible independent of the standard library build.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Integer in [0, n) consuming exactly one generator draw.
inline int uniform_below(std::mt19937_64& rng, int n) {
  return static_cast<int>((static_cast<unsigned __int128>(rng()) *
                           static_cast<unsigned __int128>(n)) >> 64);
}

/// Stationary distribution of a row-stochastic matrix with a single
/// recurrent class: solves pi P = pi, sum(pi) = 1 by dense LU after
/// replacing the last balance equation with the normalization row.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Q-state Markov fading channel. `transition(i, j)` is the probability of
/// moving from state i to state j between slots, and `power(i)` is the
/// number of power units a transmission costs while the channel sits in
/// state i. States are 0-based in code; configs use 1-based labels.
///
/// The model is validated at construction (row-stochastic within 1e-9,
/// irreducible, nonnegative finite power) and immutable afterwards, so it is
/// safe to share across threads. Sampling needs an exclusive rng per
/// trajectory.
class ChannelModel {
 public:
  ChannelModel(Eigen::MatrixXd transition, Eigen::VectorXd power);

  /// Convenience constructor with the default power profile omega(q) = q
  /// (1-based), i.e. worse channel states cost more.
  static ChannelModel with_default_power(Eigen::MatrixXd transition);

  int num_states() const { return static_cast<int>(transition_.rows()); }
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& power() const { return power_; }

  /// Re-runs the construction checks. Throws NegativeEntry, NotStochastic
  /// or NotErgodic.
  void validate() const;

  /// Stationary channel-state distribution eta with eta P = eta. Throws
  /// SingularSystem on numerical failure (unreachable for validated models).
  Eigen::VectorXd steady_state() const;

  /// Samples the successor of state q, consuming one rng draw.
  int sample_next(int q, std::mt19937_64& rng) const;

 private:
  Eigen::MatrixXd transition_;
  Eigen::VectorXd power_;
  Eigen::MatrixXd cumulative_;  // row-wise cumulative transition sums
};

}  // namespace aoi
