#include "aoisched/channel.hpp"

#include <cmath>
#include <vector>

namespace aoi {

namespace {

constexpr double kRowSumTol = 1e-9;

// Reachability over the directed graph of nonzero transition entries.
std::vector<bool> reachable_from(const Eigen::MatrixXd& p, int start, bool transpose) {
  const int n = static_cast<int>(p.rows());
  std::vector<bool> seen(n, false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      double w = transpose ? p(v, u) : p(u, v);
      if (w > 0.0 && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  const int n = static_cast<int>(transition.rows());
  // (P^T - I) pi = 0 with the last equation swapped for sum(pi) = 1.
  Eigen::MatrixXd a = transition.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw SingularSystem("stationary distribution system is singular");
  }
  Eigen::VectorXd pi = lu.solve(b);
  // Drop LU round-off below zero and re-normalize.
  pi = pi.cwiseMax(0.0);
  double total = pi.sum();
  if (!(total > 0.0) || !pi.allFinite()) {
    throw SingularSystem("stationary distribution solve produced no mass");
  }
  return pi / total;
}

ChannelModel::ChannelModel(Eigen::MatrixXd transition, Eigen::VectorXd power)
    : transition_(std::move(transition)), power_(std::move(power)) {
  if (transition_.rows() == 0 || transition_.rows() != transition_.cols()) {
    throw DimensionMismatch("transition matrix must be square and non-empty");
  }
  if (power_.size() != transition_.rows()) {
    throw DimensionMismatch("power vector length must equal the number of channel states");
  }
  validate();
  cumulative_.resize(transition_.rows(), transition_.cols());
  for (int q = 0; q < num_states(); ++q) {
    double acc = 0.0;
    for (int j = 0; j < num_states(); ++j) {
      acc += transition_(q, j);
      cumulative_(q, j) = acc;
    }
  }
}

ChannelModel ChannelModel::with_default_power(Eigen::MatrixXd transition) {
  Eigen::VectorXd omega = Eigen::VectorXd::LinSpaced(transition.rows(), 1.0,
                                                     static_cast<double>(transition.rows()));
  return ChannelModel(std::move(transition), std::move(omega));
}

void ChannelModel::validate() const {
  const int n = num_states();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double p = transition_(i, j);
      if (!std::isfinite(p) || p < 0.0) {
        throw NegativeEntry("transition(" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") = " + std::to_string(p));
      }
      if (p > 1.0 + kRowSumTol) {
        throw NotStochastic("transition(" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") exceeds 1");
      }
    }
    double s = transition_.row(i).sum();
    if (std::abs(s - 1.0) > kRowSumTol) {
      throw NotStochastic("row " + std::to_string(i + 1) + " sums to " + std::to_string(s));
    }
  }
  for (int q = 0; q < n; ++q) {
    double w = power_(q);
    if (!std::isfinite(w) || w < 0.0) {
      throw NegativeEntry("power(" + std::to_string(q + 1) + ") = " + std::to_string(w));
    }
  }
  // Irreducible iff state 0 reaches everything and everything reaches it.
  auto fwd = reachable_from(transition_, 0, false);
  auto bwd = reachable_from(transition_, 0, true);
  for (int q = 0; q < n; ++q) {
    if (!fwd[q] || !bwd[q]) {
      throw NotErgodic("chain is reducible: state " + std::to_string(q + 1) +
                       " does not communicate with state 1");
    }
  }
}

Eigen::VectorXd ChannelModel::steady_state() const {
  Eigen::VectorXd eta = stationary_distribution(transition_);
  for (int q = 0; q < num_states(); ++q) {
    if (!(eta(q) > 0.0)) {
      throw SingularSystem("steady state has a non-positive entry for state " +
                           std::to_string(q + 1));
    }
  }
  return eta;
}

int ChannelModel::sample_next(int q, std::mt19937_64& rng) const {
  if (q < 0 || q >= num_states()) {
    throw IndexOutOfRange("channel state " + std::to_string(q) + " outside [0, " +
                          std::to_string(num_states()) + ")");
  }
  double u = uniform01(rng);
  for (int j = 0; j < num_states() - 1; ++j) {
    if (u < cumulative_(q, j)) return j;
  }
  return num_states() - 1;
}

}  // namespace aoi
