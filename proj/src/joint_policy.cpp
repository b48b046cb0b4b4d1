#include "nashpricing/joint_policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nashpricing {

JointPolicy::JointPolicy(int n_agents, int n_actions,
                         std::vector<double> probabilities)
    : n_agents_(n_agents),
      n_actions_(n_actions),
      probabilities_(std::move(probabilities)) {
  if (n_agents < 1 || n_actions < 1 ||
      probabilities_.size() != static_cast<std::size_t>(n_agents * n_actions))
    throw std::invalid_argument("joint policy shape mismatch");
}

JointPolicy JointPolicy::uniform(int n_agents, int n_actions) {
  return JointPolicy(n_agents, n_actions,
                     std::vector<double>(n_agents * n_actions, 1.0 / n_actions));
}

JointPolicy JointPolicy::pure(int n_actions, std::span<const int> actions) {
  const int n_agents = static_cast<int>(actions.size());
  std::vector<double> probabilities(n_agents * n_actions, 0.0);
  for (int n = 0; n < n_agents; ++n) {
    if (actions[n] < 0 || actions[n] >= n_actions)
      throw std::out_of_range("pure policy action out of range");
    probabilities[n * n_actions + actions[n]] = 1.0;
  }
  return JointPolicy(n_agents, n_actions, std::move(probabilities));
}

double JointPolicy::simplex_error() const {
  double worst = 0.0;
  for (int n = 0; n < n_agents_; ++n) {
    double total = 0.0;
    for (double p : row(n)) {
      if (p < 0.0 || !std::isfinite(p)) return INFINITY;
      total += p;
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

bool JointPolicy::is_valid(double tolerance) const {
  return simplex_error() <= tolerance;
}

JointPolicy JointPolicy::with_row(int agent, std::span<const double> row) const {
  if (row.size() != static_cast<std::size_t>(n_actions_))
    throw std::invalid_argument("row length mismatch");
  JointPolicy copy = *this;
  std::copy(row.begin(), row.end(), copy.mutable_row(agent).begin());
  return copy;
}

}  // namespace nashpricing
