#pragma once

#include <span>
#include <vector>

namespace nashpricing {

// Per-agent action distributions for one state, stored row-major
// (n_agents x n_actions).
class JointPolicy {
 public:
  JointPolicy() = default;
  JointPolicy(int n_agents, int n_actions, std::vector<double> probabilities);

  static JointPolicy uniform(int n_agents, int n_actions);
  // Each agent puts all mass on actions[n].
  static JointPolicy pure(int n_actions, std::span<const int> actions);

  int n_agents() const { return n_agents_; }
  int n_actions() const { return n_actions_; }
  double operator()(int agent, int action) const {
    return probabilities_[agent * n_actions_ + action];
  }
  std::span<const double> row(int agent) const {
    return {probabilities_.data() + agent * n_actions_,
            static_cast<std::size_t>(n_actions_)};
  }
  std::span<double> mutable_row(int agent) {
    return {probabilities_.data() + agent * n_actions_,
            static_cast<std::size_t>(n_actions_)};
  }
  const std::vector<double>& flat() const { return probabilities_; }

  // Largest |row sum − 1| over agents; negative entries count as violations.
  double simplex_error() const;
  bool is_valid(double tolerance = 1e-9) const;
  // Copy with agent's row replaced.
  JointPolicy with_row(int agent, std::span<const double> row) const;

 private:
  int n_agents_ = 0;
  int n_actions_ = 0;
  std::vector<double> probabilities_;
};

}  // namespace nashpricing
