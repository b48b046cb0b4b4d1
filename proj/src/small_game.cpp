#include "nashpricing/small_game.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>

namespace nashpricing {

MatrixGame desk_game() {
  MatrixGame g;
  g.n_states = 2;
  g.n_agents = 2;
  g.n_actions = 2;
  // Agent 0 payoff by (own, other); agent 1 mirrors it.
  const double base[2][2] = {{3.0, 0.0}, {5.0, 1.0}};
  const double scale[2] = {1.0, 2.0};
  g.rewards.assign(2, std::vector<std::vector<double>>(4, std::vector<double>(2)));
  g.transition.assign(2, std::vector<std::vector<double>>(4, std::vector<double>(2)));
  for (int s = 0; s < 2; ++s) {
    for (int a0 = 0; a0 < 2; ++a0) {
      for (int a1 = 0; a1 < 2; ++a1) {
        const int k = a0 * 2 + a1;
        g.rewards[s][k][0] = scale[s] * base[a0][a1];
        g.rewards[s][k][1] = scale[s] * base[a1][a0];
        const double up = (a0 == 0 && a1 == 0) ? 0.8 : (s == 1 ? 0.4 : 0.3);
        g.transition[s][k] = {1.0 - up, up};
      }
    }
  }
  return g;
}

std::vector<StateQValues> evaluate_q(const MatrixGame& game,
                                     const JointActionSpace& space,
                                     const std::vector<JointPolicy>& reference,
                                     double gamma, Scalarization mode) {
  const int S = game.n_states;
  const int K = static_cast<int>(space.size());
  if (!space.exhaustive() || space.n_agents() != game.n_agents ||
      space.n_actions() != game.n_actions)
    throw std::invalid_argument("space does not enumerate the game's joint actions");
  if (static_cast<int>(reference.size()) != S)
    throw std::invalid_argument("need one reference policy per state");

  Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(S, S);
  Eigen::MatrixXd r_pi = Eigen::MatrixXd::Zero(S, game.n_agents);
  for (int s = 0; s < S; ++s) {
    for (int k = 0; k < K; ++k) {
      double prob = 1.0;
      const auto a = space.action(k);
      for (int n = 0; n < game.n_agents; ++n) prob *= reference[s](n, a[n]);
      for (int s2 = 0; s2 < S; ++s2) p_pi(s, s2) += prob * game.transition[s][k][s2];
      for (int n = 0; n < game.n_agents; ++n) r_pi(s, n) += prob * game.rewards[s][k][n];
    }
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(S, S) - gamma * p_pi;
  const Eigen::MatrixXd v = lhs.partialPivLu().solve(r_pi);

  std::vector<StateQValues> out(S);
  for (int s = 0; s < S; ++s) {
    out[s].values.resize(game.n_agents, K);
    out[s].scalar.resize(K);
    for (int k = 0; k < K; ++k) {
      for (int n = 0; n < game.n_agents; ++n) {
        double cont = 0.0;
        for (int s2 = 0; s2 < S; ++s2) cont += game.transition[s][k][s2] * v(s2, n);
        out[s].values(n, k) = game.rewards[s][k][n] + gamma * cont;
      }
      const Eigen::VectorXd col = out[s].values.col(k);
      out[s].scalar[k] =
          scalarize({col.data(), static_cast<std::size_t>(col.size())}, mode);
    }
  }
  return out;
}

DeltaBoundCheck check_delta_bound(const MatrixGame& game, double gamma,
                                  double tolerance, int points) {
  if (game.n_agents != 2 || game.n_actions != 2)
    throw std::invalid_argument("delta bound check expects a 2x2 game");
  const JointActionSpace space(2, 2);
  std::vector<JointPolicy> uniform(game.n_states, JointPolicy::uniform(2, 2));
  const auto q = evaluate_q(game, space, uniform, gamma, Scalarization::kMean);

  DeltaOptions exhaustive;
  exhaustive.method = DeltaMethod::kExhaustive;
  exhaustive.deviators = {0, 1};

  DeltaBoundCheck check;
  check.worst_excess = -1e300;
  auto grid_row = [points](int i) {
    const double p = static_cast<double>(i) / (points - 1);
    return std::vector<double>{p, 1.0 - p};
  };
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      const auto r0 = grid_row(i), r1 = grid_row(j);
      std::vector<double> flat(r0);
      flat.insert(flat.end(), r1.begin(), r1.end());
      const JointPolicy base(2, 2, flat);

      double max_delta = 0.0;
      for (int s = 0; s < game.n_states; ++s)
        max_delta = std::max(max_delta, estimate_delta(q[s], space, base, exhaustive).delta);
      check.max_delta = std::max(check.max_delta, max_delta);

      for (int s = 0; s < game.n_states; ++s) {
        const double v0 = policy_value(q[s], space, base).value;
        for (int n = 0; n < 2; ++n) {
          for (int d = 0; d < points; ++d) {
            const double gain =
                policy_value(q[s], space, base.with_row(n, grid_row(d))).value - v0;
            check.max_gain = std::max(check.max_gain, gain);
            check.worst_excess = std::max(check.worst_excess, gain - max_delta);
            ++check.comparisons;
          }
        }
      }
    }
  }
  check.pass = check.worst_excess <= tolerance;
  return check;
}

}  // namespace nashpricing
