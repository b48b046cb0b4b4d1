#pragma once

#include <vector>

#include "nashpricing/nash_q.hpp"

namespace nashpricing {

// A finite Markov game given by explicit tables, indexed by the joint action
// order of JointActionSpace (last agent fastest).
struct MatrixGame {
  int n_states = 0;
  int n_agents = 0;
  int n_actions = 0;
  // rewards[s][k][n]
  std::vector<std::vector<std::vector<double>>> rewards;
  // transition[s][k][s']
  std::vector<std::vector<std::vector<double>>> transition;
};

// Two states, two agents, two actions. Mutual action 0 earns more and tends
// to lead to the richer state 1, but action 1 is a best response to either
// opponent action.
MatrixGame desk_game();

// Q tables from evaluating `reference` (per state) exactly: solve
// V = r_π + γ P_π V, then Q = r + γ P V.
std::vector<StateQValues> evaluate_q(const MatrixGame& game,
                                     const JointActionSpace& space,
                                     const std::vector<JointPolicy>& reference,
                                     double gamma, Scalarization mode);

struct DeltaBoundCheck {
  int comparisons = 0;
  double max_gain = 0.0;
  double max_delta = 0.0;
  double worst_excess = 0.0;  // max over checks of gain − max_s δ_s
  bool pass = false;
};

// For every base joint policy on a grid of `points` simplex points per agent,
// compares every enumerated unilateral deviation gain against max_s δ_s from
// exhaustive estimation. Two actions per agent only.
DeltaBoundCheck check_delta_bound(const MatrixGame& game, double gamma,
                                  double tolerance = 1e-6, int points = 11);

}  // namespace nashpricing
