#pragma once

#include <string>
#include <vector>

#include "nashpricing/market_model.hpp"

namespace nashpricing {

struct Scenario {
  std::string name;
  MarketParams params;
  double noise_sigma = 0.25;
  double epsilon_threshold = 1e-4;
};

constexpr double kPriceLow = 1.0;
constexpr double kPriceHigh = 10.0;

// Accepts "1".."4" or "scenario1".."scenario4". n_agents and action_dims
// override the catalog defaults (3 agents, 10 prices on [1, 10]).
Scenario find_scenario(const std::string& name, int n_agents = 3,
                       int action_dims = 10);
std::vector<std::string> scenario_names();

}  // namespace nashpricing
