#include "nashpricing/scenarios.hpp"

#include <stdexcept>

namespace nashpricing {

namespace {

struct Entry {
  const char* name;
  double beta0, beta1, beta2, a;
};

constexpr Entry kCatalog[] = {
    {"scenario1", 25.0, -0.6, -6.1, 0.1},
    {"scenario2", 15.0, -1.05, -3.1, 0.1},
    {"scenario3", 27.0, -1.1, -1.0, 0.1},
    {"scenario4", 27.0, -3.05, -1.1, 0.2},
};

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> names;
  for (const auto& e : kCatalog) names.emplace_back(e.name);
  return names;
}

Scenario find_scenario(const std::string& name, int n_agents, int action_dims) {
  const std::string key =
      name.size() == 1 ? "scenario" + name : name;
  for (const auto& e : kCatalog) {
    if (key != e.name) continue;
    Scenario s;
    s.name = e.name;
    s.params.beta0 = e.beta0;
    s.params.beta1 = e.beta1;
    s.params.beta2 = e.beta2;
    s.params.a = e.a;
    s.params.b = 1.0;
    s.params.n_agents = n_agents;
    s.params.price_grid = linear_price_grid(kPriceLow, kPriceHigh, action_dims);
    s.params.validate();
    return s;
  }
  std::string known;
  for (const auto& n : scenario_names()) known += (known.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown scenario '" + name + "' (known: " + known + ")");
}

}  // namespace nashpricing
