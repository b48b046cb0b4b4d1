#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nlohmann/json.hpp"

namespace nashpricing {

// Ground-truth demand economy. Agents never see these numbers; they only
// observe rewards.
struct MarketParams {
  double beta0 = 15.0;   // demand intercept
  double beta1 = -1.05;  // own-price slope
  double beta2 = -3.1;   // reference-gap slope
  double a = 0.1;        // elasticity slope
  double b = 1.0;        // maximum elasticity weight
  int n_agents = 3;
  std::vector<double> price_grid = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  // Throws std::invalid_argument when a constraint is violated.
  void validate() const;
  int n_prices() const { return static_cast<int>(price_grid.size()); }
};

void to_json(nlohmann::json& j, const MarketParams& p);
void from_json(const nlohmann::json& j, MarketParams& p);

// Evenly spaced grid of `count` prices on [lo, hi].
std::vector<double> linear_price_grid(double lo, double hi, int count);

struct MarketObservation {
  double reference_price = 0.0;
  double mean_price = 0.0;
  std::vector<double> per_agent_prices;

  // mean_price is the arithmetic mean of `prices`.
  static MarketObservation from_prices(std::vector<double> prices,
                                       double reference_price);
};

struct Demand {
  double value = 0.0;
  bool clamped = false;  // raw linear demand was negative
};

Demand expected_demand(const MarketParams& params, double mean_price,
                       double reference_price);

// φ(x) = b − a·x below the cutoff b/a, zero above it. Rejects price <= 0.
double purchase_elasticity(const MarketParams& params, double price);

// Softmax of the elasticity weights; sums to one.
std::vector<double> win_probabilities(const MarketParams& params,
                                      std::span<const double> prices);

double expected_profit(const MarketParams& params, int agent,
                       const MarketObservation& obs);

std::vector<double> expected_profits(const MarketParams& params,
                                     const MarketObservation& obs);

// Poisson(f(x̃)) customers, each assigned to a seller by the win
// probabilities. Per-agent revenue is sales[n] * price[n].
std::vector<std::int64_t> realized_sales(const MarketParams& params,
                                         const MarketObservation& obs,
                                         std::uint64_t seed);

class Rng;
std::vector<std::int64_t> realized_sales(const MarketParams& params,
                                         const MarketObservation& obs,
                                         Rng& rng);

}  // namespace nashpricing
