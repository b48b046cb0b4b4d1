#include "nashpricing/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "nashpricing/random.hpp"

namespace nashpricing {

void MarketParams::validate() const {
  if (!(beta0 >= 0.0)) throw std::invalid_argument("beta0 must be >= 0");
  if (!(beta1 < 0.0)) throw std::invalid_argument("beta1 must be < 0");
  if (!(beta2 <= 0.0)) throw std::invalid_argument("beta2 must be <= 0");
  if (!(a >= 0.0)) throw std::invalid_argument("a must be >= 0");
  if (b != 1.0) throw std::invalid_argument("b must equal 1");
  if (n_agents < 2) throw std::invalid_argument("n_agents must be >= 2");
  if (price_grid.empty()) throw std::invalid_argument("price_grid is empty");
  for (std::size_t i = 0; i < price_grid.size(); ++i) {
    if (!(price_grid[i] > 0.0))
      throw std::invalid_argument("price_grid entries must be > 0");
    if (i > 0 && !(price_grid[i] > price_grid[i - 1]))
      throw std::invalid_argument("price_grid must be strictly increasing");
  }
}

void to_json(nlohmann::json& j, const MarketParams& p) {
  j = nlohmann::json{{"beta0", p.beta0}, {"beta1", p.beta1},
                     {"beta2", p.beta2}, {"a", p.a},
                     {"b", p.b},         {"n_agents", p.n_agents},
                     {"price_grid", p.price_grid}};
}

void from_json(const nlohmann::json& j, MarketParams& p) {
  j.at("beta0").get_to(p.beta0);
  j.at("beta1").get_to(p.beta1);
  j.at("beta2").get_to(p.beta2);
  j.at("a").get_to(p.a);
  p.b = j.value("b", 1.0);
  j.at("n_agents").get_to(p.n_agents);
  j.at("price_grid").get_to(p.price_grid);
  p.validate();
}

std::vector<double> linear_price_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) grid[i] = lo + step * i;
  grid.back() = hi;
  return grid;
}

MarketObservation MarketObservation::from_prices(std::vector<double> prices,
                                                 double reference_price) {
  MarketObservation obs;
  obs.reference_price = reference_price;
  obs.mean_price = std::accumulate(prices.begin(), prices.end(), 0.0) /
                   static_cast<double>(prices.size());
  obs.per_agent_prices = std::move(prices);
  return obs;
}

Demand expected_demand(const MarketParams& params, double mean_price,
                       double reference_price) {
  const double raw = params.beta0 + params.beta1 * mean_price +
                     params.beta2 * (mean_price - reference_price);
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

double purchase_elasticity(const MarketParams& params, double price) {
  if (!(price > 0.0))
    throw std::invalid_argument("purchase elasticity needs price > 0, got " +
                                std::to_string(price));
  if (params.a == 0.0) return params.b;
  if (price < params.b / params.a) return params.b - params.a * price;
  return 0.0;
}

std::vector<double> win_probabilities(const MarketParams& params,
                                      std::span<const double> prices) {
  std::vector<double> weights(prices.size());
  double peak = 0.0;
  for (std::size_t i = 0; i < prices.size(); ++i) {
    weights[i] = purchase_elasticity(params, prices[i]);
    peak = i == 0 ? weights[i] : std::max(peak, weights[i]);
  }
  double total = 0.0;
  for (double& w : weights) {
    w = std::exp(w - peak);
    total += w;
  }
  for (double& w : weights) w /= total;
  return weights;
}

double expected_profit(const MarketParams& params, int agent,
                       const MarketObservation& obs) {
  if (agent < 0 || agent >= static_cast<int>(obs.per_agent_prices.size()))
    throw std::out_of_range("agent index " + std::to_string(agent) +
                            " out of range");
  const auto share = win_probabilities(params, obs.per_agent_prices);
  const double demand =
      expected_demand(params, obs.mean_price, obs.reference_price).value;
  return share[agent] * obs.per_agent_prices[agent] * demand;
}

std::vector<double> expected_profits(const MarketParams& params,
                                     const MarketObservation& obs) {
  const auto share = win_probabilities(params, obs.per_agent_prices);
  const double demand =
      expected_demand(params, obs.mean_price, obs.reference_price).value;
  std::vector<double> profits(share.size());
  for (std::size_t n = 0; n < share.size(); ++n)
    profits[n] = share[n] * obs.per_agent_prices[n] * demand;
  return profits;
}

std::vector<std::int64_t> realized_sales(const MarketParams& params,
                                         const MarketObservation& obs,
                                         Rng& rng) {
  const auto share = win_probabilities(params, obs.per_agent_prices);
  const double demand =
      expected_demand(params, obs.mean_price, obs.reference_price).value;
  std::vector<std::int64_t> sales(share.size(), 0);
  const std::int64_t customers = rng.poisson(demand);
  for (std::int64_t c = 0; c < customers; ++c) {
    double u = rng.uniform();
    std::size_t pick = share.size() - 1;
    for (std::size_t n = 0; n < share.size(); ++n) {
      if (u < share[n]) {
        pick = n;
        break;
      }
      u -= share[n];
    }
    ++sales[pick];
  }
  return sales;
}

std::vector<std::int64_t> realized_sales(const MarketParams& params,
                                         const MarketObservation& obs,
                                         std::uint64_t seed) {
  Rng rng(seed);
  return realized_sales(params, obs, rng);
}

}  // namespace nashpricing
