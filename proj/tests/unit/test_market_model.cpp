#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "nashpricing/market_model.hpp"
#include "nashpricing/random.hpp"

using namespace nashpricing;

namespace {

MarketParams scenario_b() {
  MarketParams p;
  p.beta0 = 15;
  p.beta1 = -1.05;
  p.beta2 = -3.1;
  p.a = 0.1;
  p.n_agents = 3;
  return p;
}

}  // namespace

TEST_CASE("demand follows the linear reference-price model") {
  const MarketParams p = scenario_b();
  const Demand d = expected_demand(p, 5, 5);
  CHECK(d.value == doctest::Approx(9.75).epsilon(1e-12));
  CHECK_FALSE(d.clamped);

  CHECK(expected_demand(p, 0, 0).value == p.beta0);

  const Demand neg = expected_demand(p, 10, 1);
  CHECK(neg.value == 0.0);
  CHECK(neg.clamped);
}

TEST_CASE("demand is non-increasing in the mean price") {
  const MarketParams p = scenario_b();
  for (double ref = 1; ref <= 10; ref += 0.5) {
    double prev = expected_demand(p, 0.1, ref).value;
    for (double x = 0.2; x <= 12; x += 0.1) {
      const double cur = expected_demand(p, x, ref).value;
      CHECK(cur <= prev);
      prev = cur;
    }
  }
}

TEST_CASE("elasticity is linear then zero") {
  const MarketParams p = scenario_b();
  CHECK(purchase_elasticity(p, 5) == doctest::Approx(0.5));
  CHECK(purchase_elasticity(p, 12) == 0.0);
  CHECK(purchase_elasticity(p, 1e-12) == doctest::Approx(1.0));
  CHECK_THROWS_AS(purchase_elasticity(p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(purchase_elasticity(p, -1.0), std::invalid_argument);
}

TEST_CASE("win probabilities") {
  MarketParams p = scenario_b();
  const std::vector<double> equal = {4, 4, 4};
  for (double w : win_probabilities(p, equal)) CHECK(w == doctest::Approx(1.0 / 3));

  p.n_agents = 2;
  const std::vector<double> two = {5, 10};
  const auto w = win_probabilities(p, two);
  const double logistic = 1.0 / (1.0 + std::exp(-0.5));
  CHECK(w[0] == doctest::Approx(logistic).epsilon(1e-12));
  CHECK(w[1] == doctest::Approx(1 - logistic).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(0.62246).epsilon(1e-5));

  p.n_agents = 5;
  const std::vector<double> high = {11, 12, 13, 14, 15};
  for (double v : win_probabilities(p, high)) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("win probabilities sum to one and are permutation-equivariant") {
  MarketParams p = scenario_b();
  p.n_agents = 4;
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> prices(4);
    for (double& x : prices) x = rng.uniform(0.01, 20);
    const auto w = win_probabilities(p, prices);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) <= 1e-12);

    std::vector<double> rotated = {prices[2], prices[0], prices[3], prices[1]};
    const auto wr = win_probabilities(p, rotated);
    CHECK(wr[0] == doctest::Approx(w[2]).epsilon(1e-14));
    CHECK(wr[1] == doctest::Approx(w[0]).epsilon(1e-14));
    CHECK(wr[2] == doctest::Approx(w[3]).epsilon(1e-14));
    CHECK(wr[3] == doctest::Approx(w[1]).epsilon(1e-14));
  }
}

TEST_CASE("expected profit") {
  const MarketParams p = scenario_b();
  const auto obs = MarketObservation::from_prices({5, 5, 5}, 5);
  CHECK(obs.mean_price == 5.0);
  for (int n = 0; n < 3; ++n)
    CHECK(expected_profit(p, n, obs) == doctest::Approx(16.25).epsilon(1e-12));

  const auto zero = MarketObservation::from_prices({10, 10, 10}, 1);
  for (double v : expected_profits(p, zero)) CHECK(v == 0.0);

  CHECK_THROWS_AS(expected_profit(p, 3, obs), std::out_of_range);
  CHECK_THROWS_AS(expected_profit(p, -1, obs), std::out_of_range);

  // Independent evaluation of Φ_n·x_n·f for an asymmetric observation.
  const auto mixed = MarketObservation::from_prices({2, 6, 9}, 4);
  const double f = 15 - 1.05 * mixed.mean_price - 3.1 * (mixed.mean_price - 4);
  const double e0 = std::exp(0.8), e1 = std::exp(0.4), e2 = std::exp(0.1);
  CHECK(expected_profit(p, 1, mixed) ==
        doctest::Approx(e1 / (e0 + e1 + e2) * 6 * f).epsilon(1e-12));
}

TEST_CASE("realized sales") {
  const MarketParams p = scenario_b();
  const auto zero = MarketObservation::from_prices({10, 10, 10}, 1);
  for (auto s : realized_sales(p, zero, 3)) CHECK(s == 0);

  const auto obs = MarketObservation::from_prices({3, 5, 7}, 5);
  CHECK(realized_sales(p, obs, 42) == realized_sales(p, obs, 42));

  // Monte Carlo mean of revenue against Φ_n·x_n·f within 3 standard errors.
  Rng rng(5);
  const int draws = 100000;
  std::vector<double> sum(3, 0.0), sum_sq(3, 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto s = realized_sales(p, obs, rng);
    for (int n = 0; n < 3; ++n) {
      const double rev = s[n] * obs.per_agent_prices[n];
      sum[n] += rev;
      sum_sq[n] += rev * rev;
    }
  }
  for (int n = 0; n < 3; ++n) {
    const double mean = sum[n] / draws;
    const double var = sum_sq[n] / draws - mean * mean;
    const double se = std::sqrt(var / draws);
    CHECK(std::abs(mean - expected_profit(p, n, obs)) <= 3 * se);
  }
}

TEST_CASE("poisson sampler matches its mean on both branches") {
  for (double lambda : {0.5, 4.0, 29.0, 45.0}) {
    Rng rng(9);
    const int draws = 100000;
    double sum = 0;
    for (int i = 0; i < draws; ++i) sum += rng.poisson(lambda);
    CHECK(std::abs(sum / draws - lambda) <= 4 * std::sqrt(lambda / draws));
  }
}

TEST_CASE("params validation and json round trip") {
  MarketParams p = scenario_b();
  CHECK_NOTHROW(p.validate());
  nlohmann::json j = p;
  for (const char* key : {"beta0", "beta1", "beta2", "a", "b", "n_agents", "price_grid"})
    CHECK(j.contains(key));
  const auto back = j.get<MarketParams>();
  CHECK(back.beta2 == p.beta2);
  CHECK(back.price_grid == p.price_grid);

  MarketParams bad = p;
  bad.beta1 = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.price_grid = {1, 3, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.n_agents = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.b = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
