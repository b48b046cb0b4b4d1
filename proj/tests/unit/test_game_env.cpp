#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <numeric>

#include "nashpricing/game_env.hpp"
#include "nashpricing/scenarios.hpp"

using namespace nashpricing;

namespace {

MarketParams params3() { return find_scenario("2", 3).params; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("reset") {
  const MarketParams p = params3();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const GameState a = reset(p, seed);
    const GameState b = reset(p, seed);
    CHECK(a.state_index == b.state_index);
    CHECK(a.step == 0);
    CHECK(a.reference_price == p.price_grid[a.state_index]);
  }
  // χ² goodness of fit against uniform, 9 degrees of freedom: p > 0.01
  // corresponds to a statistic below 21.67.
  Rng rng(17);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 10000; ++i) ++counts[reset(p, rng).state_index];
  double chi2 = 0;
  for (int c : counts) chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi2 < 21.67);
}

TEST_CASE("transition without noise") {
  const MarketParams p = params3();
  Rng rng(1);
  const GameState s = make_state(p, 2, 4);
  const auto a = JointAction::from_indices(p, {3, 5, 7});
  const GameState next = transition(p, s, a, 0.0, rng);
  CHECK(next.reference_price == 6.0);
  CHECK(next.step == 5);
  const auto low = JointAction::from_indices(p, {0, 0, 0});
  CHECK(transition(p, s, low, 0.0, rng).state_index == 0);
}

TEST_CASE("grid snapping is total and ties go low") {
  const std::vector<double> grid = {1, 2, 3, 4};
  CHECK(snap_to_grid(grid, 2.5) == 1);
  CHECK(snap_to_grid(grid, 2.5000001) == 2);
  CHECK(snap_to_grid(grid, -100) == 0);
  CHECK(snap_to_grid(grid, 100) == 3);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-50, 50);
    const int k = snap_to_grid(grid, x);
    CHECK(k >= 0);
    CHECK(k < 4);
    for (double g : grid) CHECK(std::abs(grid[k] - x) <= std::abs(g - x));
  }
}

TEST_CASE("noisy transition matches the Gaussian-then-snap distribution") {
  const MarketParams p = params3();
  const auto a = JointAction::from_indices(p, {3, 4, 6});  // mean 5.333…
  const double mean = (4 + 5 + 7) / 3.0;
  for (double sigma : {0.25, 1.0}) {
    Rng rng(21);
    std::vector<double> freq(10, 0.0);
    const int draws = 10000;
    for (int i = 0; i < draws; ++i)
      freq[transition(p, make_state(p, 0), a, sigma, rng).state_index] += 1.0 / draws;
    double tv = 0;
    for (int k = 0; k < 10; ++k) {
      const double lo = k == 0 ? -INFINITY : p.price_grid[k] - 0.5;
      const double hi = k == 9 ? INFINITY : p.price_grid[k] + 0.5;
      const double expect = normal_cdf((hi - mean) / sigma) - normal_cdf((lo - mean) / sigma);
      tv += 0.5 * std::abs(expect - freq[k]);
    }
    CHECK(tv <= 0.02);
  }
}

TEST_CASE("next state depends only on the joint action") {
  const MarketParams p = params3();
  const auto a = JointAction::from_indices(p, {1, 8, 4});
  Rng r1(5), r2(5);
  for (int i = 0; i < 500; ++i) {
    const GameState x = transition(p, make_state(p, 0, 3), a, 0.8, r1);
    const GameState y = transition(p, make_state(p, 9, 3), a, 0.8, r2);
    CHECK(x.state_index == y.state_index);
  }
}

TEST_CASE("step rewards and termination") {
  const MarketParams p = params3();
  GameConfig cfg;
  Rng rng(2);
  GameState s = make_state(p, 4);  // reference price 5
  const auto sym = JointAction::from_indices(p, {4, 4, 4});
  const StepResult r = step(p, cfg, s, sym, rng);
  for (double v : r.rewards) CHECK(v == doctest::Approx(5 * 9.75 / 3).epsilon(1e-12));
  CHECK_FALSE(r.done);

  s.step = 29;
  CHECK(step(p, cfg, s, sym, rng).done);
  s.step = 30;
  CHECK_THROWS_AS(step(p, cfg, s, sym, rng), std::logic_error);

  PricingGame game(p, cfg, 3);
  CHECK_THROWS_AS(game.step(sym), std::logic_error);
  game.reset();
  int steps = 0;
  while (!game.done()) {
    const StepResult sr = game.step(sym);
    ++steps;
    CHECK(sr.done == (steps == 30));
  }
  CHECK(steps == 30);
}

TEST_CASE("rewards are permutation-equivariant") {
  const MarketParams p = params3();
  Rng rng(4);
  const GameState s = make_state(p, 5);
  const auto r = joint_rewards(p, s, JointAction::from_indices(p, {1, 5, 8}),
                               RewardMode::kExpected, rng);
  const auto q = joint_rewards(p, s, JointAction::from_indices(p, {8, 1, 5}),
                               RewardMode::kExpected, rng);
  CHECK(q[0] == doctest::Approx(r[2]).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(r[0]).epsilon(1e-14));
  CHECK(q[2] == doctest::Approx(r[1]).epsilon(1e-14));
}

TEST_CASE("sampled rewards average to expected rewards") {
  const MarketParams p = params3();
  const GameState s = make_state(p, 3);
  const auto a = JointAction::from_indices(p, {2, 3, 5});
  Rng rng(8);
  const auto expected = joint_rewards(p, s, a, RewardMode::kExpected, rng);
  const int draws = 10000;
  std::vector<double> sum(3, 0), sq(3, 0);
  for (int i = 0; i < draws; ++i) {
    const auto r = joint_rewards(p, s, a, RewardMode::kSampled, rng);
    for (int n = 0; n < 3; ++n) {
      sum[n] += r[n];
      sq[n] += r[n] * r[n];
    }
  }
  for (int n = 0; n < 3; ++n) {
    const double mean = sum[n] / draws;
    const double se = std::sqrt((sq[n] / draws - mean * mean) / draws);
    CHECK(std::abs(mean - expected[n]) <= 3 * se);
  }
}

TEST_CASE("joint policy") {
  const JointPolicy u = JointPolicy::uniform(3, 4);
  CHECK(u.is_valid());
  CHECK(u(2, 3) == 0.25);
  const std::vector<int> acts = {0, 3};
  const JointPolicy pure = JointPolicy::pure(4, acts);
  CHECK(pure(0, 0) == 1.0);
  CHECK(pure(1, 3) == 1.0);
  CHECK(pure(1, 0) == 0.0);
  const std::vector<double> bad_row = {0.5, 0.6, 0, 0};
  CHECK_FALSE(u.with_row(1, bad_row).is_valid());
  const std::vector<double> neg_row = {1.5, -0.5, 0, 0};
  CHECK_FALSE(u.with_row(1, neg_row).is_valid());
  CHECK_THROWS(JointPolicy(2, 3, {0.1, 0.2}));
}

TEST_CASE("episode trace csv") {
  const MarketParams p = params3();
  EpisodeTrace trace(3);
  Rng rng(1);
  const GameState s = make_state(p, 1);
  const auto a = JointAction::from_indices(p, {0, 1, 2});
  const StepResult r = step(p, GameConfig{}, s, a, rng);
  trace.record(0, s, a, r.rewards, r.next);
  const std::string csv = trace.to_csv();
  CHECK(csv.rfind("episode,step,state_index,action_0,action_1,action_2,"
                  "reward_0,reward_1,reward_2,next_state_index\n", 0) == 0);
  CHECK(trace.size() == 1);
}
