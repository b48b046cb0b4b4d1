#include "nashpricing/game_env.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nashpricing/io.hpp"

namespace nashpricing {

JointAction JointAction::from_indices(const MarketParams& params,
                                      std::vector<int> indices) {
  JointAction action;
  action.prices.reserve(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= params.n_prices())
      throw std::out_of_range("action index out of range");
    action.prices.push_back(params.price_grid[idx]);
  }
  action.action_indices = std::move(indices);
  return action;
}

int snap_to_grid(const std::vector<double>& grid, double price) {
  int best = 0;
  double best_distance = std::abs(grid[0] - price);
  for (int i = 1; i < static_cast<int>(grid.size()); ++i) {
    const double distance = std::abs(grid[i] - price);
    if (distance < best_distance) {
      best = i;
      best_distance = distance;
    }
  }
  return best;
}

GameState make_state(const MarketParams& params, int state_index, int step) {
  if (state_index < 0 || state_index >= params.n_prices())
    throw std::out_of_range("state index out of range");
  return {state_index, params.price_grid[state_index], step};
}

GameState reset(const MarketParams& params, Rng& rng) {
  const int index = static_cast<int>(rng.uniform_int(params.n_prices()));
  return make_state(params, index, 0);
}

GameState reset(const MarketParams& params, std::uint64_t seed) {
  Rng rng(seed);
  return reset(params, rng);
}

GameState transition(const MarketParams& params, const GameState& state,
                     const JointAction& action, double noise_sigma, Rng& rng) {
  const double mean =
      std::accumulate(action.prices.begin(), action.prices.end(), 0.0) /
      static_cast<double>(action.prices.size());
  const double noisy = noise_sigma > 0.0 ? rng.normal(mean, noise_sigma) : mean;
  return make_state(params, snap_to_grid(params.price_grid, noisy),
                    state.step + 1);
}

std::vector<double> joint_rewards(const MarketParams& params,
                                  const GameState& state,
                                  const JointAction& action, RewardMode mode,
                                  Rng& rng) {
  const auto obs =
      MarketObservation::from_prices(action.prices, state.reference_price);
  if (mode == RewardMode::kExpected) return expected_profits(params, obs);
  const auto sales = realized_sales(params, obs, rng);
  std::vector<double> rewards(sales.size());
  for (std::size_t n = 0; n < sales.size(); ++n)
    rewards[n] = static_cast<double>(sales[n]) * action.prices[n];
  return rewards;
}

StepResult step(const MarketParams& params, const GameConfig& config,
                const GameState& state, const JointAction& action, Rng& rng) {
  if (state.step >= config.max_steps)
    throw std::logic_error("episode is over; call reset()");
  if (static_cast<int>(action.action_indices.size()) != params.n_agents)
    throw std::invalid_argument("joint action has wrong agent count");
  StepResult result;
  result.rewards = joint_rewards(params, state, action, config.reward_mode, rng);
  result.next = transition(params, state, action, config.noise_sigma, rng);
  result.done = state.step + 1 >= config.max_steps;
  return result;
}

PricingGame::PricingGame(MarketParams params, GameConfig config,
                         std::uint64_t seed)
    : params_(std::move(params)), config_(config), rng_(seed) {
  params_.validate();
  state_.step = config_.max_steps;  // must reset before stepping
}

const GameState& PricingGame::reset() {
  state_ = nashpricing::reset(params_, rng_);
  return state_;
}

StepResult PricingGame::step(const JointAction& action) {
  StepResult result = nashpricing::step(params_, config_, state_, action, rng_);
  state_ = result.next;
  return result;
}

void EpisodeTrace::record(int episode, const GameState& state,
                          const JointAction& action,
                          const std::vector<double>& rewards,
                          const GameState& next) {
  rows_.push_back({episode, state.step, state.state_index,
                   action.action_indices, rewards, next.state_index});
}

std::string EpisodeTrace::to_csv() const {
  std::ostringstream out;
  out << "episode,step,state_index";
  for (int n = 0; n < n_agents_; ++n) out << ",action_" << n;
  for (int n = 0; n < n_agents_; ++n) out << ",reward_" << n;
  out << ",next_state_index\n";
  for (const auto& row : rows_) {
    out << row.episode << ',' << row.step << ',' << row.state_index;
    for (int a : row.actions) out << ',' << a;
    for (double r : row.rewards) out << ',' << format_number(r);
    out << ',' << row.next_state_index << '\n';
  }
  return out.str();
}

}  // namespace nashpricing
