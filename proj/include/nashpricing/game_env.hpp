#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nashpricing/joint_policy.hpp"
#include "nashpricing/market_model.hpp"
#include "nashpricing/random.hpp"

namespace nashpricing {

enum class RewardMode { kExpected, kSampled };

struct GameConfig {
  int max_steps = 30;
  double noise_sigma = 0.25;  // reference-price noise, price units
  RewardMode reward_mode = RewardMode::kExpected;
};

// The state is the reference price, which lives on the same axis as the
// agents' prices.
struct GameState {
  int state_index = 0;
  double reference_price = 0.0;
  int step = 0;
};

struct JointAction {
  std::vector<int> action_indices;
  std::vector<double> prices;

  static JointAction from_indices(const MarketParams& params,
                                  std::vector<int> indices);
};

struct Experience {
  GameState state;
  JointAction joint_action;
  std::vector<double> rewards;
  double delta_s = 0.0;
  JointPolicy policy;
  GameState next_state;
};

struct StepResult {
  GameState next;
  std::vector<double> rewards;
  bool done = false;
};

// Nearest grid index; an exact midpoint goes to the lower index.
int snap_to_grid(const std::vector<double>& grid, double price);

GameState make_state(const MarketParams& params, int state_index, int step = 0);

GameState reset(const MarketParams& params, Rng& rng);
GameState reset(const MarketParams& params, std::uint64_t seed);

// Next reference price: mean joint price plus N(0, σ²), snapped to the grid.
GameState transition(const MarketParams& params, const GameState& state,
                     const JointAction& action, double noise_sigma, Rng& rng);

std::vector<double> joint_rewards(const MarketParams& params,
                                  const GameState& state,
                                  const JointAction& action, RewardMode mode,
                                  Rng& rng);

// Throws std::logic_error when the episode already ended.
StepResult step(const MarketParams& params, const GameConfig& config,
                const GameState& state, const JointAction& action, Rng& rng);

// Single-owner episodic environment.
class PricingGame {
 public:
  PricingGame(MarketParams params, GameConfig config, std::uint64_t seed);

  const GameState& reset();
  StepResult step(const JointAction& action);

  const GameState& state() const { return state_; }
  bool done() const { return state_.step >= config_.max_steps; }
  const MarketParams& params() const { return params_; }
  const GameConfig& config() const { return config_; }

 private:
  MarketParams params_;
  GameConfig config_;
  Rng rng_;
  GameState state_;
};

// episode,step,state_index,action_0..,reward_0..,next_state_index
class EpisodeTrace {
 public:
  explicit EpisodeTrace(int n_agents) : n_agents_(n_agents) {}
  void record(int episode, const GameState& state, const JointAction& action,
              const std::vector<double>& rewards, const GameState& next);
  std::string to_csv() const;
  std::size_t size() const { return rows_.size(); }

 private:
  struct Row {
    int episode;
    int step;
    int state_index;
    std::vector<int> actions;
    std::vector<double> rewards;
    int next_state_index;
  };
  int n_agents_;
  std::vector<Row> rows_;
};

}  // namespace nashpricing
