#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nashpricing/game_env.hpp"
#include "nashpricing/joint_policy.hpp"
#include "nashpricing/market_model.hpp"
#include "nashpricing/mlp.hpp"
#include "nashpricing/turbo.hpp"

namespace nashpricing {

enum class Scalarization { kMean, kMax };
enum class DeltaMethod { kTurbo, kExhaustive };

// Joint actions searched by argmax operations: all |X|^N of them when that
// fits under the cap, otherwise `cap` seeded uniform draws.
class JointActionSpace {
 public:
  JointActionSpace(int n_agents, int n_actions, std::size_t cap = 10000,
                   std::uint64_t seed = 0);

  bool exhaustive() const { return exhaustive_; }
  std::size_t size() const { return size_; }
  int n_agents() const { return n_agents_; }
  int n_actions() const { return n_actions_; }
  std::span<const int> action(std::size_t k) const {
    return {actions_.data() + k * n_agents_, static_cast<std::size_t>(n_agents_)};
  }

 private:
  int n_agents_;
  int n_actions_;
  bool exhaustive_ = true;
  std::size_t size_ = 0;
  std::vector<int> actions_;  // size_ x n_agents_
};

// Q outputs for every joint action of a space at one state.
struct StateQValues {
  Eigen::MatrixXd values;       // n_agents x |space|
  std::vector<double> scalar;   // reduced per joint action
};

double scalarize(std::span<const double> q, Scalarization mode);

StateQValues evaluate_state(const MlpNet& qnet, const JointActionSpace& space,
                            int state_index, int n_states, Scalarization mode);

// Per-state tables, valid until the Q net changes.
class QValueCache {
 public:
  QValueCache(const JointActionSpace& space, int n_states, Scalarization mode)
      : space_(&space), n_states_(n_states), mode_(mode) {}
  const StateQValues& get(const MlpNet& qnet, int state_index);
  void invalidate() { tables_.clear(); }

 private:
  const JointActionSpace* space_;
  int n_states_;
  Scalarization mode_;
  std::map<int, StateQValues> tables_;
};

struct PolicyValue {
  double value = 0.0;
  std::size_t argmax = 0;  // index into the joint action space
  double probability = 0.0;
};

// max over joint actions of scalar Q times Π_n π_n(x_n).
PolicyValue policy_value(const StateQValues& q, const JointActionSpace& space,
                         const JointPolicy& policy);

struct DeltaOptions {
  DeltaMethod method = DeltaMethod::kTurbo;
  TurboOptions turbo;
  std::uint64_t seed = 0;
  // Agents allowed to deviate; agents are homogeneous so one suffices.
  std::vector<int> deviators = {0};
};

struct DeltaEstimate {
  double delta = 0.0;
  double base_value = 0.0;
  int deviator = 0;
  std::vector<double> deviation;  // best row found
  int guard_violations = 0;
  double max_block_error = 0.0;
  int turbo_calls = 0;
};

// Largest unilateral gain V(s, π′_n, π_−n) − V(s, π), floored at zero.
DeltaEstimate estimate_delta(const StateQValues& q,
                             const JointActionSpace& space,
                             const JointPolicy& policy,
                             const DeltaOptions& options = {});

struct NashSearchOptions {
  DeltaOptions delta;
  TurboOptions turbo;
  std::uint64_t seed = 0;
  // Rank candidates by the Γ net's prediction instead of measured δ.
  bool gamma_selector = false;
};

struct NashSearchResult {
  JointPolicy policy;
  double delta = 0.0;  // measured δ of the returned policy
  std::vector<JointPolicy> candidates;
  std::vector<double> candidate_deltas;
  int guard_violations = 0;
  double max_block_error = 0.0;
  int turbo_calls = 0;
};

// Minimizes δ over joint policies. The uniform policy is always the first
// candidate, followed by `warm_starts`.
NashSearchResult find_nash_policy(const StateQValues& q,
                                  const JointActionSpace& space,
                                  const NashSearchOptions& options,
                                  const std::vector<JointPolicy>& warm_starts = {},
                                  const MlpNet* gamma_net = nullptr,
                                  int state_index = 0, int n_states = 1);

struct NashOperatorValue {
  std::vector<double> value;  // Q(s′, x̄*) scaled by the joint probability
  double scalar = 0.0;
  double probability = 0.0;
  std::size_t argmax = 0;
};

NashOperatorValue nash_operator(const StateQValues& q,
                                const JointActionSpace& space,
                                const JointPolicy& psi_policy);
NashOperatorValue nash_operator(const MlpNet& qnet, const MlpNet& psinet,
                                const JointActionSpace& space, int next_state,
                                int n_states, Scalarization mode);

// (1−α)Q + α(r + γ·next) componentwise, or r when terminal.
std::vector<double> nash_q_target(std::span<const double> q_current,
                                  std::span<const double> rewards,
                                  std::span<const double> next_value,
                                  bool terminal, double alpha_mix,
                                  double gamma_discount);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void push(Experience e);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Experience& operator[](std::size_t i) const { return items_[i]; }
  // Distinct indices, min(k, size) of them.
  std::vector<std::size_t> sample_indices(std::size_t k, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Experience> items_;
};

struct TrainConfig {
  int episodes = 40;
  int max_steps = 30;
  int batch_update_frequency = 20;
  int batch_size = 10;
  double exploration = 0.05;
  double discount = 0.9;
  double learning_rate = 0.001;
  double alpha_mix = 0.5;
  int action_dims = 10;
  int turbo_max_evals = 10;
  int turbo_batch = 4;
  int turbo_regions = 1;
  int turbo_every = 1;
  int hidden_layers = 3;
  int q_hidden = 75;
  int psi_hidden = 1500;
  int gamma_hidden = 1500;
  std::size_t replay_capacity = 10000;
  std::size_t enumeration_cap = 10000;
  Scalarization scalarization = Scalarization::kMean;
  DeltaMethod delta_method = DeltaMethod::kTurbo;
  bool gamma_selector = false;
  double noise_sigma = 0.25;
  RewardMode reward_mode = RewardMode::kExpected;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct LossRecord {
  int update_index = 0;
  double loss_q = 0.0;
  double loss_psi = 0.0;    // NaN for the baseline
  double loss_gamma = 0.0;  // NaN for the baseline
};

struct TrainReport {
  std::vector<double> market_mean;  // per episode
  std::vector<double> agent0_mean;  // per episode
  std::vector<int> episode_steps;
  std::vector<LossRecord> losses;
  std::vector<double> delta_trace;  // per step where δ was computed
  int turbo_calls = 0;
  int guard_violations = 0;
  double max_block_error = 0.0;
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string error;

  // episode,market_mean,agent0_mean
  std::string rewards_csv() const;
  // update_index,loss_q,loss_psi,loss_gamma
  std::string losses_csv() const;
  // Mean over the last k episodes (fewer if the run is shorter).
  double final_market_mean(int k) const;
  double final_agent0_mean(int k) const;
};

TrainReport train(const MarketParams& params, const TrainConfig& config,
                  std::uint64_t seed);
TrainReport train_baseline(const MarketParams& params, const TrainConfig& config,
                           std::uint64_t seed);

}  // namespace nashpricing
