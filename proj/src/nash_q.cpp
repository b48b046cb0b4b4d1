#include "nashpricing/nash_q.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "nashpricing/io.hpp"

namespace nashpricing {

JointActionSpace::JointActionSpace(int n_agents, int n_actions, std::size_t cap,
                                   std::uint64_t seed)
    : n_agents_(n_agents), n_actions_(n_actions) {
  if (n_agents < 1 || n_actions < 1 || cap < 1)
    throw std::invalid_argument("joint action space needs positive sizes");
  double total = std::pow(static_cast<double>(n_actions), n_agents);
  exhaustive_ = total <= static_cast<double>(cap);
  if (exhaustive_) {
    size_ = static_cast<std::size_t>(total);
    actions_.resize(size_ * n_agents_);
    for (std::size_t k = 0; k < size_; ++k) {
      std::size_t rest = k;
      // Last agent varies fastest.
      for (int n = n_agents_ - 1; n >= 0; --n) {
        actions_[k * n_agents_ + n] = static_cast<int>(rest % n_actions_);
        rest /= n_actions_;
      }
    }
  } else {
    size_ = cap;
    actions_.resize(size_ * n_agents_);
    Rng rng(seed);
    for (auto& a : actions_) a = static_cast<int>(rng.uniform_int(n_actions_));
  }
}

double scalarize(std::span<const double> q, Scalarization mode) {
  if (mode == Scalarization::kMax) return *std::max_element(q.begin(), q.end());
  return std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
}

StateQValues evaluate_state(const MlpNet& qnet, const JointActionSpace& space,
                            int state_index, int n_states, Scalarization mode) {
  const int in = n_states + space.n_agents() * space.n_actions();
  Eigen::MatrixXd inputs = Eigen::MatrixXd::Zero(in, space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    inputs(state_index, k) = 1.0;
    const auto a = space.action(k);
    for (int n = 0; n < space.n_agents(); ++n)
      inputs(n_states + n * space.n_actions() + a[n], k) = 1.0;
  }
  StateQValues q;
  q.values = qnet.forward_batch(inputs);
  q.scalar.resize(space.size());
  for (std::size_t k = 0; k < space.size(); ++k) {
    const Eigen::VectorXd col = q.values.col(k);
    q.scalar[k] = scalarize({col.data(), static_cast<std::size_t>(col.size())}, mode);
  }
  return q;
}

const StateQValues& QValueCache::get(const MlpNet& qnet, int state_index) {
  auto it = tables_.find(state_index);
  if (it == tables_.end())
    it = tables_
             .emplace(state_index,
                      evaluate_state(qnet, *space_, state_index, n_states_, mode_))
             .first;
  return it->second;
}

namespace {

double joint_probability(const JointActionSpace& space,
                         const JointPolicy& policy, std::size_t k) {
  const auto a = space.action(k);
  double p = 1.0;
  for (int n = 0; n < space.n_agents(); ++n) p *= policy(n, a[n]);
  return p;
}

// Argmax of scalar·probability over joint actions the policy can play. Falls
// back to every joint action when none has positive probability (possible
// only for a sampled space).
PolicyValue best_joint(const std::vector<double>& scalar,
                       const JointActionSpace& space, const JointPolicy& policy) {
  PolicyValue best;
  bool found = false;
  for (int pass = 0; pass < 2 && !found; ++pass) {
    for (std::size_t k = 0; k < space.size(); ++k) {
      const double p = joint_probability(space, policy, k);
      if (pass == 0 && !(p > 0.0)) continue;
      const double v = scalar[k] * p;
      if (!found || v > best.value) {
        best = {v, k, p};
        found = true;
      }
    }
  }
  return best;
}

void check_policy(const JointActionSpace& space, const JointPolicy& policy) {
  if (policy.n_agents() != space.n_agents() ||
      policy.n_actions() != space.n_actions())
    throw std::invalid_argument("policy shape does not match action space");
}

}  // namespace

PolicyValue policy_value(const StateQValues& q, const JointActionSpace& space,
                         const JointPolicy& policy) {
  check_policy(space, policy);
  return best_joint(q.scalar, space, policy);
}

DeltaEstimate estimate_delta(const StateQValues& q,
                             const JointActionSpace& space,
                             const JointPolicy& policy,
                             const DeltaOptions& options) {
  check_policy(space, policy);
  DeltaEstimate est;
  est.base_value = policy_value(q, space, policy).value;
  const int n_actions = space.n_actions();
  double best_gain = -std::numeric_limits<double>::infinity();

  for (std::size_t di = 0; di < options.deviators.size(); ++di) {
    const int n = options.deviators[di];
    if (n < 0 || n >= space.n_agents())
      throw std::out_of_range("deviator index out of range");
    if (options.method == DeltaMethod::kExhaustive) {
      // V is a maximum of functions linear in π′_n, so a vertex attains the
      // best deviation.
      std::vector<double> row(n_actions, 0.0);
      for (int a = 0; a < n_actions; ++a) {
        std::fill(row.begin(), row.end(), 0.0);
        row[a] = 1.0;
        const double gain =
            policy_value(q, space, policy.with_row(n, row)).value - est.base_value;
        if (gain > best_gain) {
          best_gain = gain;
          est.deviator = n;
          est.deviation = row;
        }
      }
      continue;
    }
    const SimplexLayout layout = SimplexLayout::uniform_blocks(1, n_actions);
    auto objective = [&](std::span<const double> row) {
      return policy_value(q, space, policy.with_row(n, row)).value -
             est.base_value;
    };
    const TurboResult r =
        optimize(objective, layout, options.turbo, derive_seed(options.seed, di),
                 OptimizeMode::kMaximize);
    ++est.turbo_calls;
    est.guard_violations += r.guard_violations;
    est.max_block_error = std::max(est.max_block_error, r.max_block_error);
    if (std::isfinite(r.best_value) && r.best_value > best_gain) {
      best_gain = r.best_value;
      est.deviator = n;
      est.deviation = r.best_point;
    }
  }
  est.delta = std::max(0.0, best_gain);
  return est;
}

NashSearchResult find_nash_policy(const StateQValues& q,
                                  const JointActionSpace& space,
                                  const NashSearchOptions& options,
                                  const std::vector<JointPolicy>& warm_starts,
                                  const MlpNet* gamma_net, int state_index,
                                  int n_states) {
  if (options.gamma_selector && !gamma_net)
    throw std::invalid_argument("Γ selector requested without a Γ net");
  const int n_agents = space.n_agents();
  const int n_actions = space.n_actions();
  const SimplexLayout layout = SimplexLayout::uniform_blocks(n_agents, n_actions);

  NashSearchResult result;
  auto measure = [&](const JointPolicy& p) {
    DeltaEstimate d = estimate_delta(q, space, p, options.delta);
    result.guard_violations += d.guard_violations;
    result.max_block_error = std::max(result.max_block_error, d.max_block_error);
    result.turbo_calls += d.turbo_calls;
    return d.delta;
  };
  auto objective = [&](std::span<const double> x) {
    JointPolicy p(n_agents, n_actions, std::vector<double>(x.begin(), x.end()));
    double value;
    if (options.gamma_selector) {
      const auto in = encode_state_policy(state_index, n_states, p);
      value = gamma_net->forward(in)(0);
    } else {
      value = measure(p);
    }
    result.candidates.push_back(p);
    result.candidate_deltas.push_back(value);
    return value;
  };

  std::vector<std::vector<double>> initial;
  initial.push_back(JointPolicy::uniform(n_agents, n_actions).flat());
  for (const auto& w : warm_starts) {
    check_policy(space, w);
    initial.push_back(w.flat());
  }
  const TurboResult r = optimize(objective, layout, options.turbo, options.seed,
                                 OptimizeMode::kMinimize, initial);
  ++result.turbo_calls;
  result.guard_violations += r.guard_violations;
  result.max_block_error = std::max(result.max_block_error, r.max_block_error);
  result.policy = JointPolicy(n_agents, n_actions, r.best_point);
  result.delta = options.gamma_selector ? measure(result.policy) : r.best_value;
  return result;
}

NashOperatorValue nash_operator(const StateQValues& q,
                                const JointActionSpace& space,
                                const JointPolicy& psi_policy) {
  check_policy(space, psi_policy);
  const PolicyValue best = best_joint(q.scalar, space, psi_policy);
  NashOperatorValue out;
  out.argmax = best.argmax;
  out.probability = best.probability;
  out.scalar = best.value;
  out.value.resize(space.n_agents());
  for (int n = 0; n < space.n_agents(); ++n)
    out.value[n] = q.values(n, best.argmax) * best.probability;
  return out;
}

NashOperatorValue nash_operator(const MlpNet& qnet, const MlpNet& psinet,
                                const JointActionSpace& space, int next_state,
                                int n_states, Scalarization mode) {
  const StateQValues q = evaluate_state(qnet, space, next_state, n_states, mode);
  const JointPolicy pi = decode_policy(
      psinet.forward(encode_state(next_state, n_states)), space.n_agents(),
      space.n_actions());
  return nash_operator(q, space, pi);
}

std::vector<double> nash_q_target(std::span<const double> q_current,
                                  std::span<const double> rewards,
                                  std::span<const double> next_value,
                                  bool terminal, double alpha_mix,
                                  double gamma_discount) {
  if (q_current.size() != rewards.size() ||
      (!terminal && next_value.size() != rewards.size()))
    throw std::invalid_argument("target inputs have mismatched lengths");
  std::vector<double> target(rewards.size());
  for (std::size_t n = 0; n < rewards.size(); ++n) {
    target[n] = terminal ? rewards[n]
                         : (1.0 - alpha_mix) * q_current[n] +
                               alpha_mix * (rewards[n] + gamma_discount * next_value[n]);
  }
  return target;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
}

void ReplayBuffer::push(Experience e) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(std::move(e));
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k,
                                                      Rng& rng) const {
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  for (std::size_t i = 0; i < k; ++i)
    std::swap(idx[i], idx[i + rng.uniform_int(idx.size() - i)]);
  idx.resize(k);
  return idx;
}

void TrainConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("train config: ") + what);
  };
  need(episodes >= 1, "episodes must be >= 1");
  need(max_steps >= 1, "max_steps must be >= 1");
  need(batch_update_frequency >= 1, "batch_update_frequency must be >= 1");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(exploration >= 0.0 && exploration <= 1.0, "exploration must be in [0,1]");
  need(discount >= 0.0 && discount <= 1.0, "discount must be in [0,1]");
  need(learning_rate >= 0.0, "learning_rate must be >= 0");
  need(alpha_mix >= 0.0 && alpha_mix <= 1.0, "alpha_mix must be in [0,1]");
  need(action_dims >= 2, "action_dims must be >= 2");
  need(turbo_batch >= 1 && turbo_max_evals >= turbo_batch,
       "turbo_max_evals >= turbo_batch >= 1");
  need(turbo_regions >= 1, "turbo_regions must be >= 1");
  need(turbo_every >= 1, "turbo_every must be >= 1");
  need(hidden_layers >= 0, "hidden_layers must be >= 0");
  need(q_hidden >= 1 && psi_hidden >= 1 && gamma_hidden >= 1,
       "hidden sizes must be >= 1");
  need(replay_capacity >= 1, "replay_capacity must be >= 1");
  need(enumeration_cap >= 1, "enumeration_cap must be >= 1");
  need(noise_sigma >= 0.0, "noise_sigma must be >= 0");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{
      {"episodes", c.episodes},
      {"max_steps", c.max_steps},
      {"batch_update_frequency", c.batch_update_frequency},
      {"batch_size", c.batch_size},
      {"exploration", c.exploration},
      {"discount", c.discount},
      {"learning_rate", c.learning_rate},
      {"alpha_mix", c.alpha_mix},
      {"action_dims", c.action_dims},
      {"turbo_max_evals", c.turbo_max_evals},
      {"turbo_batch", c.turbo_batch},
      {"turbo_regions", c.turbo_regions},
      {"turbo_every", c.turbo_every},
      {"hidden_layers", c.hidden_layers},
      {"q_hidden", c.q_hidden},
      {"psi_hidden", c.psi_hidden},
      {"gamma_hidden", c.gamma_hidden},
      {"replay_capacity", c.replay_capacity},
      {"enumeration_cap", c.enumeration_cap},
      {"scalarization", c.scalarization == Scalarization::kMax ? "max" : "mean"},
      {"delta_method",
       c.delta_method == DeltaMethod::kExhaustive ? "exhaustive" : "turbo"},
      {"gamma_selector", c.gamma_selector},
      {"noise_sigma", c.noise_sigma},
      {"reward_mode", c.reward_mode == RewardMode::kSampled ? "sampled" : "expected"},
  };
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  static const char* known[] = {
      "episodes", "max_steps", "batch_update_frequency", "batch_size",
      "exploration", "discount", "learning_rate", "alpha_mix", "action_dims",
      "turbo_max_evals", "turbo_batch", "turbo_regions", "turbo_every",
      "hidden_layers", "q_hidden", "psi_hidden", "gamma_hidden",
      "replay_capacity", "enumeration_cap", "scalarization", "delta_method",
      "gamma_selector", "noise_sigma", "reward_mode"};
  for (const auto& item : j.items())
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return item.key() == k;
        }) == std::end(known))
      throw std::invalid_argument("unknown config key: " + item.key());
  auto get = [&j](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("episodes", c.episodes);
  get("max_steps", c.max_steps);
  get("batch_update_frequency", c.batch_update_frequency);
  get("batch_size", c.batch_size);
  get("exploration", c.exploration);
  get("discount", c.discount);
  get("learning_rate", c.learning_rate);
  get("alpha_mix", c.alpha_mix);
  get("action_dims", c.action_dims);
  get("turbo_max_evals", c.turbo_max_evals);
  get("turbo_batch", c.turbo_batch);
  get("turbo_regions", c.turbo_regions);
  get("turbo_every", c.turbo_every);
  get("hidden_layers", c.hidden_layers);
  get("q_hidden", c.q_hidden);
  get("psi_hidden", c.psi_hidden);
  get("gamma_hidden", c.gamma_hidden);
  get("replay_capacity", c.replay_capacity);
  get("enumeration_cap", c.enumeration_cap);
  get("gamma_selector", c.gamma_selector);
  get("noise_sigma", c.noise_sigma);
  if (j.contains("scalarization")) {
    const auto s = j.at("scalarization").get<std::string>();
    if (s == "mean") c.scalarization = Scalarization::kMean;
    else if (s == "max") c.scalarization = Scalarization::kMax;
    else throw std::invalid_argument("scalarization must be mean or max");
  }
  if (j.contains("delta_method")) {
    const auto s = j.at("delta_method").get<std::string>();
    if (s == "turbo") c.delta_method = DeltaMethod::kTurbo;
    else if (s == "exhaustive") c.delta_method = DeltaMethod::kExhaustive;
    else throw std::invalid_argument("delta_method must be turbo or exhaustive");
  }
  if (j.contains("reward_mode")) {
    const auto s = j.at("reward_mode").get<std::string>();
    if (s == "expected") c.reward_mode = RewardMode::kExpected;
    else if (s == "sampled") c.reward_mode = RewardMode::kSampled;
    else throw std::invalid_argument("reward_mode must be expected or sampled");
  }
}

std::string TrainReport::rewards_csv() const {
  std::ostringstream out;
  out << "episode,market_mean,agent0_mean\n";
  for (std::size_t e = 0; e < market_mean.size(); ++e)
    out << e << ',' << format_number(market_mean[e]) << ','
        << format_number(agent0_mean[e]) << '\n';
  return out.str();
}

std::string TrainReport::losses_csv() const {
  std::ostringstream out;
  out << "update_index,loss_q,loss_psi,loss_gamma\n";
  for (const auto& l : losses)
    out << l.update_index << ',' << format_number(l.loss_q) << ','
        << format_number(l.loss_psi) << ',' << format_number(l.loss_gamma) << '\n';
  return out.str();
}

namespace {

double tail_mean(const std::vector<double>& v, int k) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = std::min<std::size_t>(std::max(k, 1), v.size());
  return std::accumulate(v.end() - n, v.end(), 0.0) / static_cast<double>(n);
}

int sample_action(std::span<const double> row, double exploration, Rng& rng) {
  const int n = static_cast<int>(row.size());
  if (rng.uniform() < exploration) return static_cast<int>(rng.uniform_int(n));
  const double u = rng.uniform();
  double acc = 0.0;
  for (int a = 0; a < n; ++a) {
    acc += row[a];
    if (u < acc) return a;
  }
  // Rounding left u above the cumulative sum: take the last supported action.
  for (int a = n - 1; a >= 0; --a)
    if (row[a] > 0.0) return a;
  return n - 1;
}

std::vector<int> hidden_stack(int input, int hidden, int layers, int output) {
  std::vector<int> sizes{input};
  for (int l = 0; l < layers; ++l) sizes.push_back(hidden);
  sizes.push_back(output);
  return sizes;
}

TurboOptions turbo_options(const TrainConfig& c) {
  TurboOptions t;
  t.max_evals = c.turbo_max_evals;
  t.batch = c.turbo_batch;
  t.n_regions = c.turbo_regions;
  return t;
}

struct Setup {
  int n_agents;
  int n_states;
  int n_actions;
  GameConfig game;
};

Setup check_setup(const MarketParams& params, const TrainConfig& config) {
  params.validate();
  config.validate();
  if (params.n_prices() != config.action_dims)
    throw std::invalid_argument("price grid length " +
                                std::to_string(params.n_prices()) +
                                " does not match action_dims " +
                                std::to_string(config.action_dims));
  Setup s;
  s.n_agents = params.n_agents;
  s.n_actions = params.n_prices();
  s.n_states = params.n_prices();
  s.game.max_steps = config.max_steps;
  s.game.noise_sigma = config.noise_sigma;
  s.game.reward_mode = config.reward_mode;
  return s;
}

Eigen::MatrixXd columns(const std::vector<std::vector<double>>& cols) {
  Eigen::MatrixXd m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < cols[c].size(); ++r) m(r, c) = cols[c][r];
  return m;
}

// Shared episode loop: `act` picks the joint action and returns the δ and
// policy recorded with the experience; `update` runs a minibatch update.
template <typename Act, typename Update>
TrainReport run_episodes(const MarketParams& params, const TrainConfig& config,
                         const Setup& setup, std::uint64_t seed, Act&& act,
                         Update&& update) {
  const auto start = std::chrono::steady_clock::now();
  TrainReport report;
  PricingGame game(params, setup.game, derive_seed(seed, 5));
  ReplayBuffer replay(config.replay_capacity);
  Rng replay_rng(derive_seed(seed, 7));
  long global_step = 0;
  int update_index = 0;
  try {
    for (int e = 0; e < config.episodes; ++e) {
      GameState state = game.reset();
      double market_sum = 0.0, agent0_sum = 0.0;
      int steps = 0;
      while (!game.done()) {
        double delta_s = 0.0;
        JointPolicy policy;
        const std::vector<int> actions = act(state, global_step, delta_s, policy);
        const JointAction ja = JointAction::from_indices(params, actions);
        const StepResult sr = game.step(ja);
        replay.push({state, ja, sr.rewards, delta_s, policy, sr.next});
        market_sum += std::accumulate(sr.rewards.begin(), sr.rewards.end(), 0.0) /
                      static_cast<double>(sr.rewards.size());
        agent0_sum += sr.rewards[0];
        ++steps;
        ++global_step;
        if (global_step % config.batch_update_frequency == 0 &&
            replay.size() >= static_cast<std::size_t>(config.batch_size)) {
          const auto idx = replay.sample_indices(config.batch_size, replay_rng);
          LossRecord rec = update(replay, idx);
          rec.update_index = update_index++;
          report.losses.push_back(rec);
        }
        state = sr.next;
      }
      report.market_mean.push_back(market_sum / steps);
      report.agent0_mean.push_back(agent0_sum / steps);
      report.episode_steps.push_back(steps);
    }
  } catch (const std::runtime_error& err) {
    report.aborted = true;
    report.error = err.what();
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

double TrainReport::final_market_mean(int k) const { return tail_mean(market_mean, k); }
double TrainReport::final_agent0_mean(int k) const { return tail_mean(agent0_mean, k); }

TrainReport train(const MarketParams& params, const TrainConfig& config,
                  std::uint64_t seed) {
  const Setup setup = check_setup(params, config);
  const int S = setup.n_states, N = setup.n_agents, X = setup.n_actions;
  const int joint_in = S + N * X;

  MlpNet qnet(hidden_stack(joint_in, config.q_hidden, config.hidden_layers, N),
              OutputHead::kLinear, NetRole::kQ);
  MlpNet psinet(hidden_stack(S, config.psi_hidden, config.hidden_layers, N * X),
                OutputHead::kPerAgentSoftmax, NetRole::kPsi, N);
  MlpNet gammanet(hidden_stack(joint_in, config.gamma_hidden, config.hidden_layers, 1),
                  OutputHead::kLinear, NetRole::kGamma);
  qnet.initialize(derive_seed(seed, 1));
  psinet.initialize(derive_seed(seed, 2));
  gammanet.initialize(derive_seed(seed, 3));

  const JointActionSpace space(N, X, config.enumeration_cap, derive_seed(seed, 4));
  QValueCache cache(space, S, config.scalarization);
  Rng act_rng(derive_seed(seed, 6));
  const std::uint64_t turbo_seed = derive_seed(seed, 8);
  std::map<int, JointPolicy> nash_table;
  std::map<int, double> last_delta;

  TrainReport extra;
  auto act = [&](const GameState& state, long step, double& delta_s,
                 JointPolicy& policy) {
    policy = decode_policy(psinet.forward(encode_state(state.state_index, S)), N, X);
    std::vector<int> actions(N);
    for (int n = 0; n < N; ++n)
      actions[n] = sample_action(policy.row(n), config.exploration, act_rng);

    if (step % config.turbo_every == 0) {
      const StateQValues& q = cache.get(qnet, state.state_index);
      DeltaOptions dopt;
      dopt.method = config.delta_method;
      dopt.turbo = turbo_options(config);
      dopt.seed = derive_seed(turbo_seed, 2 * static_cast<std::uint64_t>(step));
      const DeltaEstimate est = estimate_delta(q, space, policy, dopt);

      NashSearchOptions nopt;
      nopt.delta = dopt;
      nopt.delta.seed = derive_seed(turbo_seed, 2 * static_cast<std::uint64_t>(step) + 1);
      nopt.turbo = turbo_options(config);
      nopt.seed = derive_seed(nopt.delta.seed, 0x6e617368);
      nopt.gamma_selector = config.gamma_selector;
      std::vector<JointPolicy> warm;
      if (auto it = nash_table.find(state.state_index); it != nash_table.end())
        warm.push_back(it->second);
      warm.push_back(policy);
      const NashSearchResult found = find_nash_policy(
          q, space, nopt, warm, &gammanet, state.state_index, S);
      nash_table[state.state_index] = found.policy;
      last_delta[state.state_index] = est.delta;

      extra.delta_trace.push_back(est.delta);
      extra.turbo_calls += est.turbo_calls + found.turbo_calls;
      extra.guard_violations += est.guard_violations + found.guard_violations;
      extra.max_block_error = std::max(
          {extra.max_block_error, est.max_block_error, found.max_block_error});
    }
    auto it = last_delta.find(state.state_index);
    delta_s = it == last_delta.end() ? 0.0 : it->second;
    return actions;
  };

  auto update = [&](const ReplayBuffer& replay, const std::vector<std::size_t>& idx) {
    std::vector<std::vector<double>> q_in, q_target, psi_in, psi_target, g_in, g_target;
    for (std::size_t i : idx) {
      const Experience& e = replay[i];
      const int s = e.state.state_index;
      auto in = encode_state_action(s, S, e.joint_action.action_indices, X);
      const Eigen::VectorXd q_now = qnet.forward(in);
      const bool terminal = e.next_state.step >= config.max_steps;
      std::vector<double> next;
      if (!terminal) {
        const int s2 = e.next_state.state_index;
        const JointPolicy pi2 = decode_policy(psinet.forward(encode_state(s2, S)), N, X);
        next = nash_operator(cache.get(qnet, s2), space, pi2).value;
      }
      q_target.push_back(nash_q_target({q_now.data(), static_cast<std::size_t>(N)},
                                       e.rewards, next, terminal, config.alpha_mix,
                                       config.discount));
      q_in.push_back(std::move(in));

      psi_in.push_back(encode_state(s, S));
      auto it = nash_table.find(s);
      psi_target.push_back(it != nash_table.end() ? it->second.flat() : e.policy.flat());

      g_in.push_back(encode_state_policy(s, S, e.policy));
      g_target.push_back({e.delta_s});
    }
    LossRecord rec;
    rec.loss_q = qnet.train_batch(columns(q_in), columns(q_target), config.learning_rate);
    rec.loss_psi =
        psinet.train_batch(columns(psi_in), columns(psi_target), config.learning_rate);
    rec.loss_gamma =
        gammanet.train_batch(columns(g_in), columns(g_target), config.learning_rate);
    cache.invalidate();
    return rec;
  };

  TrainReport report = run_episodes(params, config, setup, seed, act, update);
  report.delta_trace = std::move(extra.delta_trace);
  report.turbo_calls = extra.turbo_calls;
  report.guard_violations = extra.guard_violations;
  report.max_block_error = extra.max_block_error;
  return report;
}

TrainReport train_baseline(const MarketParams& params, const TrainConfig& config,
                           std::uint64_t seed) {
  const Setup setup = check_setup(params, config);
  const int S = setup.n_states, N = setup.n_agents, X = setup.n_actions;

  MlpNet qnet(hidden_stack(S + N * X, config.q_hidden, config.hidden_layers, N),
              OutputHead::kLinear, NetRole::kQ);
  qnet.initialize(derive_seed(seed, 1));
  const JointActionSpace space(N, X, config.enumeration_cap, derive_seed(seed, 4));
  QValueCache cache(space, S, config.scalarization);
  Rng act_rng(derive_seed(seed, 6));

  auto act = [&](const GameState& state, long, double& delta_s,
                 JointPolicy& policy) {
    const StateQValues& q = cache.get(qnet, state.state_index);
    std::vector<int> actions(N);
    for (int n = 0; n < N; ++n) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < space.size(); ++k)
        if (q.values(n, k) > q.values(n, best)) best = k;
      actions[n] = space.action(best)[n];
      if (act_rng.uniform() < config.exploration)
        actions[n] = static_cast<int>(act_rng.uniform_int(X));
    }
    delta_s = 0.0;
    policy = JointPolicy::pure(X, actions);
    return actions;
  };

  auto update = [&](const ReplayBuffer& replay, const std::vector<std::size_t>& idx) {
    std::vector<std::vector<double>> q_in, q_target;
    for (std::size_t i : idx) {
      const Experience& e = replay[i];
      auto in = encode_state_action(e.state.state_index, S,
                                    e.joint_action.action_indices, X);
      const Eigen::VectorXd q_now = qnet.forward(in);
      const bool terminal = e.next_state.step >= config.max_steps;
      std::vector<double> next;
      if (!terminal) {
        const StateQValues& q2 = cache.get(qnet, e.next_state.state_index);
        const auto best = std::max_element(q2.scalar.begin(), q2.scalar.end()) -
                          q2.scalar.begin();
        next.resize(N);
        for (int n = 0; n < N; ++n) next[n] = q2.values(n, best);
      }
      q_target.push_back(nash_q_target({q_now.data(), static_cast<std::size_t>(N)},
                                       e.rewards, next, terminal, config.alpha_mix,
                                       config.discount));
      q_in.push_back(std::move(in));
    }
    LossRecord rec;
    rec.loss_q = qnet.train_batch(columns(q_in), columns(q_target), config.learning_rate);
    rec.loss_psi = std::numeric_limits<double>::quiet_NaN();
    rec.loss_gamma = std::numeric_limits<double>::quiet_NaN();
    cache.invalidate();
    return rec;
  };

  return run_episodes(params, config, setup, seed, act, update);
}

}  // namespace nashpricing
