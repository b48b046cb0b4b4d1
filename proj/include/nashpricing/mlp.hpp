#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nashpricing/joint_policy.hpp"

namespace nashpricing {

enum class NetRole { kQ, kPsi, kGamma };
enum class OutputHead { kLinear, kPerAgentSoftmax };

std::string to_string(NetRole role);

// Fully connected network, ReLU on hidden layers. The softmax head splits
// the output into `softmax_blocks` equal rows, each normalized separately.
// Batches are column-major: one sample per column.
class MlpNet {
 public:
  MlpNet() = default;
  // All parameters start at zero; call initialize() for a random start.
  MlpNet(std::vector<int> layer_sizes, OutputHead head, NetRole role,
         int softmax_blocks = 1);

  // Weights uniform in ±1/sqrt(fan_in), biases zero.
  void initialize(std::uint64_t seed);

  Eigen::VectorXd forward(std::span<const double> input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  // Mean over samples and outputs of the squared error.
  double loss(const Eigen::MatrixXd& inputs,
              const Eigen::MatrixXd& targets) const;
  // Loss and its gradient, flattened in parameter order.
  double loss_and_gradient(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& targets,
                           std::vector<double>* gradient) const;
  // One plain gradient-descent step. Returns the loss before the step and
  // throws std::runtime_error on a non-finite loss or parameter.
  double train_batch(const Eigen::MatrixXd& inputs,
                     const Eigen::MatrixXd& targets, double learning_rate);

  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);
  std::size_t parameter_count() const;

  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  int input_size() const { return layer_sizes_.front(); }
  int output_size() const { return layer_sizes_.back(); }
  OutputHead head() const { return head_; }
  NetRole role() const { return role_; }
  int softmax_blocks() const { return softmax_blocks_; }

  // Binary checkpoint: header, layer shapes, row-major parameters.
  void save(const std::filesystem::path& path) const;
  static MlpNet load(const std::filesystem::path& path);

 private:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, hidden..., output
  };
  Eigen::MatrixXd run(const Eigen::MatrixXd& inputs, Cache* cache) const;
  void apply_head(Eigen::MatrixXd& logits) const;

  std::vector<int> layer_sizes_;
  OutputHead head_ = OutputHead::kLinear;
  NetRole role_ = NetRole::kQ;
  int softmax_blocks_ = 1;
  std::vector<Eigen::MatrixXd> weights_;  // (out x in)
  std::vector<Eigen::VectorXd> biases_;
};

// Input encodings.
void encode_one_hot(int index, int size, std::span<double> out);
std::vector<double> encode_state(int state_index, int n_states);
// State one-hot followed by one one-hot per agent.
std::vector<double> encode_state_action(int state_index, int n_states,
                                        std::span<const int> actions,
                                        int n_actions);
// State one-hot followed by the flattened per-agent simplexes.
std::vector<double> encode_state_policy(int state_index, int n_states,
                                        const JointPolicy& policy);
JointPolicy decode_policy(const Eigen::VectorXd& output, int n_agents,
                          int n_actions);

}  // namespace nashpricing
