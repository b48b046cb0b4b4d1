#include "nashpricing/mlp.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "nashpricing/random.hpp"

namespace nashpricing {

namespace {
constexpr char kMagic[8] = {'N', 'P', 'M', 'L', 'P', '0', '0', '1'};
}

std::string to_string(NetRole role) {
  switch (role) {
    case NetRole::kQ:
      return "Q";
    case NetRole::kPsi:
      return "Psi";
    case NetRole::kGamma:
      return "Gamma";
  }
  return "unknown";
}

MlpNet::MlpNet(std::vector<int> layer_sizes, OutputHead head, NetRole role,
               int softmax_blocks)
    : layer_sizes_(std::move(layer_sizes)),
      head_(head),
      role_(role),
      softmax_blocks_(softmax_blocks) {
  if (layer_sizes_.size() < 2)
    throw std::invalid_argument("network needs input and output layers");
  for (int size : layer_sizes_)
    if (size < 1) throw std::invalid_argument("layer sizes must be positive");
  if (head_ == OutputHead::kPerAgentSoftmax &&
      (softmax_blocks_ < 1 || output_size() % softmax_blocks_ != 0))
    throw std::invalid_argument("output size not divisible into blocks");
  for (std::size_t l = 0; l + 1 < layer_sizes_.size(); ++l) {
    weights_.push_back(
        Eigen::MatrixXd::Zero(layer_sizes_[l + 1], layer_sizes_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(layer_sizes_[l + 1]));
  }
}

void MlpNet::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    const double k = 1.0 / std::sqrt(static_cast<double>(weights_[l].cols()));
    // Row-major fill so the draw order matches the checkpoint order.
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
        weights_[l](r, c) = rng.uniform(-k, k);
    biases_[l].setZero();
  }
}

void MlpNet::apply_head(Eigen::MatrixXd& logits) const {
  if (head_ != OutputHead::kPerAgentSoftmax) return;
  const Eigen::Index block = logits.rows() / softmax_blocks_;
  for (Eigen::Index col = 0; col < logits.cols(); ++col) {
    for (int b = 0; b < softmax_blocks_; ++b) {
      auto seg = logits.col(col).segment(b * block, block);
      const double peak = seg.maxCoeff();
      seg = (seg.array() - peak).exp().matrix();
      seg /= seg.sum();
    }
  }
}

Eigen::MatrixXd MlpNet::run(const Eigen::MatrixXd& inputs, Cache* cache) const {
  if (inputs.rows() != input_size())
    throw std::invalid_argument("input size " + std::to_string(inputs.rows()) +
                                " does not match network input " +
                                std::to_string(input_size()));
  Eigen::MatrixXd current = inputs;
  if (cache) cache->activations.push_back(current);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd next = weights_[l] * current;
    next.colwise() += biases_[l];
    if (l + 1 < weights_.size()) {
      next = next.cwiseMax(0.0);
    } else {
      apply_head(next);
    }
    current = std::move(next);
    if (cache) cache->activations.push_back(current);
  }
  return current;
}

Eigen::VectorXd MlpNet::forward(std::span<const double> input) const {
  Eigen::Map<const Eigen::VectorXd> x(input.data(),
                                      static_cast<Eigen::Index>(input.size()));
  return run(x, nullptr).col(0);
}

Eigen::MatrixXd MlpNet::forward_batch(const Eigen::MatrixXd& inputs) const {
  return run(inputs, nullptr);
}

double MlpNet::loss(const Eigen::MatrixXd& inputs,
                    const Eigen::MatrixXd& targets) const {
  const Eigen::MatrixXd out = run(inputs, nullptr);
  if (out.rows() != targets.rows() || out.cols() != targets.cols())
    throw std::invalid_argument("target shape mismatch");
  return (out - targets).squaredNorm() / static_cast<double>(out.size());
}

double MlpNet::loss_and_gradient(const Eigen::MatrixXd& inputs,
                                 const Eigen::MatrixXd& targets,
                                 std::vector<double>* gradient) const {
  Cache cache;
  const Eigen::MatrixXd out = run(inputs, &cache);
  if (out.rows() != targets.rows() || out.cols() != targets.cols())
    throw std::invalid_argument("target shape mismatch");
  const double scale = 1.0 / static_cast<double>(out.size());
  const Eigen::MatrixXd residual = out - targets;
  const double value = residual.squaredNorm() * scale;
  if (!gradient) return value;

  // dL/d(output)
  Eigen::MatrixXd delta = 2.0 * scale * residual;
  if (head_ == OutputHead::kPerAgentSoftmax) {
    const Eigen::Index block = out.rows() / softmax_blocks_;
    for (Eigen::Index col = 0; col < out.cols(); ++col) {
      for (int b = 0; b < softmax_blocks_; ++b) {
        const auto y = out.col(col).segment(b * block, block);
        auto g = delta.col(col).segment(b * block, block);
        const double dot = g.dot(y);
        g = (y.array() * (g.array() - dot)).matrix();
      }
    }
  }

  std::vector<Eigen::MatrixXd> grad_w(weights_.size());
  std::vector<Eigen::VectorXd> grad_b(weights_.size());
  for (std::size_t l = weights_.size(); l-- > 0;) {
    const Eigen::MatrixXd& below = cache.activations[l];
    grad_w[l] = delta * below.transpose();
    grad_b[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = weights_[l].transpose() * delta;
      // ReLU derivative from the post-activation values.
      delta = (below.array() > 0.0).select(back, 0.0);
    }
  }

  gradient->clear();
  gradient->reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < grad_w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < grad_w[l].cols(); ++c)
        gradient->push_back(grad_w[l](r, c));
    for (Eigen::Index r = 0; r < grad_b[l].size(); ++r)
      gradient->push_back(grad_b[l](r));
  }
  return value;
}

double MlpNet::train_batch(const Eigen::MatrixXd& inputs,
                           const Eigen::MatrixXd& targets,
                           double learning_rate) {
  if (inputs.cols() == 0) throw std::invalid_argument("empty batch");
  std::vector<double> gradient;
  const double value = loss_and_gradient(inputs, targets, &gradient);
  if (!std::isfinite(value))
    throw std::runtime_error(to_string(role_) + " net: non-finite loss");
  if (learning_rate == 0.0) return value;
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
        weights_[l](r, c) -= learning_rate * gradient[k++];
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r)
      biases_[l](r) -= learning_rate * gradient[k++];
    if (!weights_[l].allFinite() || !biases_[l].allFinite())
      throw std::runtime_error(to_string(role_) +
                               " net: non-finite parameter after update");
  }
  return value;
}

std::size_t MlpNet::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    count += weights_[l].size() + biases_[l].size();
  return count;
}

std::vector<double> MlpNet::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
        flat.push_back(weights_[l](r, c));
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r)
      flat.push_back(biases_[l](r));
  }
  return flat;
}

void MlpNet::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw std::invalid_argument("parameter vector has wrong length");
  std::size_t k = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c)
        weights_[l](r, c) = flat[k++];
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r)
      biases_[l](r) = flat[k++];
  }
}

void MlpNet::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto put_i32 = [&out](std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  };
  out.write(kMagic, sizeof kMagic);
  put_i32(static_cast<std::int32_t>(role_));
  put_i32(static_cast<std::int32_t>(head_));
  put_i32(softmax_blocks_);
  put_i32(static_cast<std::int32_t>(layer_sizes_.size()));
  for (int size : layer_sizes_) put_i32(size);
  const auto flat = parameters();
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

MlpNet MlpNet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("not a network checkpoint: " + path.string());
  auto get_i32 = [&in]() {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw std::runtime_error("truncated checkpoint");
    return v;
  };
  const auto role = static_cast<NetRole>(get_i32());
  const auto head = static_cast<OutputHead>(get_i32());
  const int blocks = get_i32();
  const int n_layers = get_i32();
  if (n_layers < 2 || n_layers > 64)
    throw std::runtime_error("corrupt checkpoint layer count");
  std::vector<int> sizes(n_layers);
  for (int& s : sizes) s = get_i32();
  MlpNet net(sizes, head, role, blocks);
  std::vector<double> flat(net.parameter_count());
  in.read(reinterpret_cast<char*>(flat.data()),
          static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint parameters");
  net.set_parameters(flat);
  return net;
}

void encode_one_hot(int index, int size, std::span<double> out) {
  if (index < 0 || index >= size)
    throw std::out_of_range("one-hot index out of range");
  std::fill(out.begin(), out.begin() + size, 0.0);
  out[index] = 1.0;
}

std::vector<double> encode_state(int state_index, int n_states) {
  std::vector<double> x(n_states);
  encode_one_hot(state_index, n_states, x);
  return x;
}

std::vector<double> encode_state_action(int state_index, int n_states,
                                        std::span<const int> actions,
                                        int n_actions) {
  std::vector<double> x(n_states + actions.size() * n_actions);
  encode_one_hot(state_index, n_states, x);
  for (std::size_t n = 0; n < actions.size(); ++n)
    encode_one_hot(actions[n], n_actions,
                   std::span<double>(x).subspan(n_states + n * n_actions));
  return x;
}

std::vector<double> encode_state_policy(int state_index, int n_states,
                                        const JointPolicy& policy) {
  std::vector<double> x(n_states + policy.flat().size());
  encode_one_hot(state_index, n_states, x);
  std::copy(policy.flat().begin(), policy.flat().end(), x.begin() + n_states);
  return x;
}

JointPolicy decode_policy(const Eigen::VectorXd& output, int n_agents,
                          int n_actions) {
  if (output.size() != n_agents * n_actions)
    throw std::invalid_argument("policy output has wrong size");
  return JointPolicy(n_agents, n_actions,
                     std::vector<double>(output.data(),
                                         output.data() + output.size()));
}

}  // namespace nashpricing
