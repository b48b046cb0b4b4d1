#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "nashpricing/mlp.hpp"
#include "nashpricing/random.hpp"

using namespace nashpricing;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng, double lo = -1, double hi = 1) {
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

// Worst relative error between analytic and central-difference gradients
// over `probes` random parameter coordinates.
double gradient_check(MlpNet& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                      int probes, Rng& rng) {
  std::vector<double> grad;
  net.loss_and_gradient(x, t, &grad);
  auto params = net.parameters();
  const double h = 1e-6;
  double worst = 0;
  for (int i = 0; i < probes; ++i) {
    const std::size_t k = rng.uniform_int(params.size());
    const double saved = params[k];
    params[k] = saved + h;
    net.set_parameters(params);
    const double up = net.loss(x, t);
    params[k] = saved - h;
    net.set_parameters(params);
    const double down = net.loss(x, t);
    params[k] = saved;
    net.set_parameters(params);
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(grad[k]), 1e-7});
    worst = std::max(worst, std::abs(numeric - grad[k]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("zero-weight nets") {
  MlpNet lin({4, 5, 3}, OutputHead::kLinear, NetRole::kQ);
  const std::vector<double> x = {1, 2, 3, 4};
  CHECK(lin.forward(x).isZero());
  MlpNet soft({4, 5, 6}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 2);
  const Eigen::VectorXd y = soft.forward(x);
  for (int i = 0; i < 6; ++i) CHECK(y(i) == doctest::Approx(1.0 / 3));
}

TEST_CASE("forward is deterministic and checks shapes") {
  MlpNet net({3, 8, 8, 2}, OutputHead::kLinear, NetRole::kGamma);
  net.initialize(4);
  const std::vector<double> x = {0.3, -0.2, 0.9};
  CHECK(net.forward(x) == net.forward(x));
  const std::vector<double> wrong = {1, 2};
  CHECK_THROWS_AS(net.forward(wrong), std::invalid_argument);
  CHECK_THROWS_AS(MlpNet({3}, OutputHead::kLinear, NetRole::kQ), std::invalid_argument);
  CHECK_THROWS_AS(MlpNet({3, 5}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 2),
                  std::invalid_argument);
}

TEST_CASE("initialization range") {
  MlpNet net({16, 32, 4}, OutputHead::kLinear, NetRole::kQ);
  net.initialize(1);
  const auto p = net.parameters();
  // First layer: 32x16 weights then 32 zero biases.
  for (int i = 0; i < 32 * 16; ++i) CHECK(std::abs(p[i]) <= 0.25);
  for (int i = 32 * 16; i < 32 * 16 + 32; ++i) CHECK(p[i] == 0.0);
  MlpNet again({16, 32, 4}, OutputHead::kLinear, NetRole::kQ);
  again.initialize(1);
  CHECK(again.parameters() == p);
}

TEST_CASE("analytic gradients match central differences") {
  Rng rng(12);
  SUBCASE("linear head, 3-3-2") {
    MlpNet net({3, 3, 2}, OutputHead::kLinear, NetRole::kQ);
    net.initialize(7);
    // Shift biases off zero so no unit sits exactly at the ReLU kink.
    auto p = net.parameters();
    for (auto& v : p) v += 0.05;
    net.set_parameters(p);
    CHECK(gradient_check(net, random_matrix(3, 5, rng), random_matrix(2, 5, rng), 10, rng) < 1e-4);
  }
  SUBCASE("softmax head") {
    MlpNet net({3, 6, 6}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 2);
    net.initialize(8);
    Eigen::MatrixXd t = random_matrix(6, 4, rng, 0, 1);
    CHECK(gradient_check(net, random_matrix(3, 4, rng), t, 10, rng) < 1e-4);
  }
  SUBCASE("deeper linear") {
    MlpNet net({5, 7, 7, 7, 1}, OutputHead::kLinear, NetRole::kGamma);
    net.initialize(9);
    CHECK(gradient_check(net, random_matrix(5, 6, rng), random_matrix(1, 6, rng), 10, rng) < 1e-4);
  }
}

TEST_CASE("overfits a single pair") {
  MlpNet net({3, 16, 2}, OutputHead::kLinear, NetRole::kQ);
  net.initialize(3);
  Eigen::MatrixXd x(3, 1), t(2, 1);
  x << 0.5, -1.0, 0.25;
  t << 0.7, -0.3;
  double loss = 0;
  for (int i = 0; i < 1000; ++i) loss = net.train_batch(x, t, 0.05);
  CHECK(net.loss(x, t) < 1e-6);
  CHECK(loss < 1e-5);
}

TEST_CASE("zero learning rate leaves parameters alone") {
  MlpNet net({3, 4, 2}, OutputHead::kLinear, NetRole::kQ);
  net.initialize(5);
  const auto before = net.parameters();
  Rng rng(1);
  const double loss = net.train_batch(random_matrix(3, 4, rng), random_matrix(2, 4, rng), 0.0);
  CHECK(loss > 0);
  CHECK(net.parameters() == before);
}

TEST_CASE("non-finite loss aborts") {
  MlpNet net({2, 3, 1}, OutputHead::kLinear, NetRole::kGamma);
  net.initialize(1);
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
  Eigen::MatrixXd t(1, 1);
  t(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(net.train_batch(x, t, 0.01), std::runtime_error);
}

TEST_CASE("softmax rows stay on the simplex through training") {
  MlpNet net({4, 12, 6}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 3);
  net.initialize(2);
  Rng rng(6);
  for (int step = 0; step < 300; ++step) {
    Eigen::MatrixXd t = random_matrix(6, 5, rng, 0, 1);
    net.train_batch(random_matrix(4, 5, rng, -3, 3), t, 0.5);
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd y = net.forward_batch(random_matrix(4, 3, rng, -10, 10));
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b) {
        CHECK(std::abs(y.col(c).segment(2 * b, 2).sum() - 1.0) <= 1e-9);
        CHECK(y.col(c).segment(2 * b, 2).minCoeff() >= 0.0);
      }
  }
  CHECK(decode_policy(net.forward(std::vector<double>{1, 2, 3, 4}), 3, 2).is_valid());
}

TEST_CASE("fixed-batch loss is mostly non-increasing at small learning rates") {
  int stable = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(1000 + trial);
    MlpNet net({4, 10, 10, 2}, OutputHead::kLinear, NetRole::kQ);
    net.initialize(trial);
    const Eigen::MatrixXd x = random_matrix(4, 8, rng);
    const Eigen::MatrixXd t = random_matrix(2, 8, rng);
    double prev = net.loss(x, t);
    bool monotone = true;
    for (int step = 0; step < 100; ++step) {
      net.train_batch(x, t, 1e-3);
      const double cur = net.loss(x, t);
      if (cur > prev) monotone = false;
      prev = cur;
    }
    stable += monotone ? 1 : 0;
  }
  CHECK(stable >= 95);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  MlpNet net({5, 7, 6}, OutputHead::kPerAgentSoftmax, NetRole::kPsi, 3);
  net.initialize(99);
  const auto path = std::filesystem::temp_directory_path() / "nashpricing_mlp_roundtrip.bin";
  net.save(path);
  const MlpNet back = MlpNet::load(path);
  CHECK(back.parameters() == net.parameters());
  CHECK(back.layer_sizes() == net.layer_sizes());
  CHECK(back.head() == net.head());
  CHECK(back.role() == net.role());
  CHECK(back.softmax_blocks() == 3);
  std::filesystem::remove(path);
}

TEST_CASE("encodings") {
  const auto s = encode_state(2, 4);
  CHECK(s == std::vector<double>{0, 0, 1, 0});
  const std::vector<int> acts = {1, 0};
  const auto sa = encode_state_action(0, 2, acts, 3);
  CHECK(sa == std::vector<double>{1, 0, 0, 1, 0, 1, 0, 0});
  const auto sp = encode_state_policy(1, 2, JointPolicy::uniform(2, 2));
  CHECK(sp == std::vector<double>{0, 1, 0.5, 0.5, 0.5, 0.5});
  CHECK_THROWS_AS(encode_state(4, 4), std::out_of_range);
}
