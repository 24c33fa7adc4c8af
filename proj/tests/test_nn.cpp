// Copyright 2026 The dtf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstring>

#include <doctest.h>

#include "dtf/checkpoint.hpp"
#include "dtf/dense_net.hpp"
#include "test_util.hpp"

using namespace dtf;
using dtf_test::finite_difference_grads;
using dtf_test::max_grad_rel_err;

namespace
{

// Plain-loop forward pass, independent of the Eigen implementation.
std::vector<double> naive_forward(
  const DenseNet & net, const ParamStore & params, const std::vector<double> & input)
{
  std::vector<double> act = input;
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto & w = params.at(DenseNet::weight_name(l));
    const auto & b = params.at(DenseNet::bias_name(l));
    const int rows = w.shape[0];
    const int cols = w.shape[1];
    std::vector<double> next(rows, 0.0);
    for (int r = 0; r < rows; ++r) {
      double sum = b.values[r];
      for (int c = 0; c < cols; ++c) {
        sum += w.values[r * cols + c] * act[c];
      }
      next[r] = sum;
    }
    const bool is_output = l + 1 == net.num_layers();
    if (!is_output) {
      for (auto & v : next) {
        v = std::max(0.0, v);
      }
    }
    act = next;
  }
  return act;
}

DenseNet make_net(std::vector<int> dims)
{
  DenseNet net;
  net.layer_dims = std::move(dims);
  return net;
}

}  // namespace

TEST_CASE("forward: single identity layer passes input through")
{
  DenseNet net = make_net({2, 2});
  ParamStore params;
  auto & w = params.add("W0", {2, 2});
  w.values << 1.0, 0.0, 0.0, 1.0;
  params.add("b0", {2});
  const Eigen::Vector2d input(1.5, -2.0);
  const Eigen::VectorXd out = forward(net, params, input);
  CHECK(out[0] == 1.5);
  CHECK(out[1] == -2.0);
}

TEST_CASE("forward: rectifier zeroes negative pre-activations")
{
  // Two identity layers; the hidden rectifier acts on the raw input.
  DenseNet net = make_net({3, 3, 3});
  ParamStore params;
  for (int l = 0; l < 2; ++l) {
    auto & w = params.add(DenseNet::weight_name(l), {3, 3});
    w.values << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    params.add(DenseNet::bias_name(l), {3});
  }
  Eigen::Vector3d input(-1.0, 0.0, 2.0);
  const Eigen::VectorXd out = forward(net, params, input);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 2.0);
}

TEST_CASE("forward: random 2-3-1 net matches the naive-loop oracle")
{
  DenseNet net = make_net({2, 3, 1});
  Rng rng(42);
  ParamStore params = init_params(net, rng);
  const Eigen::Vector2d input(0.3, 0.7);
  const Eigen::VectorXd out = forward(net, params, input);
  const auto oracle = naive_forward(net, params, {0.3, 0.7});
  REQUIRE(out.size() == 1);
  CHECK(std::abs(out[0] - oracle[0]) < 1e-12);
}

TEST_CASE("forward: dimension mismatch is a configuration error")
{
  DenseNet net = make_net({2, 2});
  Rng rng(1);
  ParamStore params = init_params(net, rng);
  CHECK_THROWS_AS(forward(net, params, Eigen::Vector3d(1, 2, 3)), ConfigError);
}

TEST_CASE("backward: linear layer gives outer-product weight grads")
{
  DenseNet net = make_net({3, 2});
  Rng rng(7);
  ParamStore params = init_params(net, rng);
  ParamStore grads = params.zeros_like();
  const Eigen::Vector3d x(0.5, -1.0, 2.0);
  const Eigen::Vector2d g(2.0, -3.0);
  backward(net, params, x, g, grads);
  const auto & gw = grads.at("W0").values;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(gw[r * 3 + c] == doctest::Approx(g[r] * x[c]).epsilon(1e-14));
    }
  }
  const auto & gb = grads.at("b0").values;
  CHECK(gb[0] == 2.0);
  CHECK(gb[1] == -3.0);
}

TEST_CASE("backward: rectifier subgradient at exactly zero is zero")
{
  // Hidden pre-activation is exactly 0 for a zero input and zero bias.
  DenseNet net = make_net({1, 1, 1});
  ParamStore params;
  params.add("W0", {1, 1}).values << 1.0;
  params.add("b0", {1});
  params.add("W1", {1, 1}).values << 1.0;
  params.add("b1", {1});
  ParamStore grads = params.zeros_like();
  Eigen::VectorXd x(1);
  x << 0.0;
  Eigen::VectorXd g(1);
  g << 1.0;
  const Eigen::VectorXd gx = backward(net, params, x, g, grads);
  CHECK(gx[0] == 0.0);
  CHECK(grads.at("W0").values[0] == 0.0);
  CHECK(grads.at("b0").values[0] == 0.0);
  CHECK(grads.at("b1").values[0] == 1.0);  // output bias still sees the upstream
}

TEST_CASE("backward: random 2-4-2 net matches central finite differences")
{
  DenseNet net = make_net({2, 4, 2});
  Rng rng(11);
  ParamStore params = init_params(net, rng);
  const Eigen::Vector2d input(0.4, -0.9);
  Eigen::Vector2d upstream(1.3, -0.7);

  ParamStore analytic = params.zeros_like();
  backward(net, params, input, upstream, analytic);

  const auto loss_fn = [&]() { return upstream.dot(forward(net, params, input)); };
  const ParamStore fd = finite_difference_grads(params, loss_fn, 1e-5);
  CHECK(max_grad_rel_err(analytic, fd) < 1e-6);
}

TEST_CASE("backward: finite differences agree across random small nets")
{
  const std::vector<std::vector<int>> shapes = {{2, 3, 2}, {3, 4, 1}, {1, 5, 3}, {4, 4}};
  int seed = 100;
  for (const auto & dims : shapes) {
    DenseNet net = make_net(dims);
    Rng rng(seed++);
    ParamStore params = init_params(net, rng);
    REQUIRE(params.scalar_count() <= 64);
    Eigen::VectorXd input = rng.normal_vector(net.input_dim());
    Eigen::VectorXd upstream = rng.normal_vector(net.output_dim());

    ParamStore analytic = params.zeros_like();
    const Eigen::VectorXd input_grad = backward(net, params, input, upstream, analytic);

    const auto loss_fn = [&]() { return upstream.dot(forward(net, params, input)); };
    const ParamStore fd = finite_difference_grads(params, loss_fn, 1e-5);
    CHECK(max_grad_rel_err(analytic, fd) < 1e-6);

    // Input gradient against finite differences too.
    for (Eigen::Index i = 0; i < input.size(); ++i) {
      const double saved = input[i];
      input[i] = saved + 1e-5;
      const double up = upstream.dot(forward(net, params, input));
      input[i] = saved - 1e-5;
      const double down = upstream.dot(forward(net, params, input));
      input[i] = saved;
      CHECK(dtf_test::rel_err(input_grad[i], (up - down) / 2e-5) < 1e-6);
    }
  }
}

TEST_CASE("adam: first step moves a zero param by about -lr")
{
  ParamStore params;
  params.add("w", {1});
  ParamStore grads = params.zeros_like();
  grads.at("w").values[0] = 1.0;
  AdamState state = make_adam_state(params);
  adam_step(params, grads, state, AdamConfig{1e-4, 0.9, 0.999, 1e-8});
  CHECK(state.step == 1);
  CHECK(params.at("w").values[0] == doctest::Approx(-1e-4).epsilon(1e-6));
}

TEST_CASE("adam: zero gradient leaves params unchanged and bumps the step")
{
  DenseNet net = make_net({2, 2});
  Rng rng(3);
  ParamStore params = init_params(net, rng);
  const Eigen::VectorXd before = params.at("W0").values;
  ParamStore grads = params.zeros_like();
  AdamState state = make_adam_state(params);
  adam_step(params, grads, state, AdamConfig{});
  CHECK(state.step == 1);
  CHECK((params.at("W0").values - before).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("adam: two constant-gradient steps match a hand-executed trace")
{
  ParamStore params;
  params.add("w", {1});
  ParamStore grads = params.zeros_like();
  grads.at("w").values[0] = 1.0;
  AdamState state = make_adam_state(params);
  const AdamConfig cfg{1e-3, 0.9, 0.999, 1e-8};
  adam_step(params, grads, state, cfg);
  adam_step(params, grads, state, cfg);

  // Scalar re-execution of the same update rule.
  double p = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 2; ++t) {
    m = 0.9 * m + 0.1 * 1.0;
    v = 0.999 * v + 0.001 * 1.0;
    const double m_hat = m / (1.0 - std::pow(0.9, t));
    const double v_hat = v / (1.0 - std::pow(0.999, t));
    p -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
  CHECK(std::abs(params.at("w").values[0] - p) < 1e-12);
}

TEST_CASE("adam: non-finite gradients raise an optimization error naming the layer")
{
  ParamStore params;
  params.add("hidden", {2});
  ParamStore grads = params.zeros_like();
  grads.at("hidden").values[0] = std::nan("");
  AdamState state = make_adam_state(params);
  CHECK_THROWS_WITH_AS(
    adam_step(params, grads, state, AdamConfig{}),
    "adam_step: non-finite gradient in layer 'hidden'", OptimError);
}

TEST_CASE("determinism: identical seeds give bit-identical training sequences")
{
  const auto run = [](std::uint64_t seed) {
    DenseNet net = make_net({3, 8, 2});
    Rng rng(seed);
    ParamStore params = init_params(net, rng);
    AdamState state = make_adam_state(params);
    ParamStore grads = params.zeros_like();
    Rng data_rng(Rng::derive(seed, SeedStream::kNoise, 0));
    for (int step = 0; step < 25; ++step) {
      const Eigen::VectorXd input = data_rng.normal_vector(3);
      const Eigen::VectorXd upstream = data_rng.normal_vector(2);
      grads.set_zero();
      backward(net, params, input, upstream, grads);
      adam_step(params, grads, state, AdamConfig{1e-3, 0.9, 0.999, 1e-8});
    }
    return params;
  };
  const ParamStore a = run(99);
  const ParamStore b = run(99);
  for (std::size_t e = 0; e < a.size(); ++e) {
    CHECK(
      std::memcmp(
        a.entry(e).values.data(), b.entry(e).values.data(),
        sizeof(double) * a.entry(e).values.size()) == 0);
  }
}

TEST_CASE("checkpoint: round-trip reproduces forward passes bit for bit")
{
  DenseNet net = make_net({4, 16, 3});
  Rng rng(123);
  ParamStore params = init_params(net, rng);
  const nlohmann::json j = net_to_json(net, params, 123);

  DenseNet loaded_net;
  ParamStore loaded_params;
  std::uint64_t seed = 0;
  net_from_json(j, loaded_net, loaded_params, seed);
  CHECK(seed == 123);
  CHECK(loaded_net.layer_dims == net.layer_dims);

  Rng probe(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd input = probe.normal_vector(4);
    const Eigen::VectorXd a = forward(net, params, input);
    const Eigen::VectorXd b = forward(loaded_net, loaded_params, input);
    CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
  }

  // Serialize-load-serialize is byte-identical.
  const std::string text = j.dump(2);
  DenseNet net2;
  ParamStore params2;
  net_from_json(nlohmann::json::parse(text), net2, params2, seed);
  CHECK(net_to_json(net2, params2, seed).dump(2) == text);
}

TEST_CASE("param store: insertion order survives and duplicate names are rejected")
{
  ParamStore store;
  store.add("zulu", {2});
  store.add("alpha", {3});
  CHECK(store.entry(0).name == "zulu");
  CHECK(store.entry(1).name == "alpha");
  CHECK_THROWS_AS(store.add("zulu", {1}), ConfigError);
  CHECK_THROWS_AS(store.at("missing"), ConfigError);
}
