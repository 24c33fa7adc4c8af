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

#ifndef DTF_DENSE_NET_HPP_
#define DTF_DENSE_NET_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtf/param_store.hpp"
#include "dtf/rng.hpp"

namespace dtf
{

enum class Activation { kIdentity, kRelu };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string & name);

/// Fully connected feedforward network topology. Parameters live in a
/// ParamStore under names W0/b0, W1/b1, ... so the same topology can be
/// paired with several parameter sets (values, gradients, Adam moments).
struct DenseNet
{
  std::vector<int> layer_dims;  // [input, hidden..., output]
  Activation hidden_activation = Activation::kRelu;
  Activation output_activation = Activation::kIdentity;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  int num_layers() const { return static_cast<int>(layer_dims.size()) - 1; }

  static std::string weight_name(int layer) { return "W" + std::to_string(layer); }
  static std::string bias_name(int layer) { return "b" + std::to_string(layer); }

  void validate() const;
};

/// Glorot-style uniform init in [-a, a], a = sqrt(6 / (fan_in + fan_out));
/// biases start at zero. Draw order is fixed (layer by layer, row-major)
/// so a seed pins every parameter bit.
ParamStore init_params(const DenseNet & net, Rng & rng);

/// Per-layer activations cached by a forward pass, for reuse in backward.
struct ForwardTrace
{
  std::vector<Eigen::VectorXd> pre;   // pre-activation per layer
  std::vector<Eigen::VectorXd> post;  // post-activation per layer
};

Eigen::VectorXd forward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input);

Eigen::VectorXd forward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  ForwardTrace & trace);

/// Reverse-mode gradients of (upstream . output) w.r.t. parameters and
/// input. Parameter gradients are accumulated into `grads` (same layout
/// as `params`); the input gradient is returned. ReLU uses subgradient 0
/// at exactly zero pre-activation.
Eigen::VectorXd backward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  const Eigen::VectorXd & upstream, ParamStore & grads);

/// Same as backward() but reuses activations from a prior forward pass.
Eigen::VectorXd backward_from_trace(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  const ForwardTrace & trace, const Eigen::VectorXd & upstream, ParamStore & grads);

struct AdamConfig
{
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState
{
  ParamStore first_moment;
  ParamStore second_moment;
  long step = 0;
};

AdamState make_adam_state(const ParamStore & params);

/// One bias-corrected Adam update. Throws OptimError naming the layer if
/// any gradient entry is non-finite.
void adam_step(
  ParamStore & params, const ParamStore & grads, AdamState & state, const AdamConfig & cfg);

}  // namespace dtf

#endif  // DTF_DENSE_NET_HPP_
