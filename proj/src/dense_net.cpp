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

#include "dtf/dense_net.hpp"

#include <cmath>

namespace dtf
{

namespace
{

using WeightView = Eigen::Map<
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using WeightViewMut =
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

WeightView weight_view(const ParamEntry & e)
{
  return WeightView(e.values.data(), e.shape[0], e.shape[1]);
}

WeightViewMut weight_view(ParamEntry & e)
{
  return WeightViewMut(e.values.data(), e.shape[0], e.shape[1]);
}

Eigen::VectorXd apply_activation(Activation a, const Eigen::VectorXd & pre)
{
  if (a == Activation::kIdentity) {
    return pre;
  }
  return pre.cwiseMax(0.0);
}

// dL/d(pre) from dL/d(post); ReLU subgradient at 0 is 0.
Eigen::VectorXd activation_backward(
  Activation a, const Eigen::VectorXd & pre, const Eigen::VectorXd & grad_post)
{
  if (a == Activation::kIdentity) {
    return grad_post;
  }
  Eigen::VectorXd grad_pre = grad_post;
  for (Eigen::Index i = 0; i < pre.size(); ++i) {
    if (pre[i] <= 0.0) {
      grad_pre[i] = 0.0;
    }
  }
  return grad_pre;
}

}  // namespace

std::string activation_name(Activation a)
{
  return a == Activation::kRelu ? "relu" : "identity";
}

Activation activation_from_name(const std::string & name)
{
  if (name == "relu") {
    return Activation::kRelu;
  }
  if (name == "identity") {
    return Activation::kIdentity;
  }
  throw ConfigError("unknown activation '" + name + "'");
}

void DenseNet::validate() const
{
  if (layer_dims.size() < 2) {
    throw ConfigError("DenseNet needs at least one layer (two dims)");
  }
  for (int d : layer_dims) {
    if (d <= 0) {
      throw ConfigError("DenseNet: non-positive layer dimension");
    }
  }
}

ParamStore init_params(const DenseNet & net, Rng & rng)
{
  net.validate();
  ParamStore params;
  for (int l = 0; l < net.num_layers(); ++l) {
    const int fan_in = net.layer_dims[l];
    const int fan_out = net.layer_dims[l + 1];
    auto & w = params.add(DenseNet::weight_name(l), {fan_out, fan_in});
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < w.values.size(); ++i) {
      w.values[i] = (2.0 * rng.uniform() - 1.0) * bound;
    }
    params.add(DenseNet::bias_name(l), {fan_out});
  }
  return params;
}

Eigen::VectorXd forward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input)
{
  ForwardTrace trace;
  return forward(net, params, input, trace);
}

Eigen::VectorXd forward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  ForwardTrace & trace)
{
  if (input.size() != net.input_dim()) {
    throw ConfigError("forward: input size does not match first layer dim");
  }
  const int n_layers = net.num_layers();
  trace.pre.resize(n_layers);
  trace.post.resize(n_layers);
  Eigen::VectorXd act = input;
  for (int l = 0; l < n_layers; ++l) {
    const auto w = weight_view(params.at(DenseNet::weight_name(l)));
    const auto & b = params.at(DenseNet::bias_name(l)).values;
    trace.pre[l] = w * act + b;
    const Activation a =
      l + 1 == n_layers ? net.output_activation : net.hidden_activation;
    trace.post[l] = apply_activation(a, trace.pre[l]);
    act = trace.post[l];
  }
  return act;
}

Eigen::VectorXd backward(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  const Eigen::VectorXd & upstream, ParamStore & grads)
{
  ForwardTrace trace;
  forward(net, params, input, trace);
  return backward_from_trace(net, params, input, trace, upstream, grads);
}

Eigen::VectorXd backward_from_trace(
  const DenseNet & net, const ParamStore & params, const Eigen::VectorXd & input,
  const ForwardTrace & trace, const Eigen::VectorXd & upstream, ParamStore & grads)
{
  if (upstream.size() != net.output_dim()) {
    throw ConfigError("backward: upstream size does not match output dim");
  }
  const int n_layers = net.num_layers();
  Eigen::VectorXd grad_post = upstream;
  for (int l = n_layers - 1; l >= 0; --l) {
    const Activation a =
      l + 1 == n_layers ? net.output_activation : net.hidden_activation;
    const Eigen::VectorXd grad_pre = activation_backward(a, trace.pre[l], grad_post);
    const Eigen::VectorXd & below = l == 0 ? input : trace.post[l - 1];
    auto gw = weight_view(grads.at(DenseNet::weight_name(l)));
    gw.noalias() += grad_pre * below.transpose();
    grads.at(DenseNet::bias_name(l)).values += grad_pre;
    const auto w = weight_view(params.at(DenseNet::weight_name(l)));
    grad_post = w.transpose() * grad_pre;
  }
  return grad_post;
}

AdamState make_adam_state(const ParamStore & params)
{
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(
  ParamStore & params, const ParamStore & grads, AdamState & state, const AdamConfig & cfg)
{
  if (!params.same_layout(grads) || !params.same_layout(state.first_moment)) {
    throw ConfigError("adam_step: parameter/gradient/state layouts differ");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads.entry(i).values.allFinite()) {
      throw OptimError("adam_step: non-finite gradient in layer '" + grads.entry(i).name + "'");
    }
  }
  state.step += 1;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto & p = params.entry(i).values;
    const auto & g = grads.entry(i).values;
    auto & m = state.first_moment.entry(i).values;
    auto & v = state.second_moment.entry(i).values;
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double m_hat = m[k] / bias1;
      const double v_hat = v[k] / bias2;
      p[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace dtf
