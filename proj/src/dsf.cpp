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

#include "dtf/dsf.hpp"

#include <cmath>
#include <limits>

#include "dtf/checkpoint.hpp"
#include "dtf/common.hpp"

namespace dtf
{

namespace
{

Eigen::VectorXd concat(const Eigen::VectorXd & a, const Eigen::VectorXd & b)
{
  Eigen::VectorXd out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

bool all_finite(const ParamStore & store)
{
  for (const auto & e : store) {
    if (!e.values.allFinite()) {
      return false;
    }
  }
  return true;
}

// d(loss)/dL for the configured loss mode. NLL mode can be non-finite;
// the caller checks `finite` before using the gradient.
Eigen::MatrixXd loss_grad_wrt_kernel(
  const Eigen::MatrixXd & kernel, const DsfTrainConfig & cfg, double & loss, bool & finite)
{
  const Eigen::Index n = kernel.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  if (cfg.loss_mode == DsfLossMode::kCardinality) {
    loss = diversity_loss(kernel);
    finite = std::isfinite(loss);
    return diversity_loss_grad(kernel);
  }
  loss = nll_loss(kernel, cfg.nll_diag_eps);
  finite = std::isfinite(loss);
  if (!finite) {
    return Eigen::MatrixXd::Zero(n, n);
  }
  const Eigen::MatrixXd inv_reg =
    Eigen::LDLT<Eigen::MatrixXd>(kernel + cfg.nll_diag_eps * identity).solve(identity);
  const Eigen::MatrixXd inv_norm =
    Eigen::LDLT<Eigen::MatrixXd>(kernel + identity).solve(identity);
  Eigen::MatrixXd grad = inv_norm - inv_reg;
  grad = 0.5 * (grad + grad.transpose()).eval();
  if (!grad.allFinite()) {
    finite = false;
    return Eigen::MatrixXd::Zero(n, n);
  }
  return grad;
}

}  // namespace

std::string dsf_loss_mode_name(DsfLossMode m)
{
  return m == DsfLossMode::kCardinality ? "cardinality" : "nll";
}

DsfLossMode dsf_loss_mode_from_name(const std::string & name)
{
  if (name == "cardinality") {
    return DsfLossMode::kCardinality;
  }
  if (name == "nll") {
    return DsfLossMode::kNll;
  }
  throw ConfigError("unknown loss mode '" + name + "'");
}

DsfModel make_dsf(const CvaeModel & cvae, const DsfTrainConfig & cfg, std::uint64_t seed)
{
  if (cfg.n <= 0) {
    throw ConfigError("make_dsf: sampling budget must be positive");
  }
  DsfModel model;
  model.n = cfg.n;
  model.dz = cvae.dz;
  model.seed = seed;
  model.net.layer_dims = {cvae.context_dim(), cfg.hidden, cfg.n * cvae.dz};
  Rng rng(Rng::derive(seed, SeedStream::kInit));
  model.params = init_params(model.net, rng);
  // Spread the initial code set via the output bias. Coincident codes sit
  // on a stationary point of the diversity loss (the repulsion between
  // samples scales with their spread), so starting the proposals apart
  // keeps training off that plateau. Uniform in [-1, 1] stays well inside
  // the quality sphere.
  auto & out_bias =
    model.params.at(DenseNet::bias_name(model.net.num_layers() - 1)).values;
  for (Eigen::Index i = 0; i < out_bias.size(); ++i) {
    out_bias[i] = 2.0 * rng.uniform() - 1.0;
  }
  return model;
}

std::vector<Eigen::VectorXd> propose_latents(const DsfModel & model, const Trajectory & h)
{
  const Eigen::VectorXd out = forward(model.net, model.params, flatten(h));
  std::vector<Eigen::VectorXd> codes(model.n);
  for (int i = 0; i < model.n; ++i) {
    codes[i] = out.segment(static_cast<Eigen::Index>(i) * model.dz, model.dz);
  }
  return codes;
}

std::vector<Trajectory> ground_set(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h)
{
  const auto codes = propose_latents(model, h);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(codes.size());
  for (const auto & z : codes) {
    trajectories.push_back(decode(cvae, z, h));
  }
  return trajectories;
}

DsfLoss dsf_loss_and_grad(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h,
  const DsfTrainConfig & cfg, ParamStore & grads)
{
  if (model.dz != cvae.dz) {
    throw ConfigError("dsf_loss_and_grad: sampler and decoder disagree on dz");
  }
  const int n = model.n;
  const int dz = model.dz;
  const Eigen::VectorXd h_flat = flatten(h);

  // Sampler forward.
  ForwardTrace net_trace;
  const Eigen::VectorXd net_out = forward(model.net, model.params, h_flat, net_trace);
  std::vector<Eigen::VectorXd> codes(n);
  for (int i = 0; i < n; ++i) {
    codes[i] = net_out.segment(static_cast<Eigen::Index>(i) * dz, dz);
  }

  // Decoder forward per code; traces kept for the backward sweep.
  std::vector<ForwardTrace> dec_traces(n);
  std::vector<Eigen::VectorXd> dec_inputs(n);
  std::vector<Eigen::VectorXd> flat_traj(n);
  std::vector<Trajectory> trajectories(n);
  for (int i = 0; i < n; ++i) {
    dec_inputs[i] = concat(codes[i], h_flat);
    flat_traj[i] =
      forward(cvae.decoder_net, cvae.decoder, dec_inputs[i], dec_traces[i]);
    trajectories[i] = unflatten(flat_traj[i], cvae.t_steps, cvae.dims);
  }

  // Kernel assembly.
  const Eigen::MatrixXd similarity =
    similarity_matrix(trajectories, cfg.k, cfg.similarity_mode);
  const QualityConfig quality_cfg = QualityConfig::make(cfg.omega, cfg.rho_percent, dz);
  const Eigen::VectorXd quality = quality_vector(codes, quality_cfg);
  const DppKernel dpp = build_kernel(similarity, quality);

  DsfLoss result;
  const Eigen::MatrixXd grad_kernel =
    loss_grad_wrt_kernel(dpp.kernel, cfg, result.loss, result.finite);
  if (!result.finite) {
    return result;
  }

  // dLoss/dS and dLoss/dr from L = Diag(r) S Diag(r).
  const Eigen::MatrixXd grad_similarity =
    grad_kernel.cwiseProduct((quality * quality.transpose()).eval());
  const Eigen::VectorXd grad_quality =
    2.0 * grad_kernel.cwiseProduct(similarity) * quality;

  // Trajectory-space gradients through the similarity entries.
  const double radius2 = quality_cfg.radius * quality_cfg.radius;
  std::vector<Eigen::VectorXd> grad_traj(n, Eigen::VectorXd::Zero(flat_traj[0].size()));
  if (cfg.similarity_mode == SimilarityMode::kGaussian) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) {
          continue;
        }
        // S_ij and S_ji both depend on x_i and contribute equally.
        const double w = 2.0 * grad_similarity(i, j) * (-2.0 * cfg.k) * similarity(i, j);
        grad_traj[i] += w * (flat_traj[i] - flat_traj[j]);
      }
    }
  } else {
    std::vector<double> norm(n);
    std::vector<Eigen::VectorXd> unit(n);
    for (int i = 0; i < n; ++i) {
      norm[i] = flat_traj[i].norm();
      unit[i] = flat_traj[i] / norm[i];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (j == i) {
          continue;
        }
        grad_traj[i] +=
          2.0 * grad_similarity(i, j) / norm[i] * (unit[j] - similarity(i, j) * unit[i]);
      }
    }
  }

  // Latent gradients: through the frozen decoder plus the quality branch
  // (zero inside the sphere, -2 z r outside).
  Eigen::VectorXd grad_net_out(n * dz);
  ParamStore decoder_scratch = cvae.decoder.zeros_like();
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd grad_dec_in = backward_from_trace(
      cvae.decoder_net, cvae.decoder, dec_inputs[i], dec_traces[i], grad_traj[i],
      decoder_scratch);
    Eigen::VectorXd grad_z = grad_dec_in.head(dz);
    if (codes[i].squaredNorm() > radius2) {
      grad_z += grad_quality[i] * quality[i] * (-2.0 * codes[i]);
    }
    grad_net_out.segment(static_cast<Eigen::Index>(i) * dz, dz) = grad_z;
  }

  backward_from_trace(model.net, model.params, h_flat, net_trace, grad_net_out, grads);
  return result;
}

DsfModel train_dsf(
  const std::vector<DataExample> & dataset, const CvaeModel & cvae,
  const DsfTrainConfig & cfg, std::uint64_t seed, TrainTrace * trace,
  long * instability_events)
{
  if (dataset.empty()) {
    throw ConfigError("train_dsf: empty dataset");
  }
  DsfModel model = make_dsf(cvae, cfg, seed);
  AdamState state = make_adam_state(model.params);
  AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  ParamStore grads = model.params.zeros_like();
  long events = 0;

  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(seed, SeedStream::kShuffle, epoch));
    shuffle_indices(order, shuffle_rng);
    double epoch_loss = 0.0;
    long finite_losses = 0;
    for (int idx : order) {
      grads.set_zero();
      const DsfLoss result = dsf_loss_and_grad(model, cvae, dataset[idx].h, cfg, grads);
      if (!result.finite || !all_finite(grads)) {
        if (cfg.loss_mode == DsfLossMode::kCardinality) {
          throw OptimError(
            "train_dsf: non-finite loss at epoch " + std::to_string(epoch + 1));
        }
        ++events;
        continue;
      }
      adam_step(model.params, grads, state, adam);
      epoch_loss += result.loss;
      ++finite_losses;
    }
    if (trace != nullptr) {
      trace->epoch_loss.push_back(
        finite_losses > 0 ? epoch_loss / static_cast<double>(finite_losses)
                          : std::numeric_limits<double>::quiet_NaN());
    }
  }
  if (instability_events != nullptr) {
    *instability_events = events;
  }
  return model;
}

double mcl_loss_and_grad(
  const DsfModel & model, const CvaeModel & cvae, const DataExample & example,
  ParamStore & grads)
{
  const int dz = model.dz;
  const Eigen::VectorXd h_flat = flatten(example.h);
  const Eigen::VectorXd x_flat = flatten(example.x);

  ForwardTrace net_trace;
  const Eigen::VectorXd net_out = forward(model.net, model.params, h_flat, net_trace);

  // Best-of-n: the gradient flows only through the closest sample; ties
  // go to the lowest index via the strict comparison.
  int best = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<ForwardTrace> dec_traces(model.n);
  std::vector<Eigen::VectorXd> dec_inputs(model.n);
  std::vector<Eigen::VectorXd> outputs(model.n);
  for (int i = 0; i < model.n; ++i) {
    const Eigen::VectorXd z = net_out.segment(static_cast<Eigen::Index>(i) * dz, dz);
    dec_inputs[i] = concat(z, h_flat);
    outputs[i] = forward(cvae.decoder_net, cvae.decoder, dec_inputs[i], dec_traces[i]);
    const double loss_i = (outputs[i] - x_flat).squaredNorm();
    if (loss_i < best_loss) {
      best_loss = loss_i;
      best = i;
    }
  }

  ParamStore decoder_scratch = cvae.decoder.zeros_like();
  const Eigen::VectorXd grad_y = 2.0 * (outputs[best] - x_flat);
  const Eigen::VectorXd grad_dec_in = backward_from_trace(
    cvae.decoder_net, cvae.decoder, dec_inputs[best], dec_traces[best], grad_y,
    decoder_scratch);
  Eigen::VectorXd grad_net_out = Eigen::VectorXd::Zero(model.n * dz);
  grad_net_out.segment(static_cast<Eigen::Index>(best) * dz, dz) = grad_dec_in.head(dz);
  backward_from_trace(model.net, model.params, h_flat, net_trace, grad_net_out, grads);
  return best_loss;
}

DsfModel train_mcl(
  const std::vector<DataExample> & dataset, const CvaeModel & cvae,
  const DsfTrainConfig & cfg, std::uint64_t seed, TrainTrace * trace)
{
  if (dataset.empty()) {
    throw ConfigError("train_mcl: empty dataset");
  }
  DsfModel model = make_dsf(cvae, cfg, seed);
  AdamState state = make_adam_state(model.params);
  AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  ParamStore grads = model.params.zeros_like();

  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(seed, SeedStream::kShuffle, epoch));
    shuffle_indices(order, shuffle_rng);
    double epoch_loss = 0.0;
    for (int idx : order) {
      grads.set_zero();
      const double loss = mcl_loss_and_grad(model, cvae, dataset[idx], grads);
      if (!std::isfinite(loss)) {
        throw OptimError("train_mcl: non-finite loss at epoch " + std::to_string(epoch + 1));
      }
      adam_step(model.params, grads, state, adam);
      epoch_loss += loss;
    }
    if (trace != nullptr) {
      trace->epoch_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
    }
  }
  return model;
}

std::vector<Trajectory> forecast_diverse(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h,
  const DsfTrainConfig & cfg, double omega_test)
{
  const auto codes = propose_latents(model, h);
  std::vector<Trajectory> trajectories;
  trajectories.reserve(codes.size());
  for (const auto & z : codes) {
    trajectories.push_back(decode(cvae, z, h));
  }
  const Eigen::MatrixXd similarity =
    similarity_matrix(trajectories, cfg.k, cfg.similarity_mode);
  const QualityConfig quality_cfg =
    QualityConfig::make(omega_test, cfg.rho_percent, model.dz);
  const Eigen::VectorXd quality = quality_vector(codes, quality_cfg);
  const DppKernel dpp = build_kernel(similarity, quality);
  const std::vector<int> picks = greedy_map(dpp.kernel, model.n, true);
  std::vector<Trajectory> out;
  out.reserve(picks.size());
  for (int i : picks) {
    out.push_back(trajectories[i]);
  }
  return out;
}

std::vector<Eigen::VectorXd> ldpp_select_codes(
  int dz, int pool, int n, const DsfTrainConfig & cfg, std::uint64_t seed)
{
  if (pool <= 0 || n <= 0) {
    throw ConfigError("ldpp_select_codes: pool and n must be positive");
  }
  Rng rng(seed);
  std::vector<Eigen::VectorXd> codes(pool);
  for (auto & z : codes) {
    z = rng.normal_vector(dz);
  }
  // Similarity lives in latent space here; quality uses the same sphere.
  Eigen::MatrixXd similarity(pool, pool);
  for (int i = 0; i < pool; ++i) {
    similarity(i, i) = 1.0;
    for (int j = i + 1; j < pool; ++j) {
      const double v = std::exp(-cfg.k * (codes[i] - codes[j]).squaredNorm());
      similarity(i, j) = v;
      similarity(j, i) = v;
    }
  }
  const QualityConfig quality_cfg = QualityConfig::make(cfg.omega, cfg.rho_percent, dz);
  const Eigen::VectorXd quality = quality_vector(codes, quality_cfg);
  const DppKernel dpp = build_kernel(similarity, quality);
  // Selection is forced to the budget: the cap does the pruning, not the
  // marginal-gain sign.
  const std::vector<int> picks = greedy_map(dpp.kernel, std::min(n, pool), false);
  std::vector<Eigen::VectorXd> out;
  out.reserve(picks.size());
  for (int i : picks) {
    out.push_back(codes[i]);
  }
  return out;
}

std::vector<Trajectory> forecast_cvae_ldpp(
  const CvaeModel & cvae, const Trajectory & h, int pool, int n,
  const DsfTrainConfig & cfg, std::uint64_t seed)
{
  const auto codes = ldpp_select_codes(cvae.dz, pool, n, cfg, seed);
  std::vector<Trajectory> out;
  out.reserve(codes.size());
  for (const auto & z : codes) {
    out.push_back(decode(cvae, z, h));
  }
  return out;
}

nlohmann::json dsf_to_json(const DsfModel & model, const DsfTrainConfig & cfg)
{
  nlohmann::json j;
  j["format"] = "dtf-dsf-checkpoint-v1";
  j["n"] = model.n;
  j["dz"] = model.dz;
  j["config"] = {
    {"n", cfg.n},
    {"hidden", cfg.hidden},
    {"k", cfg.k},
    {"omega", cfg.omega},
    {"rho_percent", cfg.rho_percent},
    {"lr", cfg.lr},
    {"epochs", cfg.epochs},
    {"loss_mode", dsf_loss_mode_name(cfg.loss_mode)},
    {"similarity_mode", similarity_mode_name(cfg.similarity_mode)},
    {"nll_diag_eps", cfg.nll_diag_eps},
  };
  j["net"] = net_to_json(model.net, model.params, model.seed);
  return j;
}

DsfModel dsf_from_json(const nlohmann::json & j, DsfTrainConfig * cfg)
{
  if (j.value("format", "") != "dtf-dsf-checkpoint-v1") {
    throw ConfigError("dsf_from_json: unexpected checkpoint format");
  }
  DsfModel model;
  model.n = j.at("n").get<int>();
  model.dz = j.at("dz").get<int>();
  net_from_json(j.at("net"), model.net, model.params, model.seed);
  if (cfg != nullptr) {
    const auto & c = j.at("config");
    cfg->n = c.at("n").get<int>();
    cfg->hidden = c.at("hidden").get<int>();
    cfg->k = c.at("k").get<double>();
    cfg->omega = c.at("omega").get<double>();
    cfg->rho_percent = c.at("rho_percent").get<double>();
    cfg->lr = c.at("lr").get<double>();
    cfg->epochs = c.at("epochs").get<int>();
    cfg->loss_mode = dsf_loss_mode_from_name(c.at("loss_mode").get<std::string>());
    cfg->similarity_mode =
      similarity_mode_from_name(c.at("similarity_mode").get<std::string>());
    cfg->nll_diag_eps = c.at("nll_diag_eps").get<double>();
  }
  return model;
}

}  // namespace dtf
