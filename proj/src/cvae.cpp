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

#include "dtf/cvae.hpp"

#include <cmath>

#include "dtf/common.hpp"
#include "dtf/checkpoint.hpp"

namespace dtf
{

namespace
{

constexpr double kLogSigmaClamp = 10.0;

Eigen::VectorXd concat(const Eigen::VectorXd & a, const Eigen::VectorXd & b)
{
  Eigen::VectorXd out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

}  // namespace

CvaeModel make_cvae(
  const CvaeConfig & cfg, int t_steps, int h_steps, int dims, std::uint64_t seed)
{
  if (cfg.dz <= 0 || cfg.hidden <= 0) {
    throw ConfigError("make_cvae: dz and hidden width must be positive");
  }
  CvaeModel model;
  model.dz = cfg.dz;
  model.beta = cfg.beta;
  model.t_steps = t_steps;
  model.h_steps = h_steps;
  model.dims = dims;
  model.seed = seed;
  model.encoder_net.layer_dims = {
    t_steps * dims + h_steps * dims, cfg.hidden, 2 * cfg.dz};
  model.decoder_net.layer_dims = {cfg.dz + h_steps * dims, cfg.hidden, t_steps * dims};
  Rng rng(Rng::derive(seed, SeedStream::kInit));
  model.encoder = init_params(model.encoder_net, rng);
  model.decoder = init_params(model.decoder_net, rng);
  return model;
}

Posterior encode(const CvaeModel & model, const Trajectory & x, const Trajectory & h)
{
  if (x.rows() != model.t_steps || x.cols() != model.dims ||
      h.rows() != model.h_steps || h.cols() != model.dims) {
    throw ConfigError("encode: example shape does not match model dims");
  }
  const Eigen::VectorXd out =
    forward(model.encoder_net, model.encoder, concat(flatten(x), flatten(h)));
  Posterior post;
  post.mu = out.head(model.dz);
  post.log_sigma = out.tail(model.dz)
                     .cwiseMax(-kLogSigmaClamp)
                     .cwiseMin(kLogSigmaClamp);
  return post;
}

Eigen::VectorXd reparameterize(const Posterior & post, const Eigen::VectorXd & noise)
{
  return post.mu + post.sigma().cwiseProduct(noise);
}

Trajectory decode(const CvaeModel & model, const Eigen::VectorXd & z, const Trajectory & h)
{
  if (z.size() != model.dz || h.rows() != model.h_steps || h.cols() != model.dims) {
    throw ConfigError("decode: latent/context shape does not match model dims");
  }
  const Eigen::VectorXd out =
    forward(model.decoder_net, model.decoder, concat(z, flatten(h)));
  return unflatten(out, model.t_steps, model.dims);
}

double elbo_loss(
  const CvaeModel & model, const DataExample & example,
  const std::vector<Eigen::VectorXd> & noises,
  ParamStore * encoder_grads, ParamStore * decoder_grads)
{
  if (noises.empty()) {
    throw ConfigError("elbo_loss: need at least one posterior sample");
  }
  const int dz = model.dz;
  const double v_count = static_cast<double>(noises.size());

  const Eigen::VectorXd x_flat = flatten(example.x);
  const Eigen::VectorXd h_flat = flatten(example.h);
  const Eigen::VectorXd enc_in = concat(x_flat, h_flat);

  ForwardTrace enc_trace;
  const Eigen::VectorXd enc_out =
    forward(model.encoder_net, model.encoder, enc_in, enc_trace);
  const Eigen::VectorXd mu = enc_out.head(dz);
  const Eigen::VectorXd log_sigma_raw = enc_out.tail(dz);
  Eigen::VectorXd log_sigma(dz);
  Eigen::VectorXd clamp_mask(dz);
  for (int j = 0; j < dz; ++j) {
    if (log_sigma_raw[j] > kLogSigmaClamp) {
      log_sigma[j] = kLogSigmaClamp;
      clamp_mask[j] = 0.0;
    } else if (log_sigma_raw[j] < -kLogSigmaClamp) {
      log_sigma[j] = -kLogSigmaClamp;
      clamp_mask[j] = 0.0;
    } else {
      log_sigma[j] = log_sigma_raw[j];
      clamp_mask[j] = 1.0;
    }
  }
  const Eigen::VectorXd sigma = log_sigma.array().exp().matrix();

  double recon = 0.0;
  Eigen::VectorXd grad_mu = Eigen::VectorXd::Zero(dz);
  Eigen::VectorXd grad_log_sigma = Eigen::VectorXd::Zero(dz);

  for (const auto & noise : noises) {
    if (noise.size() != dz) {
      throw ConfigError("elbo_loss: noise dimension does not match dz");
    }
    const Eigen::VectorXd z = mu + sigma.cwiseProduct(noise);
    const Eigen::VectorXd dec_in = concat(z, h_flat);
    ForwardTrace dec_trace;
    const Eigen::VectorXd y =
      forward(model.decoder_net, model.decoder, dec_in, dec_trace);
    const Eigen::VectorXd diff = y - x_flat;
    recon += diff.squaredNorm() / v_count;

    if (encoder_grads != nullptr || decoder_grads != nullptr) {
      const Eigen::VectorXd grad_y = (2.0 / v_count) * diff;
      ParamStore scratch;
      ParamStore & dec_sink =
        decoder_grads != nullptr ? *decoder_grads
                                 : (scratch = model.decoder.zeros_like());
      const Eigen::VectorXd grad_dec_in = backward_from_trace(
        model.decoder_net, model.decoder, dec_in, dec_trace, grad_y, dec_sink);
      const Eigen::VectorXd grad_z = grad_dec_in.head(dz);
      grad_mu += grad_z;
      grad_log_sigma += grad_z.cwiseProduct(sigma.cwiseProduct(noise));
    }
  }

  // Per-dimension KL expression of the objective: 1 + 2 log s - m^2 - s^2.
  double kl_expr = 0.0;
  for (int j = 0; j < dz; ++j) {
    kl_expr += 1.0 + 2.0 * log_sigma[j] - mu[j] * mu[j] - sigma[j] * sigma[j];
  }
  const double kl_scale = model.beta / static_cast<double>(dz);
  const double loss = recon - kl_scale * kl_expr;
  if (!std::isfinite(loss)) {
    throw OptimError("elbo_loss: non-finite loss");
  }

  if (encoder_grads != nullptr) {
    for (int j = 0; j < dz; ++j) {
      grad_mu[j] += 2.0 * kl_scale * mu[j];
      grad_log_sigma[j] += 2.0 * kl_scale * (sigma[j] * sigma[j] - 1.0);
    }
    Eigen::VectorXd enc_upstream(2 * dz);
    enc_upstream.head(dz) = grad_mu;
    enc_upstream.tail(dz) = grad_log_sigma.cwiseProduct(clamp_mask);
    backward_from_trace(
      model.encoder_net, model.encoder, enc_in, enc_trace, enc_upstream, *encoder_grads);
  }
  return loss;
}

CvaeModel train_cvae(
  const std::vector<DataExample> & dataset, const CvaeConfig & cfg, std::uint64_t seed,
  TrainTrace * trace)
{
  if (dataset.empty()) {
    throw ConfigError("train_cvae: empty dataset");
  }
  const int t_steps = static_cast<int>(dataset[0].x.rows());
  const int h_steps = static_cast<int>(dataset[0].h.rows());
  const int dims = static_cast<int>(dataset[0].x.cols());
  for (const auto & ex : dataset) {
    if (ex.x.rows() != t_steps || ex.x.cols() != dims ||
        ex.h.rows() != h_steps || ex.h.cols() != dims) {
      throw ConfigError("train_cvae: dataset examples disagree in shape");
    }
  }

  CvaeModel model = make_cvae(cfg, t_steps, h_steps, dims, seed);
  AdamState enc_state = make_adam_state(model.encoder);
  AdamState dec_state = make_adam_state(model.decoder);
  AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};

  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = static_cast<int>(i);
  }
  ParamStore enc_grads = model.encoder.zeros_like();
  ParamStore dec_grads = model.decoder.zeros_like();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng shuffle_rng(Rng::derive(seed, SeedStream::kShuffle, epoch));
    shuffle_indices(order, shuffle_rng);
    Rng noise_rng(Rng::derive(seed, SeedStream::kNoise, epoch));

    double epoch_loss = 0.0;
    std::size_t start = 0;
    while (start < order.size()) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double batch_n = static_cast<double>(end - start);
      enc_grads.set_zero();
      dec_grads.set_zero();
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        std::vector<Eigen::VectorXd> noises(cfg.v_samples);
        for (auto & n : noises) {
          n = noise_rng.normal_vector(cfg.dz);
        }
        batch_loss +=
          elbo_loss(model, dataset[order[b]], noises, &enc_grads, &dec_grads);
      }
      // Mean over the batch.
      for (std::size_t i = 0; i < enc_grads.size(); ++i) {
        enc_grads.entry(i).values /= batch_n;
      }
      for (std::size_t i = 0; i < dec_grads.size(); ++i) {
        dec_grads.entry(i).values /= batch_n;
      }
      adam_step(model.encoder, enc_grads, enc_state, adam);
      adam_step(model.decoder, dec_grads, dec_state, adam);
      epoch_loss += batch_loss;
      start = end;
    }
    epoch_loss /= static_cast<double>(dataset.size());
    if (!std::isfinite(epoch_loss)) {
      throw OptimError("train_cvae: diverged at epoch " + std::to_string(epoch + 1));
    }
    if (trace != nullptr) {
      trace->epoch_loss.push_back(epoch_loss);
    }
  }
  return model;
}

std::vector<Trajectory> forecast_random(
  const CvaeModel & model, const Trajectory & h, int n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(std::max(0, n));
  for (int i = 0; i < n; ++i) {
    out.push_back(decode(model, rng.normal_vector(model.dz), h));
  }
  return out;
}

nlohmann::json cvae_to_json(const CvaeModel & model)
{
  nlohmann::json j;
  j["format"] = "dtf-cvae-checkpoint-v1";
  j["dz"] = model.dz;
  j["beta"] = model.beta;
  j["t_steps"] = model.t_steps;
  j["h_steps"] = model.h_steps;
  j["dims"] = model.dims;
  j["encoder"] = net_to_json(model.encoder_net, model.encoder, model.seed);
  j["decoder"] = net_to_json(model.decoder_net, model.decoder, model.seed);
  return j;
}

CvaeModel cvae_from_json(const nlohmann::json & j)
{
  if (j.value("format", "") != "dtf-cvae-checkpoint-v1") {
    throw ConfigError("cvae_from_json: unexpected checkpoint format");
  }
  CvaeModel model;
  model.dz = j.at("dz").get<int>();
  model.beta = j.at("beta").get<double>();
  model.t_steps = j.at("t_steps").get<int>();
  model.h_steps = j.at("h_steps").get<int>();
  model.dims = j.at("dims").get<int>();
  net_from_json(j.at("encoder"), model.encoder_net, model.encoder, model.seed);
  net_from_json(j.at("decoder"), model.decoder_net, model.decoder, model.seed);
  return model;
}

}  // namespace dtf
