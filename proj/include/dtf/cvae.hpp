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

#ifndef DTF_CVAE_HPP_
#define DTF_CVAE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtf/dense_net.hpp"
#include "dtf/types.hpp"

namespace dtf
{

struct CvaeConfig
{
  int dz = 2;            // latent dimensions
  int hidden = 128;      // hidden layer width for encoder and decoder
  double beta = 0.1;     // KL weight
  int epochs = 500;
  int batch_size = 32;
  double lr = 1e-4;
  int v_samples = 1;     // posterior samples per example per visit
};

/// Conditional VAE over futures given pasts. The encoder maps
/// [flatten(x); flatten(h)] to 2*dz outputs (mean and log scale heads);
/// the decoder maps [z; flatten(h)] to the flattened future.
struct CvaeModel
{
  DenseNet encoder_net;
  DenseNet decoder_net;
  ParamStore encoder;
  ParamStore decoder;
  int dz = 0;
  double beta = 0.0;
  int t_steps = 0;
  int h_steps = 0;
  int dims = 0;
  std::uint64_t seed = 0;

  int context_dim() const { return h_steps * dims; }
  int future_dim() const { return t_steps * dims; }
};

/// Diagonal Gaussian posterior. Scales are stored as log sigma clamped
/// to [-10, 10] and exponentiated on read, so sigma is always positive.
struct Posterior
{
  Eigen::VectorXd mu;
  Eigen::VectorXd log_sigma;

  Eigen::VectorXd sigma() const { return log_sigma.array().exp().matrix(); }
};

CvaeModel make_cvae(
  const CvaeConfig & cfg, int t_steps, int h_steps, int dims, std::uint64_t seed);

Posterior encode(const CvaeModel & model, const Trajectory & x, const Trajectory & h);

/// z = mu + sigma (.) noise; the caller supplies standard-normal noise.
Eigen::VectorXd reparameterize(const Posterior & post, const Eigen::VectorXd & noise);

Trajectory decode(const CvaeModel & model, const Eigen::VectorXd & z, const Trajectory & h);

/// Loss = (1/V) sum_v |x_v~ - x|^2 - beta/dz * sum_j (1 + 2 log s_j - m_j^2 - s_j^2),
/// the negated per-example training objective. Gradients flow through
/// the reparameterization into both networks and are accumulated into
/// the provided stores (pass nullptr to skip).
double elbo_loss(
  const CvaeModel & model, const DataExample & example,
  const std::vector<Eigen::VectorXd> & noises,
  ParamStore * encoder_grads, ParamStore * decoder_grads);

struct TrainTrace
{
  std::vector<double> epoch_loss;
};

CvaeModel train_cvae(
  const std::vector<DataExample> & dataset, const CvaeConfig & cfg, std::uint64_t seed,
  TrainTrace * trace = nullptr);

/// Baseline forecaster: decode n latent codes drawn from the standard
/// normal prior with the given seed.
std::vector<Trajectory> forecast_random(
  const CvaeModel & model, const Trajectory & h, int n, std::uint64_t seed);

nlohmann::json cvae_to_json(const CvaeModel & model);
CvaeModel cvae_from_json(const nlohmann::json & j);

}  // namespace dtf

#endif  // DTF_CVAE_HPP_
