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

#ifndef DTF_DSF_HPP_
#define DTF_DSF_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtf/cvae.hpp"
#include "dtf/dpp.hpp"

namespace dtf
{

enum class DsfLossMode { kCardinality, kNll };

std::string dsf_loss_mode_name(DsfLossMode m);
DsfLossMode dsf_loss_mode_from_name(const std::string & name);

struct DsfTrainConfig
{
  int n = 10;              // sampling budget
  int hidden = 128;
  double k = 1.0;          // similarity scale
  double omega = 1.0;      // base quality during training
  double rho_percent = 90.0;
  double lr = 1e-4;
  int epochs = 20;
  DsfLossMode loss_mode = DsfLossMode::kCardinality;
  SimilarityMode similarity_mode = SimilarityMode::kGaussian;
  double nll_diag_eps = 0.0;
};

/// Deterministic sampler: context features -> n latent codes, stacked
/// into one output vector of length n * dz (code i occupies elements
/// [i*dz, (i+1)*dz)).
struct DsfModel
{
  DenseNet net;
  ParamStore params;
  int n = 0;
  int dz = 0;
  std::uint64_t seed = 0;
};

DsfModel make_dsf(
  const CvaeModel & cvae, const DsfTrainConfig & cfg, std::uint64_t seed);

std::vector<Eigen::VectorXd> propose_latents(const DsfModel & model, const Trajectory & h);

/// Decode each proposed latent code with the (frozen) cVAE decoder.
std::vector<Trajectory> ground_set(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h);

struct DsfLoss
{
  double loss = 0.0;
  bool finite = true;
};

/// Evaluates the configured diversity loss on the decoded ground set and
/// backpropagates through kernel assembly, quality branches, similarity
/// terms and the frozen decoder into the sampler parameters only.
/// Gradients are accumulated into `grads`. When the loss is non-finite
/// (possible in NLL mode) no gradient is accumulated and finite=false.
DsfLoss dsf_loss_and_grad(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h,
  const DsfTrainConfig & cfg, ParamStore & grads);

/// Per-context gradient steps over the training set; only sampler
/// parameters are updated, the cVAE stays frozen. In NLL mode
/// non-finite losses are counted into `instability_events` and skipped;
/// in cardinality mode they raise OptimError.
DsfModel train_dsf(
  const std::vector<DataExample> & dataset, const CvaeModel & cvae,
  const DsfTrainConfig & cfg, std::uint64_t seed, TrainTrace * trace = nullptr,
  long * instability_events = nullptr);

/// Best-of-n regression loss: squared distance of the closest ground-set
/// trajectory to the true future. The gradient flows only through the
/// argmin sample, ties broken toward the lowest index.
double mcl_loss_and_grad(
  const DsfModel & model, const CvaeModel & cvae, const DataExample & example,
  ParamStore & grads);

/// Same sampler trained with mcl_loss_and_grad per example.
DsfModel train_mcl(
  const std::vector<DataExample> & dataset, const CvaeModel & cvae,
  const DsfTrainConfig & cfg, std::uint64_t seed, TrainTrace * trace = nullptr);

/// Ground set -> kernel (test-time base quality omega_test) -> greedy
/// MAP -> selected trajectories in selection order; size in [1, n].
std::vector<Trajectory> forecast_diverse(
  const DsfModel & model, const CvaeModel & cvae, const Trajectory & h,
  const DsfTrainConfig & cfg, double omega_test = 1.0);

/// Latent-space MAP selection behind forecast_cvae_ldpp: draw `pool`
/// prior latents, run greedy MAP on a DPP over the codes (Gaussian
/// similarity on latent distances, same quality sphere), keep
/// min(n, pool) of them.
std::vector<Eigen::VectorXd> ldpp_select_codes(
  int dz, int pool, int n, const DsfTrainConfig & cfg, std::uint64_t seed);

/// Baseline: decode ldpp_select_codes with the cVAE decoder.
std::vector<Trajectory> forecast_cvae_ldpp(
  const CvaeModel & cvae, const Trajectory & h, int pool, int n,
  const DsfTrainConfig & cfg, std::uint64_t seed);

nlohmann::json dsf_to_json(const DsfModel & model, const DsfTrainConfig & cfg);
DsfModel dsf_from_json(const nlohmann::json & j, DsfTrainConfig * cfg = nullptr);

}  // namespace dtf

#endif  // DTF_DSF_HPP_
