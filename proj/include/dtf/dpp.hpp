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

#ifndef DTF_DPP_HPP_
#define DTF_DPP_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dtf/types.hpp"

namespace dtf
{

enum class SimilarityMode { kGaussian, kCosine };

std::string similarity_mode_name(SimilarityMode m);
SimilarityMode similarity_mode_from_name(const std::string & name);

/// Pairwise similarity of flattened trajectories.
/// Gaussian: S_ij = exp(-k * d^2), d the Euclidean distance, so
/// 0 < S_ij <= 1 with unit diagonal and S positive definite.
/// Cosine: cosine of the angle between flattened trajectories, in
/// [-1, 1]; positive semidefinite as a Gram matrix of unit vectors.
/// Throws DomainError in cosine mode if any trajectory has zero norm.
Eigen::MatrixXd similarity_matrix(
  const std::vector<Trajectory> & trajectories, double k, SimilarityMode mode);

/// Per-item quality derived from latent position: flat omega inside the
/// sphere of radius `radius`, omega * exp(R^2 - |z|^2) outside. The two
/// branches agree on the boundary.
struct QualityConfig
{
  double omega = 1.0;
  double rho_percent = 90.0;
  int dz = 2;
  double radius = 0.0;  // derived from rho_percent and dz

  static QualityConfig make(double omega, double rho_percent, int dz);
};

Eigen::VectorXd quality_vector(
  const std::vector<Eigen::VectorXd> & latents, const QualityConfig & cfg);

/// Quality-diversity decomposition L = Diag(r) * S * Diag(r).
struct DppKernel
{
  Eigen::MatrixXd similarity;  // S, N x N
  Eigen::VectorXd quality;     // r, length N, all positive
  Eigen::MatrixXd kernel;      // L, N x N
};

DppKernel build_kernel(const Eigen::MatrixXd & similarity, const Eigen::VectorXd & quality);

/// Expected size of a random subset under the DPP with kernel L:
/// sum_n lambda_n / (lambda_n + 1) = trace(I - (L + I)^-1).
/// Computed via the trace form (LDLT solve); result clamped to [0, N].
double expected_cardinality(const Eigen::MatrixXd & kernel);

/// Negated expected cardinality. Finite for any finite PSD kernel,
/// including kernels with duplicated rows.
double diversity_loss(const Eigen::MatrixXd & kernel);

/// d(diversity_loss)/dL = -(L + I)^-2, symmetric.
Eigen::MatrixXd diversity_loss_grad(const Eigen::MatrixXd & kernel);

/// log P(Y = subset) = log det(L_Y) - log det(L + I). The empty subset
/// gives -log det(L + I); a singular L_Y gives -infinity (probability
/// zero), never a crash.
double dpp_log_likelihood(const Eigen::MatrixXd & kernel, const std::vector<int> & subset);

/// Negative log likelihood of the full ground set with an optional
/// diagonal regularizer: -log det(L + eps I) + log det(L + I).
/// Non-finite returns are legal (duplicated rows with eps = 0 diverge);
/// callers must check.
double nll_loss(const Eigen::MatrixXd & kernel, double diag_eps = 0.0);

/// Greedy MAP inference: repeatedly add the item maximizing
/// log det(L_{Y + x}). The first item is always taken (the argmax of
/// L_ii), so the result is never empty; afterwards selection stops when
/// the best marginal gain is negative (if `stop_on_negative_gain`) or
/// when `max_items` items are selected (0 means no cap). Returned in
/// selection order.
std::vector<int> greedy_map(
  const Eigen::MatrixXd & kernel, int max_items = 0, bool stop_on_negative_gain = true);

/// log det of a symmetric positive definite matrix, or -infinity when a
/// non-positive pivot shows the matrix is singular/indefinite.
double log_det_symmetric(const Eigen::MatrixXd & m);

}  // namespace dtf

#endif  // DTF_DPP_HPP_
