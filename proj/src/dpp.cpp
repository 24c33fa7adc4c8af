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

#include "dtf/dpp.hpp"

#include <cmath>
#include <limits>

#include "dtf/chi_squared.hpp"
#include "dtf/common.hpp"

namespace dtf
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_symmetric(const Eigen::MatrixXd & m, const char * where)
{
  if (m.rows() != m.cols()) {
    throw ConfigError(std::string(where) + ": matrix is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw ConfigError(std::string(where) + ": matrix is not symmetric");
  }
}

Eigen::MatrixXd submatrix(const Eigen::MatrixXd & m, const std::vector<int> & idx)
{
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = 0; b < idx.size(); ++b) {
      out(a, b) = m(idx[a], idx[b]);
    }
  }
  return out;
}

}  // namespace

std::string similarity_mode_name(SimilarityMode m)
{
  return m == SimilarityMode::kGaussian ? "gaussian" : "cosine";
}

SimilarityMode similarity_mode_from_name(const std::string & name)
{
  if (name == "gaussian") {
    return SimilarityMode::kGaussian;
  }
  if (name == "cosine") {
    return SimilarityMode::kCosine;
  }
  throw ConfigError("unknown similarity mode '" + name + "'");
}

Eigen::MatrixXd similarity_matrix(
  const std::vector<Trajectory> & trajectories, double k, SimilarityMode mode)
{
  const int n = static_cast<int>(trajectories.size());
  if (n < 1) {
    throw ConfigError("similarity_matrix: empty trajectory set");
  }
  for (const auto & t : trajectories) {
    if (t.rows() != trajectories[0].rows() || t.cols() != trajectories[0].cols()) {
      throw ConfigError("similarity_matrix: trajectories disagree in shape");
    }
  }
  std::vector<Eigen::VectorXd> flat(n);
  for (int i = 0; i < n; ++i) {
    flat[i] = flatten(trajectories[i]);
  }
  Eigen::MatrixXd s(n, n);
  if (mode == SimilarityMode::kGaussian) {
    for (int i = 0; i < n; ++i) {
      s(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) {
        const double d2 = (flat[i] - flat[j]).squaredNorm();
        const double v = std::exp(-k * d2);
        s(i, j) = v;
        s(j, i) = v;
      }
    }
  } else {
    std::vector<double> norm(n);
    for (int i = 0; i < n; ++i) {
      norm[i] = flat[i].norm();
      if (norm[i] == 0.0) {
        throw DomainError(
          "similarity_matrix: cosine of a zero-norm trajectory (index " + std::to_string(i) +
          ") is undefined");
      }
    }
    for (int i = 0; i < n; ++i) {
      s(i, i) = 1.0;
      for (int j = i + 1; j < n; ++j) {
        double v = flat[i].dot(flat[j]) / (norm[i] * norm[j]);
        v = std::min(1.0, std::max(-1.0, v));
        s(i, j) = v;
        s(j, i) = v;
      }
    }
  }
  return s;
}

QualityConfig QualityConfig::make(double omega, double rho_percent, int dz)
{
  if (omega <= 0.0) {
    throw ConfigError("QualityConfig: omega must be positive");
  }
  QualityConfig cfg;
  cfg.omega = omega;
  cfg.rho_percent = rho_percent;
  cfg.dz = dz;
  cfg.radius = sphere_radius(rho_percent, dz);
  return cfg;
}

Eigen::VectorXd quality_vector(
  const std::vector<Eigen::VectorXd> & latents, const QualityConfig & cfg)
{
  const double r2 = cfg.radius * cfg.radius;
  Eigen::VectorXd q(latents.size());
  for (std::size_t i = 0; i < latents.size(); ++i) {
    const double z2 = latents[i].squaredNorm();
    q[static_cast<Eigen::Index>(i)] = z2 <= r2 ? cfg.omega : cfg.omega * std::exp(r2 - z2);
  }
  return q;
}

DppKernel build_kernel(const Eigen::MatrixXd & similarity, const Eigen::VectorXd & quality)
{
  require_symmetric(similarity, "build_kernel");
  if (similarity.rows() != quality.size()) {
    throw ConfigError("build_kernel: similarity and quality dimensions disagree");
  }
  for (Eigen::Index i = 0; i < quality.size(); ++i) {
    if (!(quality[i] > 0.0)) {
      throw ConfigError("build_kernel: quality entries must be positive");
    }
  }
  DppKernel out;
  out.similarity = similarity;
  out.quality = quality;
  out.kernel = quality.asDiagonal() * similarity * quality.asDiagonal();
  return out;
}

double expected_cardinality(const Eigen::MatrixXd & kernel)
{
  require_symmetric(kernel, "expected_cardinality");
  const Eigen::Index n = kernel.rows();
  const Eigen::MatrixXd shifted = kernel + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd inv =
    Eigen::LDLT<Eigen::MatrixXd>(shifted).solve(Eigen::MatrixXd::Identity(n, n));
  const double value = static_cast<double>(n) - inv.trace();
  if (!std::isfinite(value)) {
    throw NumericError("expected_cardinality: non-finite result");
  }
  return std::min(static_cast<double>(n), std::max(0.0, value));
}

double diversity_loss(const Eigen::MatrixXd & kernel)
{
  return -expected_cardinality(kernel);
}

Eigen::MatrixXd diversity_loss_grad(const Eigen::MatrixXd & kernel)
{
  require_symmetric(kernel, "diversity_loss_grad");
  const Eigen::Index n = kernel.rows();
  const Eigen::MatrixXd shifted = kernel + Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd inv =
    Eigen::LDLT<Eigen::MatrixXd>(shifted).solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd grad = -(inv * inv);
  grad = 0.5 * (grad + grad.transpose()).eval();
  if (!grad.allFinite()) {
    throw NumericError("diversity_loss_grad: non-finite entries");
  }
  return grad;
}

double log_det_symmetric(const Eigen::MatrixXd & m)
{
  if (m.rows() == 0) {
    return 0.0;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
  const Eigen::VectorXd d = ldlt.vectorD();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) {
      return -kInf;
    }
    log_det += std::log(d[i]);
  }
  return log_det;
}

double dpp_log_likelihood(const Eigen::MatrixXd & kernel, const std::vector<int> & subset)
{
  require_symmetric(kernel, "dpp_log_likelihood");
  const int n = static_cast<int>(kernel.rows());
  std::vector<bool> seen(n, false);
  for (int i : subset) {
    if (i < 0 || i >= n) {
      throw ConfigError("dpp_log_likelihood: subset index out of range");
    }
    if (seen[i]) {
      throw ConfigError("dpp_log_likelihood: repeated subset index");
    }
    seen[i] = true;
  }
  const double log_det_norm =
    log_det_symmetric(kernel + Eigen::MatrixXd::Identity(n, n));
  if (subset.empty()) {
    return -log_det_norm;
  }
  return log_det_symmetric(submatrix(kernel, subset)) - log_det_norm;
}

double nll_loss(const Eigen::MatrixXd & kernel, double diag_eps)
{
  require_symmetric(kernel, "nll_loss");
  const Eigen::Index n = kernel.rows();
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const double log_det_l = log_det_symmetric(kernel + diag_eps * identity);
  const double log_det_norm = log_det_symmetric(kernel + identity);
  return log_det_norm - log_det_l;
}

std::vector<int> greedy_map(
  const Eigen::MatrixXd & kernel, int max_items, bool stop_on_negative_gain)
{
  require_symmetric(kernel, "greedy_map");
  const int n = static_cast<int>(kernel.rows());
  const int cap = max_items > 0 ? std::min(max_items, n) : n;

  std::vector<int> selected;
  std::vector<bool> taken(n, false);

  // First pick: argmax of the singleton log det, taken unconditionally
  // so a forecast is never empty.
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (kernel(i, i) > kernel(best, best)) {
      best = i;
    }
  }
  selected.push_back(best);
  taken[best] = true;
  double log_det_current =
    kernel(best, best) > 0.0 ? std::log(kernel(best, best)) : -kInf;

  while (static_cast<int>(selected.size()) < cap) {
    int best_item = -1;
    double best_log_det = -kInf;
    for (int c = 0; c < n; ++c) {
      if (taken[c]) {
        continue;
      }
      std::vector<int> candidate = selected;
      candidate.push_back(c);
      const double ld = log_det_symmetric(submatrix(kernel, candidate));
      if (best_item < 0 || ld > best_log_det) {
        best_item = c;
        best_log_det = ld;
      }
    }
    if (best_item < 0) {
      break;
    }
    const double gain = best_log_det - log_det_current;
    if (stop_on_negative_gain && !(gain >= 0.0)) {
      break;
    }
    selected.push_back(best_item);
    taken[best_item] = true;
    log_det_current = best_log_det;
  }
  return selected;
}

}  // namespace dtf
