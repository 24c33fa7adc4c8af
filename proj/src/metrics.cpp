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

#include "dtf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "dtf/common.hpp"

namespace dtf
{

namespace
{

// Mean over steps of the per-step Euclidean distance.
double mean_step_distance(const Trajectory & a, const Trajectory & b)
{
  double total = 0.0;
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    total += (a.row(t) - b.row(t)).norm();
  }
  return total / static_cast<double>(a.rows());
}

double final_step_distance(const Trajectory & a, const Trajectory & b)
{
  return (a.row(a.rows() - 1) - b.row(b.rows() - 1)).norm();
}

std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<GroundTruthSet> cluster_contexts(
  const std::vector<DataExample> & dataset, double eps)
{
  if (eps <= 0.0) {
    throw ConfigError("cluster_contexts: eps must be positive");
  }
  const int n = static_cast<int>(dataset.size());
  std::vector<Eigen::VectorXd> contexts(n);
  for (int i = 0; i < n; ++i) {
    contexts[i] = flatten(dataset[i].h);
  }
  std::vector<GroundTruthSet> out(n);
  for (int i = 0; i < n; ++i) {
    out[i].anchor = i;
    for (int j = 0; j < n; ++j) {
      if ((contexts[j] - contexts[i]).norm() <= eps) {
        out[i].members.push_back(j);
      }
    }
  }
  return out;
}

double ade(const std::vector<Trajectory> & gt_futures, const std::vector<Trajectory> & samples)
{
  if (gt_futures.empty() || samples.empty()) {
    throw EvalError("ade: needs non-empty ground truth and sample sets");
  }
  double total = 0.0;
  for (const auto & gt : gt_futures) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto & sample : samples) {
      best = std::min(best, mean_step_distance(sample, gt));
    }
    total += best;
  }
  return total / static_cast<double>(gt_futures.size());
}

double fde(const std::vector<Trajectory> & gt_futures, const std::vector<Trajectory> & samples)
{
  if (gt_futures.empty() || samples.empty()) {
    throw EvalError("fde: needs non-empty ground truth and sample sets");
  }
  double total = 0.0;
  for (const auto & gt : gt_futures) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto & sample : samples) {
      best = std::min(best, final_step_distance(sample, gt));
    }
    total += best;
  }
  return total / static_cast<double>(gt_futures.size());
}

double asd(const std::vector<Trajectory> & samples)
{
  if (samples.empty()) {
    throw EvalError("asd: empty sample set");
  }
  if (samples.size() == 1) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) {
        best = std::min(best, mean_step_distance(samples[i], samples[j]));
      }
    }
    total += best;
  }
  return total / static_cast<double>(samples.size());
}

double fsd(const std::vector<Trajectory> & samples)
{
  if (samples.empty()) {
    throw EvalError("fsd: empty sample set");
  }
  if (samples.size() == 1) {
    return 0.0;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (j != i) {
        best = std::min(best, final_step_distance(samples[i], samples[j]));
      }
    }
    total += best;
  }
  return total / static_cast<double>(samples.size());
}

double mode_coverage(
  const std::vector<Trajectory> & samples, const RouteClassifier & classifier)
{
  std::set<Route> seen;
  for (const auto & sample : samples) {
    const Route r = classifier(sample);
    if (r != Route::kUnknown) {
      seen.insert(r);
    }
  }
  return static_cast<double>(seen.size()) / 3.0;
}

MetricsAggregate evaluate_forecaster(
  const std::vector<DataExample> & dataset, const std::vector<GroundTruthSet> & clusters,
  const Forecaster & forecaster, std::uint64_t seed, const RouteClassifier & classifier,
  const Diagnostic & diagnostic)
{
  if (dataset.empty()) {
    throw EvalError("evaluate_forecaster: empty dataset");
  }
  if (clusters.size() != dataset.size()) {
    throw ConfigError("evaluate_forecaster: cluster list does not match dataset");
  }
  MetricsAggregate agg;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto samples =
      forecaster(dataset[i].h, static_cast<int>(i), seed + static_cast<std::uint64_t>(i));
    std::vector<Trajectory> gt_futures;
    gt_futures.reserve(clusters[i].members.size());
    for (int j : clusters[i].members) {
      gt_futures.push_back(dataset[j].x);
    }
    agg.ade += ade(gt_futures, samples);
    agg.fde += fde(gt_futures, samples);
    agg.asd += asd(samples);
    agg.fsd += fsd(samples);
    agg.coverage += mode_coverage(samples, classifier);
    if (diagnostic) {
      agg.instability_events += diagnostic(samples);
    }
  }
  const double count = static_cast<double>(dataset.size());
  agg.ade /= count;
  agg.fde /= count;
  agg.asd /= count;
  agg.fsd /= count;
  agg.coverage /= count;
  return agg;
}

void evaluate_over_seeds(
  MetricsReport & report, const std::string & method, int n, const std::string & regime,
  const std::vector<DataExample> & dataset, const std::vector<GroundTruthSet> & clusters,
  const Forecaster & forecaster, const std::vector<std::uint64_t> & seeds,
  const RouteClassifier & classifier, const Diagnostic & diagnostic)
{
  if (seeds.empty()) {
    throw ConfigError("evaluate_over_seeds: need at least one seed");
  }
  MetricsAggregate mean;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const MetricsAggregate agg =
      evaluate_forecaster(dataset, clusters, forecaster, seeds[s], classifier, diagnostic);
    report.rows.push_back({method, n, regime, std::to_string(s), agg});
    mean.ade += agg.ade;
    mean.fde += agg.fde;
    mean.asd += agg.asd;
    mean.fsd += agg.fsd;
    mean.coverage += agg.coverage;
    mean.instability_events += agg.instability_events;
  }
  const double count = static_cast<double>(seeds.size());
  mean.ade /= count;
  mean.fde /= count;
  mean.asd /= count;
  mean.fsd /= count;
  mean.coverage /= count;
  report.rows.push_back({method, n, regime, "mean", mean});
}

std::string report_to_csv(const MetricsReport & report)
{
  std::ostringstream out;
  out << "method,n,regime,seed,ade,fde,asd,fsd,coverage,instability_events\n";
  for (const auto & row : report.rows) {
    out << row.method << ',' << row.n << ',' << row.regime << ',' << row.seed_label << ','
        << format_double(row.agg.ade) << ',' << format_double(row.agg.fde) << ','
        << format_double(row.agg.asd) << ',' << format_double(row.agg.fsd) << ','
        << format_double(row.agg.coverage) << ',' << row.agg.instability_events << '\n';
  }
  return out.str();
}

}  // namespace dtf
