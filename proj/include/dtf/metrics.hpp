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

#ifndef DTF_METRICS_HPP_
#define DTF_METRICS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dtf/synthdata.hpp"
#include "dtf/types.hpp"

namespace dtf
{

/// Indices of examples whose context lies within eps of the anchor's
/// context; the anchor is always a member of its own set.
struct GroundTruthSet
{
  int anchor = 0;
  std::vector<int> members;
};

/// For each example i, collect every j with |h_j - h_i| <= eps
/// (flattened Euclidean norm over past trajectories only).
std::vector<GroundTruthSet> cluster_contexts(
  const std::vector<DataExample> & dataset, double eps);

/// Average displacement error: per ground-truth future, the mean-over-
/// steps distance to the closest sample; averaged over the set.
double ade(
  const std::vector<Trajectory> & gt_futures, const std::vector<Trajectory> & samples);

/// Final displacement error: closest sample by final-position distance.
double fde(
  const std::vector<Trajectory> & gt_futures, const std::vector<Trajectory> & samples);

/// Average self distance: mean over samples of the mean-over-steps
/// distance to the nearest other sample; 0 for a single sample.
double asd(const std::vector<Trajectory> & samples);

/// Final self distance: nearest-neighbor distance of final positions.
double fsd(const std::vector<Trajectory> & samples);

using RouteClassifier = std::function<Route(const Trajectory &)>;

/// Fraction of the three routes present among the classified samples;
/// unclassifiable samples count toward no route.
double mode_coverage(
  const std::vector<Trajectory> & samples, const RouteClassifier & classifier);

/// Forecaster under evaluation: (context, context index, seed) -> samples.
using Forecaster =
  std::function<std::vector<Trajectory>(const Trajectory &, int, std::uint64_t)>;

/// Optional per-context diagnostic, e.g. counting numerical blowups.
using Diagnostic = std::function<long(const std::vector<Trajectory> &)>;

struct MetricsAggregate
{
  double ade = 0.0;
  double fde = 0.0;
  double asd = 0.0;
  double fsd = 0.0;
  double coverage = 0.0;
  long instability_events = 0;
};

/// Runs the forecaster on every example, scores it against the example's
/// ground-truth set, and averages in example order (deterministic).
MetricsAggregate evaluate_forecaster(
  const std::vector<DataExample> & dataset, const std::vector<GroundTruthSet> & clusters,
  const Forecaster & forecaster, std::uint64_t seed, const RouteClassifier & classifier,
  const Diagnostic & diagnostic = nullptr);

struct ReportRow
{
  std::string method;
  int n = 0;
  std::string regime;
  std::string seed_label;  // seed index or "mean"
  MetricsAggregate agg;
};

struct MetricsReport
{
  std::vector<ReportRow> rows;
};

/// Evaluates over a seed list and appends one row per seed plus a mean
/// row. Deterministic forecasters simply yield identical per-seed rows.
void evaluate_over_seeds(
  MetricsReport & report, const std::string & method, int n, const std::string & regime,
  const std::vector<DataExample> & dataset, const std::vector<GroundTruthSet> & clusters,
  const Forecaster & forecaster, const std::vector<std::uint64_t> & seeds,
  const RouteClassifier & classifier, const Diagnostic & diagnostic = nullptr);

/// Fixed column order: method,n,regime,seed,ade,fde,asd,fsd,coverage,events.
std::string report_to_csv(const MetricsReport & report);

}  // namespace dtf

#endif  // DTF_METRICS_HPP_
