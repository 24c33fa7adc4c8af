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

#include <algorithm>
#include <cmath>
#include <set>

#include <doctest.h>

#include "dtf/metrics.hpp"
#include "test_util.hpp"

using namespace dtf;
using dtf_test::random_trajectory;

namespace
{

Trajectory shifted(const Trajectory & t, double dx, double dy)
{
  Trajectory out = t;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out(r, 0) += dx;
    out(r, 1) += dy;
  }
  return out;
}

RouteClassifier classifier()
{
  return [](const Trajectory & t) { return classify_route(t); };
}

}  // namespace

TEST_CASE("clustering: a tiny radius leaves every example in its own set")
{
  Rng rng(1);
  std::vector<DataExample> data;
  for (int i = 0; i < 8; ++i) {
    data.push_back({random_trajectory(3, 2, rng), random_trajectory(2, 2, rng)});
  }
  const auto clusters = cluster_contexts(data, 1e-12);
  for (int i = 0; i < 8; ++i) {
    REQUIRE(clusters[i].members.size() == 1);
    CHECK(clusters[i].members[0] == i);
  }
}

TEST_CASE("clustering: identical contexts share their futures")
{
  Rng rng(2);
  const Trajectory h = random_trajectory(2, 2, rng);
  std::vector<DataExample> data = {
    {random_trajectory(3, 2, rng), h}, {random_trajectory(3, 2, rng), h}};
  const auto clusters = cluster_contexts(data, 1e-9);
  CHECK(clusters[0].members == std::vector<int>{0, 1});
  CHECK(clusters[1].members == std::vector<int>{0, 1});
}

TEST_CASE("clustering: membership is symmetric")
{
  Rng rng(3);
  std::vector<DataExample> data;
  for (int i = 0; i < 40; ++i) {
    data.push_back(
      {random_trajectory(3, 2, rng), random_trajectory(2, 2, rng, 0.08)});
  }
  const auto clusters = cluster_contexts(data, 0.15);
  for (int i = 0; i < 40; ++i) {
    for (int j : clusters[i].members) {
      const auto & back = clusters[j].members;
      CHECK(std::find(back.begin(), back.end(), i) != back.end());
    }
  }
}

TEST_CASE("clustering: crossroad contexts group futures from several routes")
{
  const Dataset data = generate(ScenarioConfig::balanced(), 400, 909);
  const auto examples = examples_of(data);
  const auto clusters = cluster_contexts(examples, 0.1);
  std::vector<int> distinct_routes;
  for (const auto & cluster : clusters) {
    std::set<Route> routes;
    for (int j : cluster.members) {
      routes.insert(data[j].route);
    }
    distinct_routes.push_back(static_cast<int>(routes.size()));
  }
  std::sort(distinct_routes.begin(), distinct_routes.end());
  CHECK(distinct_routes[distinct_routes.size() / 2] >= 2);
}

TEST_CASE("ade/fde: exact matches score zero")
{
  Rng rng(4);
  const std::vector<Trajectory> gt = {
    random_trajectory(3, 2, rng), random_trajectory(3, 2, rng)};
  const std::vector<Trajectory> samples = gt;
  CHECK(ade(gt, samples) == 0.0);
  CHECK(fde(gt, samples) == 0.0);
}

TEST_CASE("ade/fde: a constant offset scores its norm")
{
  Rng rng(5);
  const Trajectory gt = random_trajectory(3, 2, rng);
  const std::vector<Trajectory> samples = {shifted(gt, 0.3, -0.4)};
  CHECK(ade({gt}, samples) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fde({gt}, samples) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ade/fde: adding samples never hurts")
{
  Rng rng(6);
  std::vector<Trajectory> gt;
  for (int i = 0; i < 5; ++i) {
    gt.push_back(random_trajectory(3, 2, rng));
  }
  std::vector<Trajectory> samples = {random_trajectory(3, 2, rng)};
  double previous_ade = ade(gt, samples);
  double previous_fde = fde(gt, samples);
  for (int i = 0; i < 6; ++i) {
    samples.push_back(i % 2 == 0 ? samples[0] : random_trajectory(3, 2, rng));
    const double a = ade(gt, samples);
    const double f = fde(gt, samples);
    CHECK(a <= previous_ade + 1e-15);
    CHECK(f <= previous_fde + 1e-15);
    previous_ade = a;
    previous_fde = f;
  }
}

TEST_CASE("fde: ignores every step but the last")
{
  Rng rng(7);
  const Trajectory gt = random_trajectory(3, 2, rng);
  Trajectory scrambled = gt;
  scrambled(0, 0) += 100.0;
  scrambled(1, 1) -= 50.0;
  CHECK(fde({gt}, {scrambled}) == 0.0);
}

TEST_CASE("ade/fde: empty sample sets are an evaluation error")
{
  Rng rng(8);
  const std::vector<Trajectory> gt = {random_trajectory(3, 2, rng)};
  CHECK_THROWS_AS(ade(gt, {}), EvalError);
  CHECK_THROWS_AS(fde(gt, {}), EvalError);
  CHECK_THROWS_AS(asd({}), EvalError);
  CHECK_THROWS_AS(fsd({}), EvalError);
}

TEST_CASE("asd/fsd: duplicates and singletons score zero")
{
  Rng rng(9);
  const Trajectory t = random_trajectory(3, 2, rng);
  CHECK(asd({t, t}) == 0.0);
  CHECK(fsd({t, t}) == 0.0);
  CHECK(asd({t}) == 0.0);
  CHECK(fsd({t}) == 0.0);
}

TEST_CASE("asd/fsd: two samples at constant offset score its norm")
{
  Rng rng(10);
  const Trajectory t = random_trajectory(3, 2, rng);
  const std::vector<Trajectory> samples = {t, shifted(t, -0.6, 0.8)};
  CHECK(asd(samples) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fsd(samples) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("asd/fsd: translating every sample changes nothing")
{
  Rng rng(11);
  std::vector<Trajectory> samples;
  for (int i = 0; i < 6; ++i) {
    samples.push_back(random_trajectory(3, 2, rng));
  }
  const double base_asd = asd(samples);
  const double base_fsd = fsd(samples);
  std::vector<Trajectory> moved;
  for (const auto & s : samples) {
    moved.push_back(shifted(s, 12.3, -45.6));
  }
  CHECK(asd(moved) == doctest::Approx(base_asd).epsilon(1e-12));
  CHECK(fsd(moved) == doctest::Approx(base_fsd).epsilon(1e-12));
}

TEST_CASE("metrics: permutation of samples and ground truths changes nothing")
{
  Rng rng(12);
  std::vector<Trajectory> gt, samples;
  for (int i = 0; i < 5; ++i) {
    gt.push_back(random_trajectory(3, 2, rng));
    samples.push_back(random_trajectory(3, 2, rng));
  }
  const double a = ade(gt, samples);
  const double f = fde(gt, samples);
  const double s = asd(samples);
  std::reverse(gt.begin(), gt.end());
  std::reverse(samples.begin(), samples.end());
  CHECK(ade(gt, samples) == doctest::Approx(a).epsilon(1e-14));
  CHECK(fde(gt, samples) == doctest::Approx(f).epsilon(1e-14));
  CHECK(asd(samples) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("coverage: one sample per route is full coverage; unknowns are dropped")
{
  Trajectory forward(3, 2), left(3, 2), right(3, 2), still(3, 2);
  forward << 0, 0.5, 0, 1.0, 0, 1.5;
  left << -0.5, 0, -1.0, 0, -1.5, 0;
  right << 0.5, 0, 1.0, 0, 1.5, 0;
  still.setZero();
  CHECK(mode_coverage({forward, left, right}, classifier()) == 1.0);
  CHECK(mode_coverage({forward, forward}, classifier()) == doctest::Approx(1.0 / 3.0));
  CHECK(mode_coverage({still}, classifier()) == 0.0);
  CHECK(
    mode_coverage({forward, left, still}, classifier()) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("evaluate: deterministic forecasters give identical per-seed rows")
{
  const Dataset data = generate(ScenarioConfig::balanced(), 60, 515);
  const auto examples = examples_of(data);
  const auto clusters = cluster_contexts(examples, 0.1);

  // Echo a fixed subset of the dataset's own futures.
  const Forecaster forecaster = [&examples](const Trajectory &, int idx, std::uint64_t) {
    return std::vector<Trajectory>{examples[idx].x, examples[(idx + 7) % 60].x};
  };
  MetricsReport report;
  evaluate_over_seeds(
    report, "echo", 2, "balanced", examples, clusters, forecaster, {1, 2, 3, 4},
    classifier());
  REQUIRE(report.rows.size() == 5);  // four seeds plus the mean
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(report.rows[i].agg.ade == report.rows[0].agg.ade);
    CHECK(report.rows[i].agg.fde == report.rows[0].agg.fde);
    CHECK(report.rows[i].agg.asd == report.rows[0].agg.asd);
    CHECK(report.rows[i].agg.fsd == report.rows[0].agg.fsd);
  }
  CHECK(report.rows[4].seed_label == "mean");

  // Regenerating the whole report reproduces it byte for byte.
  MetricsReport again;
  evaluate_over_seeds(
    again, "echo", 2, "balanced", examples, clusters, forecaster, {1, 2, 3, 4},
    classifier());
  CHECK(report_to_csv(again) == report_to_csv(report));
}

TEST_CASE("evaluate: the diagnostic column accumulates per-context events")
{
  const Dataset data = generate(ScenarioConfig::balanced(), 10, 616);
  const auto examples = examples_of(data);
  const auto clusters = cluster_contexts(examples, 0.1);
  const Forecaster forecaster = [&examples](const Trajectory &, int idx, std::uint64_t) {
    return std::vector<Trajectory>{examples[idx].x};
  };
  const Diagnostic diagnostic = [](const std::vector<Trajectory> &) -> long { return 1; };
  MetricsReport report;
  evaluate_over_seeds(
    report, "echo", 1, "balanced", examples, clusters, forecaster, {5}, classifier(),
    diagnostic);
  CHECK(report.rows[0].agg.instability_events == 10);
}
