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

#ifndef DTF_SYNTHDATA_HPP_
#define DTF_SYNTHDATA_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dtf/common.hpp"
#include "dtf/types.hpp"

namespace dtf
{

enum class Route { kForward = 0, kLeft = 1, kRight = 2, kUnknown = 3 };

std::string route_name(Route r);
Route route_from_name(const std::string & name);

/// 2D crossroad scene: a vehicle approaches the intersection center from
/// the south along the +y axis and then goes forward, left or right.
/// Left/right are axis-aligned 90-degree turns at the center.
struct ScenarioConfig
{
  std::array<double, 3> route_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  double noise_std = 0.05;  // std of the per-step velocity noise
  double speed = 0.5;       // distance per step
  double road_width = 2.0;
  int h_steps = 2;  // past length
  int t_steps = 3;  // future length
  int dims = 2;

  static ScenarioConfig balanced();
  static ScenarioConfig imbalanced();  // forward/left/right = 0.8/0.1/0.1

  void validate() const;
};

struct LabeledExample
{
  long id = 0;
  Route route = Route::kUnknown;
  DataExample example;
};

using Dataset = std::vector<LabeledExample>;

/// Simulates n examples. The past is the last h_steps positions before
/// the intersection center; the future follows the drawn route's
/// centerline with i.i.d. Gaussian velocity noise per step. Each example
/// draws from its own derived seed, so generation is deterministic and
/// order-independent.
Dataset generate(const ScenarioConfig & cfg, int n, std::uint64_t seed);

/// Route of a future trajectory from the direction of its final position
/// relative to the intersection center (angular thirds around the
/// approach axis). Near-zero displacement is unclassifiable.
Route classify_route(const Trajectory & future);
Route classify_route(const DataExample & example);

std::vector<DataExample> examples_of(const Dataset & dataset);

/// Line-delimited records: id,split,route,past coords,future coords with
/// round-trip decimal precision. Field order is fixed.
std::string dataset_to_csv(const Dataset & dataset, const std::string & split_tag);
Dataset dataset_from_csv(const std::string & text);

}  // namespace dtf

#endif  // DTF_SYNTHDATA_HPP_
