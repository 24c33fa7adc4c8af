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

#include "dtf/synthdata.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "dtf/common.hpp"
#include "dtf/rng.hpp"

namespace dtf
{

namespace
{

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string & line)
{
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  return fields;
}

}  // namespace

std::string route_name(Route r)
{
  switch (r) {
    case Route::kForward:
      return "forward";
    case Route::kLeft:
      return "left";
    case Route::kRight:
      return "right";
    default:
      return "unknown";
  }
}

Route route_from_name(const std::string & name)
{
  if (name == "forward") {
    return Route::kForward;
  }
  if (name == "left") {
    return Route::kLeft;
  }
  if (name == "right") {
    return Route::kRight;
  }
  if (name == "unknown") {
    return Route::kUnknown;
  }
  throw ConfigError("unknown route label '" + name + "'");
}

ScenarioConfig ScenarioConfig::balanced()
{
  return ScenarioConfig{};
}

ScenarioConfig ScenarioConfig::imbalanced()
{
  ScenarioConfig cfg;
  cfg.route_probs = {0.8, 0.1, 0.1};
  return cfg;
}

void ScenarioConfig::validate() const
{
  double sum = 0.0;
  for (double p : route_probs) {
    if (p < 0.0) {
      throw ConfigError("ScenarioConfig: negative route probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw ConfigError("ScenarioConfig: route probabilities must sum to 1");
  }
  if (noise_std < 0.0 || speed <= 0.0 || road_width <= 0.0) {
    throw ConfigError("ScenarioConfig: noise_std, speed, road_width must be valid");
  }
  if (h_steps < 1 || t_steps < 1 || dims != 2) {
    throw ConfigError("ScenarioConfig: scene requires h,t >= 1 and 2 coordinates");
  }
}

Dataset generate(const ScenarioConfig & cfg, int n, std::uint64_t seed)
{
  cfg.validate();
  if (n < 1) {
    throw ConfigError("generate: need at least one example");
  }
  Dataset out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng(Rng::derive(seed, SeedStream::kData, static_cast<std::uint64_t>(i)));

    const double u = rng.uniform();
    Route route = Route::kRight;
    if (u < cfg.route_probs[0]) {
      route = Route::kForward;
    } else if (u < cfg.route_probs[0] + cfg.route_probs[1]) {
      route = Route::kLeft;
    }

    // Approach from the south; the last past position lands at the
    // intersection center up to accumulated noise.
    Eigen::Vector2d pos(0.0, -cfg.speed * cfg.h_steps);
    Trajectory past(cfg.h_steps, 2);
    for (int t = 0; t < cfg.h_steps; ++t) {
      Eigen::Vector2d vel(0.0, cfg.speed);
      vel.x() += cfg.noise_std * rng.normal();
      vel.y() += cfg.noise_std * rng.normal();
      pos += vel;
      past.row(t) = pos;
    }

    Eigen::Vector2d route_vel(0.0, cfg.speed);
    if (route == Route::kLeft) {
      route_vel = {-cfg.speed, 0.0};
    } else if (route == Route::kRight) {
      route_vel = {cfg.speed, 0.0};
    }
    Trajectory future(cfg.t_steps, 2);
    for (int t = 0; t < cfg.t_steps; ++t) {
      Eigen::Vector2d vel = route_vel;
      vel.x() += cfg.noise_std * rng.normal();
      vel.y() += cfg.noise_std * rng.normal();
      pos += vel;
      future.row(t) = pos;
    }

    out.push_back({i, route, {future, past}});
  }
  return out;
}

Route classify_route(const Trajectory & future)
{
  if (future.rows() < 1 || future.cols() != 2) {
    throw ConfigError("classify_route: expected a (steps x 2) trajectory");
  }
  const Eigen::Vector2d final_pos = future.row(future.rows() - 1);
  if (final_pos.norm() < 1e-12) {
    return Route::kUnknown;
  }
  // Angle from the +y approach axis; positive toward -x (a left turn).
  const double angle = std::atan2(-final_pos.x(), final_pos.y());
  if (std::abs(angle) <= kPi / 3.0) {
    return Route::kForward;
  }
  return angle > 0.0 ? Route::kLeft : Route::kRight;
}

Route classify_route(const DataExample & example)
{
  return classify_route(example.x);
}

std::vector<DataExample> examples_of(const Dataset & dataset)
{
  std::vector<DataExample> out;
  out.reserve(dataset.size());
  for (const auto & rec : dataset) {
    out.push_back(rec.example);
  }
  return out;
}

std::string dataset_to_csv(const Dataset & dataset, const std::string & split_tag)
{
  std::ostringstream out;
  for (const auto & rec : dataset) {
    out << rec.id << ',' << split_tag << ',' << route_name(rec.route);
    const Eigen::VectorXd past = flatten(rec.example.h);
    for (Eigen::Index i = 0; i < past.size(); ++i) {
      out << ',' << format_double(past[i]);
    }
    const Eigen::VectorXd future = flatten(rec.example.x);
    for (Eigen::Index i = 0; i < future.size(); ++i) {
      out << ',' << format_double(future[i]);
    }
    out << '\n';
  }
  return out.str();
}

Dataset dataset_from_csv(const std::string & text)
{
  Dataset out;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      throw ConfigError("dataset_from_csv: malformed record '" + line + "'");
    }
    // Coordinate count fixes H and T: fields are id, split, route,
    // then H*2 past values and T*2 future values with H = 2.
    const int coord_count = static_cast<int>(fields.size()) - 3;
    const int h_steps = 2;
    const int t_steps = coord_count / 2 - h_steps;
    if (t_steps < 1 || coord_count != 2 * (h_steps + t_steps)) {
      throw ConfigError("dataset_from_csv: unexpected field count");
    }
    LabeledExample rec;
    rec.id = std::stol(fields[0]);
    rec.route = route_from_name(fields[2]);
    Eigen::VectorXd past(h_steps * 2);
    for (int i = 0; i < h_steps * 2; ++i) {
      past[i] = std::stod(fields[3 + i]);
    }
    Eigen::VectorXd future(t_steps * 2);
    for (int i = 0; i < t_steps * 2; ++i) {
      future[i] = std::stod(fields[3 + h_steps * 2 + i]);
    }
    rec.example.h = unflatten(past, h_steps, 2);
    rec.example.x = unflatten(future, t_steps, 2);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace dtf
