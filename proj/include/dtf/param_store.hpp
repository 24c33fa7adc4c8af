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

#ifndef DTF_PARAM_STORE_HPP_
#define DTF_PARAM_STORE_HPP_

#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "dtf/common.hpp"

namespace dtf
{

struct ParamEntry
{
  std::string name;
  std::vector<int> shape;
  Eigen::VectorXd values;  // flat, row-major over the shape

  int size() const { return static_cast<int>(values.size()); }
};

/// Named parameter tensors with deterministic (insertion) iteration
/// order, so serialized checkpoints round-trip bit-exactly.
class ParamStore
{
public:
  ParamEntry & add(const std::string & name, const std::vector<int> & shape);

  bool has(const std::string & name) const { return index_.count(name) > 0; }
  const ParamEntry & at(const std::string & name) const;
  ParamEntry & at(const std::string & name);

  const ParamEntry & entry(std::size_t i) const { return entries_[i]; }
  ParamEntry & entry(std::size_t i) { return entries_[i]; }
  std::size_t size() const { return entries_.size(); }

  /// Total number of scalar parameters.
  int scalar_count() const;

  /// A store with the same names/shapes, all values zero.
  ParamStore zeros_like() const;
  void set_zero();

  /// True when every entry matches `other` in name and shape.
  bool same_layout(const ParamStore & other) const;

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

private:
  std::vector<ParamEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dtf

#endif  // DTF_PARAM_STORE_HPP_
