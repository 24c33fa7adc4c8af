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

#include "dtf/param_store.hpp"

#include <numeric>

namespace dtf
{

ParamEntry & ParamStore::add(const std::string & name, const std::vector<int> & shape)
{
  if (index_.count(name) > 0) {
    throw ConfigError("ParamStore: duplicate entry '" + name + "'");
  }
  long long count = 1;
  for (int d : shape) {
    if (d <= 0) {
      throw ConfigError("ParamStore: non-positive dimension in '" + name + "'");
    }
    count *= d;
  }
  index_[name] = entries_.size();
  entries_.push_back({name, shape, Eigen::VectorXd::Zero(count)});
  return entries_.back();
}

const ParamEntry & ParamStore::at(const std::string & name) const
{
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("ParamStore: unknown entry '" + name + "'");
  }
  return entries_[it->second];
}

ParamEntry & ParamStore::at(const std::string & name)
{
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw ConfigError("ParamStore: unknown entry '" + name + "'");
  }
  return entries_[it->second];
}

int ParamStore::scalar_count() const
{
  int total = 0;
  for (const auto & e : entries_) {
    total += e.size();
  }
  return total;
}

ParamStore ParamStore::zeros_like() const
{
  ParamStore out;
  for (const auto & e : entries_) {
    out.add(e.name, e.shape);
  }
  return out;
}

void ParamStore::set_zero()
{
  for (auto & e : entries_) {
    e.values.setZero();
  }
}

bool ParamStore::same_layout(const ParamStore & other) const
{
  if (entries_.size() != other.entries_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name ||
        entries_[i].shape != other.entries_[i].shape) {
      return false;
    }
  }
  return true;
}

}  // namespace dtf
