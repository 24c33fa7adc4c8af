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

#ifndef DTF_CHECKPOINT_HPP_
#define DTF_CHECKPOINT_HPP_

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dtf/dense_net.hpp"
#include "dtf/param_store.hpp"

namespace dtf
{

// Checkpoints are JSON text. Parameters are stored as an ordered array
// of {name, shape, data} so ParamStore insertion order survives, and
// doubles are emitted with round-trip precision, so save -> load -> save
// reproduces the file byte for byte.

nlohmann::json params_to_json(const ParamStore & params);
ParamStore params_from_json(const nlohmann::json & j);

/// Serializes topology + parameters + creation seed.
nlohmann::json net_to_json(
  const DenseNet & net, const ParamStore & params, std::uint64_t seed);
void net_from_json(
  const nlohmann::json & j, DenseNet & net, ParamStore & params, std::uint64_t & seed);

/// Write-temp-then-rename so readers never observe partial files.
void write_file_atomic(const std::string & path, const std::string & content);
std::string read_file(const std::string & path);

void save_json(const std::string & path, const nlohmann::json & j);
nlohmann::json load_json(const std::string & path);

}  // namespace dtf

#endif  // DTF_CHECKPOINT_HPP_
