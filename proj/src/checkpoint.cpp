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

#include "dtf/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace dtf
{

nlohmann::json params_to_json(const ParamStore & params)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto & e : params) {
    nlohmann::json entry;
    entry["name"] = e.name;
    entry["shape"] = e.shape;
    entry["data"] = std::vector<double>(e.values.data(), e.values.data() + e.values.size());
    arr.push_back(std::move(entry));
  }
  return arr;
}

ParamStore params_from_json(const nlohmann::json & j)
{
  ParamStore params;
  for (const auto & entry : j) {
    const auto shape = entry.at("shape").get<std::vector<int>>();
    auto & e = params.add(entry.at("name").get<std::string>(), shape);
    const auto data = entry.at("data").get<std::vector<double>>();
    if (static_cast<int>(data.size()) != e.size()) {
      throw ConfigError("checkpoint: data length does not match shape for '" + e.name + "'");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      e.values[static_cast<Eigen::Index>(i)] = data[i];
    }
  }
  return params;
}

nlohmann::json net_to_json(const DenseNet & net, const ParamStore & params, std::uint64_t seed)
{
  nlohmann::json j;
  j["layer_dims"] = net.layer_dims;
  j["hidden_activation"] = activation_name(net.hidden_activation);
  j["output_activation"] = activation_name(net.output_activation);
  j["seed"] = seed;
  j["params"] = params_to_json(params);
  return j;
}

void net_from_json(
  const nlohmann::json & j, DenseNet & net, ParamStore & params, std::uint64_t & seed)
{
  net.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  net.hidden_activation = activation_from_name(j.at("hidden_activation").get<std::string>());
  net.output_activation = activation_from_name(j.at("output_activation").get<std::string>());
  net.validate();
  seed = j.at("seed").get<std::uint64_t>();
  params = params_from_json(j.at("params"));
}

void write_file_atomic(const std::string & path, const std::string & content)
{
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw ConfigError("cannot open for writing: " + tmp);
    }
    out << content;
    out.flush();
    if (!out) {
      throw ConfigError("write failed: " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open for reading: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_json(const std::string & path, const nlohmann::json & j)
{
  write_file_atomic(path, j.dump(2) + "\n");
}

nlohmann::json load_json(const std::string & path)
{
  return nlohmann::json::parse(read_file(path));
}

}  // namespace dtf
