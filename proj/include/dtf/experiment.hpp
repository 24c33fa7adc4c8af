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

#ifndef DTF_EXPERIMENT_HPP_
#define DTF_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dtf/cvae.hpp"
#include "dtf/dsf.hpp"
#include "dtf/metrics.hpp"
#include "dtf/synthdata.hpp"

namespace dtf
{

struct DataConfig
{
  int n_train = 1100;
  int n_test = 1000;
};

struct EvalConfig
{
  double eps = 0.1;
  int seeds = 10;
  double omega_test = 1.0;
  int ldpp_pool = 100;
  std::vector<int> n_sweep = {2, 5, 10, 20, 50};
};

/// Everything a run needs, with defaults that reproduce the reference
/// experiments. Serializes to JSON and round-trips exactly; manifests
/// echo the full resolved config.
struct ExperimentConfig
{
  std::string regime = "balanced";  // balanced | imbalanced
  std::uint64_t seed = 7;
  std::string out_dir = "out";
  ScenarioConfig scenario;  // route probabilities come from `regime`
  DataConfig data;
  CvaeConfig cvae;
  DsfTrainConfig dsf;
  EvalConfig eval;

  /// Scenario with route probabilities resolved from the regime tag.
  ScenarioConfig resolved_scenario() const;
  void validate() const;

  bool operator==(const ExperimentConfig & other) const;
};

nlohmann::json config_to_json(const ExperimentConfig & cfg);
ExperimentConfig config_from_json(const nlohmann::json & j);

/// Method registry for evaluation and training variants.
const std::vector<std::string> & known_methods();

/// Checkpoint key for a sampler variant: "dsf", "dsf-nll", "dsf-cos" (or
/// "dsf-nll-cos") depending on loss and similarity modes.
std::string dsf_variant_key(const DsfTrainConfig & cfg);

struct Paths
{
  std::string out_dir;

  std::string train_data() const { return out_dir + "/train.csv"; }
  std::string test_data() const { return out_dir + "/test.csv"; }
  std::string manifest() const { return out_dir + "/dataset_manifest.json"; }
  std::string checkpoint(const std::string & key) const
  {
    return out_dir + "/" + key + ".ckpt.json";
  }
  std::string trace(const std::string & key) const
  {
    return out_dir + "/" + key + ".trace.csv";
  }
  std::string dsf_sweep_checkpoint(int n) const
  {
    return out_dir + "/dsf-n" + std::to_string(n) + ".ckpt.json";
  }
  std::string report() const { return out_dir + "/report.csv"; }
  std::string trajectories_export() const { return out_dir + "/plots/trajectories.csv"; }
  std::string ade_vs_n_export() const { return out_dir + "/plots/ade_vs_n.csv"; }
};

/// gen-data: write train/test record files plus a manifest echoing the
/// resolved config.
void run_gen_data(const ExperimentConfig & cfg);

/// train: stage is cvae, dsf or mcl. The dsf stage trains the variant
/// selected by cfg.dsf (writing dsf/dsf-nll/dsf-cos checkpoints); with
/// `n_sweep` it additionally trains one sampler per budget in
/// cfg.eval.n_sweep. Writes checkpoints plus per-epoch loss traces.
void run_train(const ExperimentConfig & cfg, const std::string & stage, bool n_sweep = false);

/// evaluate: one report covering all requested methods, per-seed rows
/// plus means. Instability events are columns, not crashes.
void run_evaluate(const ExperimentConfig & cfg, const std::vector<std::string> & methods);

/// export-plots: per-context forecasted trajectories (method-labelled)
/// and the ADE-versus-budget sweep for dsf and cvae.
void run_export_plots(const ExperimentConfig & cfg);

}  // namespace dtf

#endif  // DTF_EXPERIMENT_HPP_
