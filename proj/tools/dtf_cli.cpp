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

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtf/checkpoint.hpp"
#include "dtf/common.hpp"
#include "dtf/experiment.hpp"

namespace
{

dtf::ExperimentConfig resolve_config(
  const std::string & config_path, bool have_seed, std::uint64_t seed,
  const std::string & out_dir, const std::string & regime)
{
  dtf::ExperimentConfig cfg;
  if (!config_path.empty()) {
    cfg = dtf::config_from_json(dtf::load_json(config_path));
  }
  if (have_seed) {
    cfg.seed = seed;
  }
  if (!out_dir.empty()) {
    cfg.out_dir = out_dir;
  }
  if (!regime.empty()) {
    cfg.regime = regime;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Diverse trajectory forecasting experiments (crossroad scene)"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::string out_dir;
  std::string regime;
  std::uint64_t seed = 0;
  bool have_seed = false;
  app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--regime", regime, "data regime: balanced|imbalanced (overrides config)");
  app.add_option("--seed", seed, "base seed (overrides config)")
    ->each([&have_seed](const std::string &) { have_seed = true; });

  auto * gen = app.add_subcommand("gen-data", "generate train/test datasets and a manifest");

  auto * train = app.add_subcommand("train", "train a model stage");
  std::string stage;
  bool n_sweep = false;
  std::string loss_mode;
  std::string similarity_mode;
  train->add_option("--stage", stage, "cvae | dsf | mcl")->required();
  train->add_flag(
    "--n-sweep", n_sweep, "also train one sampler per budget in eval.n_sweep (dsf stage)");
  train->add_option("--loss-mode", loss_mode, "override dsf loss mode: cardinality|nll");
  train->add_option(
    "--similarity-mode", similarity_mode, "override dsf similarity mode: gaussian|cosine");

  auto * evaluate = app.add_subcommand("evaluate", "evaluate methods into report.csv");
  std::vector<std::string> methods;
  evaluate->add_option("--methods", methods, "methods to evaluate")
    ->delimiter(',')
    ->required();

  auto * export_plots =
    app.add_subcommand("export-plots", "export trajectory samples and the ADE-vs-budget sweep");

  try {
    app.parse(argc, argv);
    dtf::ExperimentConfig cfg =
      resolve_config(config_path, have_seed, seed, out_dir, regime);

    if (gen->parsed()) {
      dtf::run_gen_data(cfg);
    } else if (train->parsed()) {
      if (!loss_mode.empty()) {
        cfg.dsf.loss_mode = dtf::dsf_loss_mode_from_name(loss_mode);
      }
      if (!similarity_mode.empty()) {
        cfg.dsf.similarity_mode = dtf::similarity_mode_from_name(similarity_mode);
      }
      dtf::run_train(cfg, stage, n_sweep);
    } else if (evaluate->parsed()) {
      dtf::run_evaluate(cfg, methods);
    } else if (export_plots->parsed()) {
      dtf::run_export_plots(cfg);
    }
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const dtf::ConfigError & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const dtf::NumericError & e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const std::exception & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
