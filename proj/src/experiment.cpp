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

#include "dtf/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "dtf/checkpoint.hpp"
#include "dtf/common.hpp"

namespace dtf
{

namespace
{

std::string format_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Stage seeds keep the init streams of the different models apart.
constexpr std::uint64_t kCvaeStage = 100;
constexpr std::uint64_t kDsfStage = 200;
constexpr std::uint64_t kMclStage = 300;
constexpr std::uint64_t kSweepStage = 400;

std::uint64_t stage_seed(const ExperimentConfig & cfg, std::uint64_t stage)
{
  return Rng::derive(cfg.seed, SeedStream::kInit, stage);
}

std::string trace_to_csv(const TrainTrace & trace)
{
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t i = 0; i < trace.epoch_loss.size(); ++i) {
    out << (i + 1) << ',' << format_double(trace.epoch_loss[i]) << '\n';
  }
  return out.str();
}

Dataset load_dataset(const std::string & path)
{
  return dataset_from_csv(read_file(path));
}

CvaeModel load_cvae_checkpoint(const Paths & paths)
{
  const std::string path = paths.checkpoint("cvae");
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing cvae checkpoint: " + path + " (run `train --stage cvae`)");
  }
  return cvae_from_json(load_json(path));
}

DsfModel load_dsf_checkpoint(
  const std::string & path, DsfTrainConfig * cfg_out)
{
  if (!std::filesystem::exists(path)) {
    throw ConfigError("missing sampler checkpoint: " + path + " (run `train --stage dsf`)");
  }
  return dsf_from_json(load_json(path), cfg_out);
}

std::vector<std::uint64_t> eval_seeds(const ExperimentConfig & cfg)
{
  std::vector<std::uint64_t> seeds;
  seeds.reserve(cfg.eval.seeds);
  for (int j = 0; j < cfg.eval.seeds; ++j) {
    seeds.push_back(Rng::derive(cfg.seed, SeedStream::kEval, j));
  }
  return seeds;
}

}  // namespace

ScenarioConfig ExperimentConfig::resolved_scenario() const
{
  ScenarioConfig s = scenario;
  if (regime == "balanced") {
    s.route_probs = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  } else if (regime == "imbalanced") {
    s.route_probs = {0.8, 0.1, 0.1};
  } else {
    throw ConfigError("unknown data regime '" + regime + "' (balanced|imbalanced)");
  }
  return s;
}

void ExperimentConfig::validate() const
{
  resolved_scenario().validate();
  if (data.n_train < 1 || data.n_test < 1) {
    throw ConfigError("config: dataset sizes must be positive");
  }
  if (eval.eps <= 0.0 || eval.seeds < 1 || eval.ldpp_pool < 1 || eval.n_sweep.empty()) {
    throw ConfigError("config: invalid evaluation settings");
  }
}

bool ExperimentConfig::operator==(const ExperimentConfig & other) const
{
  return config_to_json(*this) == config_to_json(other);
}

nlohmann::json config_to_json(const ExperimentConfig & cfg)
{
  nlohmann::json j;
  j["regime"] = cfg.regime;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  j["scenario"] = {
    {"noise_std", cfg.scenario.noise_std},
    {"speed", cfg.scenario.speed},
    {"road_width", cfg.scenario.road_width},
    {"h_steps", cfg.scenario.h_steps},
    {"t_steps", cfg.scenario.t_steps},
  };
  j["data"] = {{"n_train", cfg.data.n_train}, {"n_test", cfg.data.n_test}};
  j["cvae"] = {
    {"dz", cfg.cvae.dz},
    {"hidden", cfg.cvae.hidden},
    {"beta", cfg.cvae.beta},
    {"epochs", cfg.cvae.epochs},
    {"batch_size", cfg.cvae.batch_size},
    {"lr", cfg.cvae.lr},
    {"v_samples", cfg.cvae.v_samples},
  };
  j["dsf"] = {
    {"n", cfg.dsf.n},
    {"hidden", cfg.dsf.hidden},
    {"k", cfg.dsf.k},
    {"omega", cfg.dsf.omega},
    {"rho_percent", cfg.dsf.rho_percent},
    {"lr", cfg.dsf.lr},
    {"epochs", cfg.dsf.epochs},
    {"loss_mode", dsf_loss_mode_name(cfg.dsf.loss_mode)},
    {"similarity_mode", similarity_mode_name(cfg.dsf.similarity_mode)},
    {"nll_diag_eps", cfg.dsf.nll_diag_eps},
  };
  j["eval"] = {
    {"eps", cfg.eval.eps},
    {"seeds", cfg.eval.seeds},
    {"omega_test", cfg.eval.omega_test},
    {"ldpp_pool", cfg.eval.ldpp_pool},
    {"n_sweep", cfg.eval.n_sweep},
  };
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json & j)
{
  ExperimentConfig cfg;
  cfg.regime = j.value("regime", cfg.regime);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("scenario")) {
    const auto & s = j.at("scenario");
    cfg.scenario.noise_std = s.value("noise_std", cfg.scenario.noise_std);
    cfg.scenario.speed = s.value("speed", cfg.scenario.speed);
    cfg.scenario.road_width = s.value("road_width", cfg.scenario.road_width);
    cfg.scenario.h_steps = s.value("h_steps", cfg.scenario.h_steps);
    cfg.scenario.t_steps = s.value("t_steps", cfg.scenario.t_steps);
  }
  if (j.contains("data")) {
    cfg.data.n_train = j.at("data").value("n_train", cfg.data.n_train);
    cfg.data.n_test = j.at("data").value("n_test", cfg.data.n_test);
  }
  if (j.contains("cvae")) {
    const auto & c = j.at("cvae");
    cfg.cvae.dz = c.value("dz", cfg.cvae.dz);
    cfg.cvae.hidden = c.value("hidden", cfg.cvae.hidden);
    cfg.cvae.beta = c.value("beta", cfg.cvae.beta);
    cfg.cvae.epochs = c.value("epochs", cfg.cvae.epochs);
    cfg.cvae.batch_size = c.value("batch_size", cfg.cvae.batch_size);
    cfg.cvae.lr = c.value("lr", cfg.cvae.lr);
    cfg.cvae.v_samples = c.value("v_samples", cfg.cvae.v_samples);
  }
  if (j.contains("dsf")) {
    const auto & d = j.at("dsf");
    cfg.dsf.n = d.value("n", cfg.dsf.n);
    cfg.dsf.hidden = d.value("hidden", cfg.dsf.hidden);
    cfg.dsf.k = d.value("k", cfg.dsf.k);
    cfg.dsf.omega = d.value("omega", cfg.dsf.omega);
    cfg.dsf.rho_percent = d.value("rho_percent", cfg.dsf.rho_percent);
    cfg.dsf.lr = d.value("lr", cfg.dsf.lr);
    cfg.dsf.epochs = d.value("epochs", cfg.dsf.epochs);
    cfg.dsf.loss_mode =
      dsf_loss_mode_from_name(d.value("loss_mode", dsf_loss_mode_name(cfg.dsf.loss_mode)));
    cfg.dsf.similarity_mode = similarity_mode_from_name(
      d.value("similarity_mode", similarity_mode_name(cfg.dsf.similarity_mode)));
    cfg.dsf.nll_diag_eps = d.value("nll_diag_eps", cfg.dsf.nll_diag_eps);
  }
  if (j.contains("eval")) {
    const auto & e = j.at("eval");
    cfg.eval.eps = e.value("eps", cfg.eval.eps);
    cfg.eval.seeds = e.value("seeds", cfg.eval.seeds);
    cfg.eval.omega_test = e.value("omega_test", cfg.eval.omega_test);
    cfg.eval.ldpp_pool = e.value("ldpp_pool", cfg.eval.ldpp_pool);
    cfg.eval.n_sweep = e.value("n_sweep", cfg.eval.n_sweep);
  }
  cfg.validate();
  return cfg;
}

const std::vector<std::string> & known_methods()
{
  static const std::vector<std::string> methods = {
    "dsf", "cvae", "mcl", "dsf-nll", "dsf-cos", "cvae-ldpp"};
  return methods;
}

std::string dsf_variant_key(const DsfTrainConfig & cfg)
{
  std::string key = "dsf";
  if (cfg.loss_mode == DsfLossMode::kNll) {
    key += "-nll";
  }
  if (cfg.similarity_mode == SimilarityMode::kCosine) {
    key += "-cos";
  }
  return key;
}

void run_gen_data(const ExperimentConfig & cfg)
{
  cfg.validate();
  const Paths paths{cfg.out_dir};
  std::filesystem::create_directories(cfg.out_dir);
  const ScenarioConfig scenario = cfg.resolved_scenario();

  const Dataset train =
    generate(scenario, cfg.data.n_train, Rng::derive(cfg.seed, SeedStream::kData, 0));
  const Dataset test =
    generate(scenario, cfg.data.n_test, Rng::derive(cfg.seed, SeedStream::kData, 1));

  write_file_atomic(paths.train_data(), dataset_to_csv(train, "train"));
  write_file_atomic(paths.test_data(), dataset_to_csv(test, "test"));

  nlohmann::json manifest;
  manifest["command"] = "gen-data";
  manifest["config"] = config_to_json(cfg);
  manifest["train_records"] = train.size();
  manifest["test_records"] = test.size();
  save_json(paths.manifest(), manifest);
}

void run_train(const ExperimentConfig & cfg, const std::string & stage, bool n_sweep)
{
  cfg.validate();
  const Paths paths{cfg.out_dir};
  if (!std::filesystem::exists(paths.train_data())) {
    throw ConfigError("missing dataset: " + paths.train_data() + " (run `gen-data` first)");
  }
  const std::vector<DataExample> train = examples_of(load_dataset(paths.train_data()));

  if (stage == "cvae") {
    TrainTrace trace;
    const CvaeModel model =
      train_cvae(train, cfg.cvae, stage_seed(cfg, kCvaeStage), &trace);
    save_json(paths.checkpoint("cvae"), cvae_to_json(model));
    write_file_atomic(paths.trace("cvae"), trace_to_csv(trace));
    return;
  }

  const CvaeModel cvae = load_cvae_checkpoint(paths);

  if (stage == "dsf") {
    const std::string key = dsf_variant_key(cfg.dsf);
    TrainTrace trace;
    long events = 0;
    const DsfModel model =
      train_dsf(train, cvae, cfg.dsf, stage_seed(cfg, kDsfStage), &trace, &events);
    save_json(paths.checkpoint(key), dsf_to_json(model, cfg.dsf));
    write_file_atomic(paths.trace(key), trace_to_csv(trace));
    if (n_sweep) {
      for (int n : cfg.eval.n_sweep) {
        DsfTrainConfig sweep_cfg = cfg.dsf;
        sweep_cfg.n = n;
        TrainTrace sweep_trace;
        const DsfModel sweep_model = train_dsf(
          train, cvae, sweep_cfg, stage_seed(cfg, kSweepStage + n), &sweep_trace, nullptr);
        save_json(paths.dsf_sweep_checkpoint(n), dsf_to_json(sweep_model, sweep_cfg));
      }
    }
    return;
  }

  if (stage == "mcl") {
    TrainTrace trace;
    const DsfModel model =
      train_mcl(train, cvae, cfg.dsf, stage_seed(cfg, kMclStage), &trace);
    save_json(paths.checkpoint("mcl"), dsf_to_json(model, cfg.dsf));
    write_file_atomic(paths.trace("mcl"), trace_to_csv(trace));
    return;
  }

  throw ConfigError("unknown training stage '" + stage + "' (cvae|dsf|mcl)");
}

void run_evaluate(const ExperimentConfig & cfg, const std::vector<std::string> & methods)
{
  cfg.validate();
  if (methods.empty()) {
    throw ConfigError("evaluate: no methods requested");
  }
  for (const auto & m : methods) {
    if (std::find(known_methods().begin(), known_methods().end(), m) ==
        known_methods().end()) {
      std::string valid;
      for (const auto & k : known_methods()) {
        valid += valid.empty() ? k : ", " + k;
      }
      throw ConfigError("unknown method '" + m + "'; valid methods: " + valid);
    }
  }
  const Paths paths{cfg.out_dir};
  if (!std::filesystem::exists(paths.test_data())) {
    throw ConfigError("missing dataset: " + paths.test_data() + " (run `gen-data` first)");
  }
  const std::vector<DataExample> test = examples_of(load_dataset(paths.test_data()));
  const auto clusters = cluster_contexts(test, cfg.eval.eps);
  const auto seeds = eval_seeds(cfg);
  const RouteClassifier classifier = [](const Trajectory & t) { return classify_route(t); };
  const CvaeModel cvae = load_cvae_checkpoint(paths);
  const int budget = cfg.dsf.n;

  MetricsReport report;
  for (const auto & method : methods) {
    Forecaster forecaster;
    Diagnostic diagnostic = nullptr;

    if (method == "cvae") {
      forecaster = [&cvae, budget](const Trajectory & h, int, std::uint64_t seed) {
        return forecast_random(cvae, h, budget, seed);
      };
    } else if (method == "cvae-ldpp") {
      const DsfTrainConfig ldpp_cfg = cfg.dsf;
      const int pool = cfg.eval.ldpp_pool;
      forecaster = [&cvae, pool, ldpp_cfg, budget](
                     const Trajectory & h, int, std::uint64_t seed) {
        return forecast_cvae_ldpp(cvae, h, pool, budget, ldpp_cfg, seed);
      };
    } else {
      // Sampler-based methods evaluate their full decoded ground set.
      const std::string key = method == "mcl" ? "mcl" : method;
      auto model = std::make_shared<DsfModel>();
      auto model_cfg = std::make_shared<DsfTrainConfig>();
      *model = load_dsf_checkpoint(paths.checkpoint(key), model_cfg.get());
      if (model->n != budget) {
        throw ConfigError(
          "checkpoint " + paths.checkpoint(key) + " was trained with budget " +
          std::to_string(model->n) + " but config asks for " + std::to_string(budget));
      }
      forecaster = [model, &cvae](const Trajectory & h, int, std::uint64_t) {
        return ground_set(*model, cvae, h);
      };
      if (model_cfg->loss_mode == DsfLossMode::kNll) {
        const double diag_eps = model_cfg->nll_diag_eps;
        const double k = model_cfg->k;
        const SimilarityMode mode = model_cfg->similarity_mode;
        diagnostic = [diag_eps, k, mode](const std::vector<Trajectory> & samples) -> long {
          const Eigen::MatrixXd s = similarity_matrix(samples, k, mode);
          return std::isfinite(nll_loss(s, diag_eps)) ? 0 : 1;
        };
      }
    }
    evaluate_over_seeds(
      report, method, budget, cfg.regime, test, clusters, forecaster, seeds, classifier,
      diagnostic);
  }
  write_file_atomic(paths.report(), report_to_csv(report));
}

void run_export_plots(const ExperimentConfig & cfg)
{
  cfg.validate();
  const Paths paths{cfg.out_dir};
  if (!std::filesystem::exists(paths.test_data())) {
    throw ConfigError("missing dataset: " + paths.test_data() + " (run `gen-data` first)");
  }
  std::filesystem::create_directories(cfg.out_dir + "/plots");
  const std::vector<DataExample> test = examples_of(load_dataset(paths.test_data()));
  const auto clusters = cluster_contexts(test, cfg.eval.eps);
  const auto seeds = eval_seeds(cfg);
  const CvaeModel cvae = load_cvae_checkpoint(paths);
  const int budget = cfg.dsf.n;

  DsfTrainConfig dsf_cfg;
  const DsfModel dsf = load_dsf_checkpoint(paths.checkpoint("dsf"), &dsf_cfg);
  if (dsf.n != budget) {
    throw ConfigError("export-plots: dsf checkpoint budget does not match config");
  }

  // Per-context forecast samples, labelled by method.
  {
    std::ostringstream out;
    out << "method,context,sample";
    const int t_steps = static_cast<int>(test[0].x.rows());
    const int dims = static_cast<int>(test[0].x.cols());
    for (int t = 0; t < t_steps; ++t) {
      for (int d = 0; d < dims; ++d) {
        out << ",step" << t << (d == 0 ? "_x" : "_y");
      }
    }
    out << '\n';
    const auto emit = [&out](
                        const std::string & method, int ctx,
                        const std::vector<Trajectory> & samples) {
      for (std::size_t s = 0; s < samples.size(); ++s) {
        out << method << ',' << ctx << ',' << s;
        const Eigen::VectorXd flat = flatten(samples[s]);
        for (Eigen::Index i = 0; i < flat.size(); ++i) {
          out << ',' << format_double(flat[i]);
        }
        out << '\n';
      }
    };
    for (std::size_t i = 0; i < test.size(); ++i) {
      emit("dsf", static_cast<int>(i), ground_set(dsf, cvae, test[i].h));
    }
    for (std::size_t i = 0; i < test.size(); ++i) {
      emit(
        "cvae", static_cast<int>(i),
        forecast_random(cvae, test[i].h, budget, seeds[0] + static_cast<std::uint64_t>(i)));
    }
    write_file_atomic(paths.trajectories_export(), out.str());
  }

  // ADE as a function of the sampling budget.
  {
    std::vector<int> sweep = cfg.eval.n_sweep;
    std::sort(sweep.begin(), sweep.end());
    const int max_n = sweep.back();

    std::ostringstream out;
    out << "# budget sweep " << '{';
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      out << (i == 0 ? "" : ",") << sweep[i];
    }
    out << "}: an approximate grid bracketing the default budget\n";
    out << "method,n,ade\n";

    // dsf: one trained sampler per budget.
    for (int n : sweep) {
      DsfTrainConfig sweep_cfg;
      const DsfModel model =
        load_dsf_checkpoint(paths.dsf_sweep_checkpoint(n), &sweep_cfg);
      double total = 0.0;
      for (std::size_t i = 0; i < test.size(); ++i) {
        std::vector<Trajectory> gt;
        gt.reserve(clusters[i].members.size());
        for (int j : clusters[i].members) {
          gt.push_back(test[j].x);
        }
        total += ade(gt, ground_set(model, cvae, test[i].h));
      }
      out << "dsf," << n << ',' << format_double(total / test.size()) << '\n';
    }

    // cvae: prefix-nested draws so the series is monotone by construction
    // (the budget-n set is the first n of the budget-max set).
    std::vector<double> cvae_totals(sweep.size(), 0.0);
    for (std::size_t i = 0; i < test.size(); ++i) {
      std::vector<Trajectory> gt;
      gt.reserve(clusters[i].members.size());
      for (int j : clusters[i].members) {
        gt.push_back(test[j].x);
      }
      for (std::uint64_t seed : seeds) {
        const auto samples =
          forecast_random(cvae, test[i].h, max_n, seed + static_cast<std::uint64_t>(i));
        for (std::size_t si = 0; si < sweep.size(); ++si) {
          const std::vector<Trajectory> prefix(
            samples.begin(), samples.begin() + sweep[si]);
          cvae_totals[si] += ade(gt, prefix);
        }
      }
    }
    for (std::size_t si = 0; si < sweep.size(); ++si) {
      out << "cvae," << sweep[si] << ','
          << format_double(cvae_totals[si] / (test.size() * seeds.size())) << '\n';
    }
    write_file_atomic(paths.ade_vs_n_export(), out.str());
  }
}

}  // namespace dtf
