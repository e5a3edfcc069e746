/*
 * Copyright 2026 The recbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 data error, 4 one or more model failures (reports are still written).

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "recbench/dataset.h"
#include "recbench/errors.h"
#include "recbench/harness.h"
#include "recbench/model.h"
#include "recbench/parallel.h"

namespace {

using namespace recbench;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitModelFailure = 4;
constexpr const char* kOutDirEnv = "RECBENCH_OUT_DIR";

struct Flags {
  std::string config;
  std::vector<std::string> only;
  std::string out;
  int threads = 0;
  bool heavy = false;
  std::optional<std::uint64_t> seed_override;
  std::string bundle;  // report only
};

void Log(const std::string& message) { std::cerr << "[recbench] " << message << '\n'; }

void AddCommonFlags(CLI::App* cmd, Flags& f, bool config_required) {
  auto* config = cmd->add_option("--config", f.config, "Experiment configuration (JSON)");
  if (config_required) config->required();
  cmd->add_option("--only", f.only, "Restrict to these model names")->delimiter(',');
  cmd->add_option("--out", f.out, "Output directory (overrides $RECBENCH_OUT_DIR and config)");
  cmd->add_option("--threads", f.threads, "Worker threads; 1 selects the sequential code path")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--heavy", f.heavy, "Allow configs marked heavy");
  cmd->add_option("--seed-override", f.seed_override, "Replace every model seed");
}

Execution SetUpThreads(const Flags& f) {
  if (f.threads > 0) SetThreads(f.threads);
  return f.threads == 1 ? Execution::kSerial : Execution::kParallel;
}

ExperimentConfig PrepareConfig(const Flags& f) {
  ExperimentConfig config = LoadConfig(f.config);
  if (config.dataset.heavy && !f.heavy) {
    throw ConfigError("dataset " + config.dataset.name + " is marked heavy; pass --heavy to run it");
  }
  RestrictModels(config, f.only);
  if (f.seed_override) OverrideSeeds(config, *f.seed_override);
  if (!f.out.empty()) {
    config.output.directory = f.out;
  } else if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
    config.output.directory = env;
  }
  return config;
}

int FinishRun(const ReportBundle& bundle, const ExperimentConfig& config) {
  const auto written =
      EmitReports(bundle, config.output.directory, config.output.tsv, config.output.json);
  for (const auto& path : written) std::cout << path.string() << '\n';
  for (const auto& failure : bundle.failures) {
    Log("model " + failure.name + " failed (" + failure.kind + "): " + failure.message);
  }
  return bundle.failures.empty() ? kExitOk : kExitModelFailure;
}

int RunPrepare(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const EvaluationPack pack = LoadDataset(config.dataset);
  const auto dir = config.output.directory / "split";
  std::filesystem::create_directories(dir);
  WriteNcfSplit(pack, dir, config.dataset.name);
  std::cout << "users\t" << pack.num_users() << "\nitems\t" << pack.num_items()
            << "\ntrain_interactions\t" << pack.train.nnz() << "\ntest_users\t"
            << pack.tests.size() << "\ncandidates_per_user\t" << pack.candidate_count
            << "\ntrain_only_users\t" << pack.train_only_users.size() << "\nsplit_dir\t"
            << dir.string() << '\n';
  return kExitOk;
}

int RunTrain(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const Execution exec = SetUpThreads(f);
  const EvaluationPack pack = LoadDataset(config.dataset);
  const auto dir = config.output.directory / "models";
  std::filesystem::create_directories(dir);
  int status = kExitOk;
  for (const ModelSpec& spec : config.models) {
    Log("fitting " + spec.name);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const TrainedModel model = FitModel(spec, pack, exec);
      const double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      for (const auto& w : model.report().warnings) Log(spec.name + ": " + w);
      const auto path = dir / (spec.name + ".model");
      SaveModel(path, model);
      std::cout << spec.name << '\t' << path.string() << '\t' << seconds << "s\n";
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      Log("model " + spec.name + " failed: " + e.what());
      status = kExitModelFailure;
    }
  }
  return status;
}

int RunEvaluate(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const Execution exec = SetUpThreads(f);
  const auto start = std::chrono::steady_clock::now();
  const EvaluationPack pack = LoadDataset(config.dataset);
  std::vector<std::pair<ModelSpec, TrainedModel>> models;
  for (const ModelSpec& spec : config.models) {
    const auto path = config.output.directory / "models" / (spec.name + ".model");
    if (!std::filesystem::exists(path)) {
      throw DataError("no fitted model at " + path.string() + "; run `recbench train` first");
    }
    models.emplace_back(spec, LoadModel(path));
  }
  ReportBundle bundle = EvaluateModels(config, pack, models, exec);
  ComputeSignificance(bundle, config.evaluation.significance_metrics,
                      config.evaluation.significance_threshold);
  bundle.manifest = BuildManifest(
      config, bundle, exec,
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return FinishRun(bundle, config);
}

int RunCompare(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const Execution exec = SetUpThreads(f);
  const ReportBundle bundle = RunExperiment(config, exec, Log);
  return FinishRun(bundle, config);
}

ReportBundle ReadBundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read report bundle " + path.string());
  try {
    return BundleFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int RunSignificance(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const auto path = config.output.directory / (config.dataset.name + "_bundle.json");
  ReportBundle bundle = ReadBundle(path);
  if (bundle.results.size() < 2) {
    throw DataError(path.string() + " holds fewer than two models");
  }
  ComputeSignificance(bundle, config.evaluation.significance_metrics,
                      config.evaluation.significance_threshold);
  for (const auto& m : bundle.significance) {
    std::cout << m.metric << ": " << m.pair_count() << " pairs, threshold " << m.threshold
              << " (Bonferroni " << m.bonferroni_threshold() << ")\n";
  }
  return FinishRun(bundle, config);
}

int RunSweepCommand(const Flags& f) {
  const ExperimentConfig config = PrepareConfig(f);
  const Execution exec = SetUpThreads(f);
  const auto start = std::chrono::steady_clock::now();
  const EvaluationPack pack = LoadDataset(config.dataset);
  ReportBundle bundle;
  bundle.dataset = config.dataset.name;
  bundle.cutoff = config.evaluation.cutoff;
  bundle.metrics = config.evaluation.metrics;
  bool any = false;
  for (const ModelSpec& spec : config.models) {
    if (spec.sweep.empty()) continue;
    any = true;
    try {
      bundle.sweeps[spec.name] = RunSweep(config, spec, pack, exec, Log);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      bundle.failures.push_back({spec.name, "Error", e.what()});
    }
  }
  if (!any) throw ConfigError("no selected model defines a \"sweep\" list");
  bundle.manifest = BuildManifest(
      config, bundle, exec,
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return FinishRun(bundle, config);
}

int RunReport(const Flags& f) {
  std::filesystem::path bundle_path = f.bundle;
  std::filesystem::path out = f.out;
  if (bundle_path.empty()) {
    if (f.config.empty()) throw ConfigError("report needs --bundle or --config");
    const ExperimentConfig config = PrepareConfig(f);
    bundle_path = config.output.directory / (config.dataset.name + "_bundle.json");
    if (out.empty()) out = config.output.directory;
  }
  if (out.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    out = env != nullptr && *env != '\0' ? std::filesystem::path(env) : bundle_path.parent_path();
  }
  const ReportBundle bundle = ReadBundle(bundle_path);
  for (const auto& path : EmitReports(bundle, out, true, true)) std::cout << path.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recbench: implicit-feedback recommender benchmark"};
  app.require_subcommand(1);
  Flags flags;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
    bool config_required;
  };
  const Command commands[] = {
      {"prepare", "Load, split and validate the dataset; write it in NCF format", RunPrepare, true},
      {"train", "Fit models and store them under <out>/models", RunTrain, true},
      {"evaluate", "Score stored models and write metric tables", RunEvaluate, true},
      {"compare", "Fit and evaluate every model; write all tables", RunCompare, true},
      {"significance", "Recompute paired t-test matrices from a stored bundle", RunSignificance,
       true},
      {"sweep", "Embedding-size sweeps for MF and NeuMF", RunSweepCommand, true},
      {"report", "Re-emit every table from a stored bundle", RunReport, false},
  };
  std::vector<std::pair<CLI::App*, const Command*>> subcommands;
  for (const auto& c : commands) {
    CLI::App* cmd = app.add_subcommand(c.name, c.help);
    AddCommonFlags(cmd, flags, c.config_required);
    if (std::string(c.name) == "report") {
      cmd->add_option("--bundle", flags.bundle, "Path to <dataset>_bundle.json");
    }
    subcommands.emplace_back(cmd, &c);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  try {
    for (const auto& [cmd, c] : subcommands) {
      if (cmd->parsed()) return c->run(flags);
    }
  } catch (const ConfigError& e) {
    Log(std::string("configuration error: ") + e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    Log(std::string("data error: ") + e.what());
    return kExitData;
  } catch (const ParseError& e) {
    Log(std::string("data error: ") + e.what());
    return kExitData;
  } catch (const ProtocolError& e) {
    Log(std::string("data error: ") + e.what());
    return kExitData;
  } catch (const std::exception& e) {
    Log(std::string("error: ") + e.what());
    return 1;
  }
  return kExitConfig;
}
