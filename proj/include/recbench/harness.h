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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recbench/dataset.h"
#include "recbench/metrics.h"
#include "recbench/model.h"
#include "recbench/parallel.h"
#include "recbench/significance.h"

namespace recbench {

struct DatasetSpec {
  std::string name;
  // "ncf_split": directory with <name>.train.rating / .test.rating /
  // .test.negative. "temporal_loo": a single interaction log.
  std::string split = "ncf_split";
  std::filesystem::path path;
  std::string format = "movielens_dat";  // temporal_loo only
  std::optional<double> binarize_threshold;
  std::size_t negatives = 100;
  std::uint64_t seed = 0;
  bool heavy = false;
};

struct ModelSpec {
  std::string name;
  Algorithm algorithm = Algorithm::kMostPop;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> sweep;  // embedding sizes, MF and NeuMF only
};

struct EvaluationSpec {
  std::size_t cutoff = 10;
  std::vector<std::string> metrics;  // table order; default all seventeen
  double head_fraction = 0.2;
  double significance_threshold = 0.05;
  std::vector<std::string> significance_metrics = {"HR", "nDCG"};
};

struct OutputSpec {
  std::filesystem::path directory = "out";
  bool tsv = true;
  bool json = true;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<ModelSpec> models;  // canonical algorithm order, then name
  EvaluationSpec evaluation;
  OutputSpec output;
  nlohmann::json raw;
};

// Relative paths resolve against `base_dir`. Throws ConfigError.
ExperimentConfig ParseConfig(const nlohmann::json& j,
                             const std::filesystem::path& base_dir);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// FNV-1a 64 of the compact JSON dump.
std::uint64_t ConfigHash(const nlohmann::json& j);
std::string Hex64(std::uint64_t value);

// Keeps only the named models; unknown names throw ConfigError.
void RestrictModels(ExperimentConfig& config, const std::vector<std::string>& only);
void OverrideSeeds(ExperimentConfig& config, std::uint64_t seed);

EvaluationPack LoadDataset(const DatasetSpec& spec);
// Files whose bytes define the dataset.
std::vector<std::filesystem::path> DatasetFiles(const DatasetSpec& spec);

// Fits one configured model. Unknown hyperparameters throw ConfigError.
TrainedModel FitModel(const ModelSpec& spec, const EvaluationPack& pack,
                      Execution exec);

struct ModelResult {
  std::string name;
  Algorithm algorithm = Algorithm::kMostPop;
  nlohmann::json hyperparameters;
  std::optional<std::uint64_t> seed;
  MetricReport metrics;
  std::vector<EpochRecord> trace;
  int best_epoch = -1;
  std::vector<std::string> warnings;
  nlohmann::json details;
  double fit_seconds = 0.0;
};

struct ModelFailure {
  std::string name;
  std::string kind;
  std::string message;
};

struct SweepPoint {
  std::size_t dimension = 0;
  double hr = 0.0;
  double ndcg = 0.0;
  int best_epoch = -1;
};

struct ReportBundle {
  std::string dataset;
  std::size_t cutoff = 10;
  std::vector<std::string> metrics;
  std::vector<ModelResult> results;
  std::vector<ModelFailure> failures;
  std::vector<SignificanceMatrix> significance;
  std::map<std::string, std::vector<SweepPoint>> sweeps;
  nlohmann::json manifest = nlohmann::json::object();
};

using ProgressFn = std::function<void(const std::string&)>;

// Fits and evaluates every configured model; failures are isolated and
// recorded. Significance matrices cover every successful model.
ReportBundle RunExperiment(const ExperimentConfig& config, Execution exec,
                           const ProgressFn& progress = {});
// Evaluates already fitted models.
ReportBundle EvaluateModels(const ExperimentConfig& config,
                            const EvaluationPack& pack,
                            const std::vector<std::pair<ModelSpec, TrainedModel>>& models,
                            Execution exec);
// One train/evaluate cycle per embedding size of `spec.sweep`.
std::vector<SweepPoint> RunSweep(const ExperimentConfig& config,
                                 const ModelSpec& spec,
                                 const EvaluationPack& pack, Execution exec,
                                 const ProgressFn& progress = {});

// Config hash, seeds, dataset fingerprints, failures and timing.
nlohmann::json BuildManifest(const ExperimentConfig& config,
                             const ReportBundle& bundle, Execution exec,
                             double wall_seconds);

void ComputeSignificance(ReportBundle& bundle,
                         const std::vector<std::string>& metrics,
                         double threshold);

// Stable names <dataset>_<table>.tsv plus <dataset>_bundle.json and
// manifest.json. Returns the written paths.
std::vector<std::filesystem::path> EmitReports(const ReportBundle& bundle,
                                               const std::filesystem::path& dir,
                                               bool tsv, bool json);

nlohmann::json BundleToJson(const ReportBundle& bundle);
ReportBundle BundleFromJson(const nlohmann::json& j);

// Fixed-point with 4 decimals; "NA" for undefined values.
std::string FormatCell(std::optional<double> value);

}  // namespace recbench
