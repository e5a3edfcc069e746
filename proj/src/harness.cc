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

#include "recbench/harness.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "recbench/embedding_models.h"
#include "recbench/errors.h"
#include "recbench/linear_models.h"

namespace recbench {
namespace {

using nlohmann::json;

void CheckKeys(const json& j, std::initializer_list<std::string_view> allowed,
               const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key " + where + "." + key);
    }
  }
}

template <class T>
T Field(const json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T Required(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError("missing " + where + "." + key);
  return Field<T>(j, key, T{}, where);
}

// Reads hyperparameters and rejects any that were not consumed.
class ParamReader {
 public:
  ParamReader(const json& params, std::string model) : params_(params), model_(std::move(model)) {}

  template <class T>
  T Get(const std::string& key, T fallback) {
    used_.insert(key);
    return Field<T>(params_, key, fallback, model_);
  }
  bool Has(const std::string& key) const { return params_.contains(key); }
  void Finish() const {
    for (const auto& [key, value] : params_.items()) {
      if (!used_.contains(key)) throw ConfigError("unknown hyperparameter " + model_ + "." + key);
    }
  }

 private:
  const json& params_;
  std::string model_;
  std::set<std::string> used_;
};

bool IsStochastic(Algorithm a) {
  return a == Algorithm::kPureSvd || a == Algorithm::kIals || a == Algorithm::kMf ||
         a == Algorithm::kNeuMf;
}

void ValidateModelParams(const ModelSpec& spec) {
  std::vector<std::string_view> allowed;
  switch (spec.algorithm) {
    case Algorithm::kMostPop: break;
    case Algorithm::kEase: allowed = {"l2"}; break;
    case Algorithm::kRp3Beta: allowed = {"alpha", "beta", "top_k", "normalize_similarity"}; break;
    case Algorithm::kPureSvd: allowed = {"factors", "oversample", "power_iters"}; break;
    case Algorithm::kSlim:
      allowed = {"top_k", "max_iters", "tol", "l1", "l2", "alpha", "l1_ratio"};
      break;
    case Algorithm::kIals: allowed = {"factors", "reg", "alpha", "epochs", "init_std"}; break;
    case Algorithm::kMf:
    case Algorithm::kNeuMf: {
      json params = spec.params;
      params["seed"] = spec.seed.value_or(0);
      TrainConfig c = TrainConfigFromJson(params);
      for (std::size_t dim : spec.sweep) {
        c.embedding_dim = dim;
        ValidateTrainConfig(c, spec.algorithm);
      }
      if (spec.sweep.empty()) ValidateTrainConfig(c, spec.algorithm);
      return;
    }
  }
  for (const auto& [key, value] : spec.params.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown hyperparameter " + spec.name + "." + key);
    }
  }
}

std::filesystem::path Resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::string SafeName(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.') c = '_';
  }
  return out;
}

std::string ErrorKind(const std::exception& e) {
  if (dynamic_cast<const TrainingDivergedError*>(&e)) return "TrainingDivergedError";
  if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
  if (dynamic_cast<const ContractError*>(&e)) return "ContractError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const SamplingError*>(&e)) return "SamplingError";
  if (dynamic_cast<const ProtocolError*>(&e)) return "ProtocolError";
  if (dynamic_cast<const DataError*>(&e)) return "DataError";
  return "Error";
}

std::string UtcNow() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

void WriteFile(const std::filesystem::path& path, const std::string& content,
               std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
  written.push_back(path);
}

std::vector<std::string> MetricGroup(const std::vector<std::string>& selected,
                                     std::span<const std::string_view> group) {
  std::vector<std::string> out;
  for (const auto& m : selected) {
    if (std::find(group.begin(), group.end(), m) != group.end()) out.push_back(m);
  }
  return out;
}

std::string Cell(const std::string& metric, std::optional<double> value) {
  if (metric == "IC" && value) return std::to_string(static_cast<long long>(*value));
  return FormatCell(value);
}

json MetricReportToJson(const MetricReport& r) {
  json per_user = json::array();
  for (const auto& a : r.per_user) {
    per_user.push_back({a.hr, a.ndcg, a.mrr, a.map, a.mar, a.f1, a.lauc});
  }
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json aggregate = json::object();
  for (const auto& [name, value] : r.Values()) aggregate[name] = opt(value);
  return {{"k", r.k},
          {"aggregate", aggregate},
          {"users", r.users},
          {"positive_ranks", r.positive_ranks},
          {"per_user", per_user},
          {"mean", {r.mean.hr, r.mean.ndcg, r.mean.mrr, r.mean.map, r.mean.mar, r.mean.f1,
                    r.mean.lauc}},
          {"epc", r.novelty.epc},
          {"efd", r.novelty.efd},
          {"epc_per_user", r.novelty.epc_per_user},
          {"efd_per_user", r.novelty.efd_per_user},
          {"item_coverage", r.diversity.item_coverage},
          {"gini", r.diversity.gini},
          {"entropy", r.diversity.entropy},
          {"aclt", r.bias.aclt},
          {"aplt", r.bias.aplt},
          {"arp", r.bias.arp},
          {"pop_rsp", opt(r.bias.pop_rsp)},
          {"pop_reo", opt(r.bias.pop_reo)}};
}

AccuracyRecord RecordFromJson(const json& a) {
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>(),
          a.at(3).get<double>(), a.at(4).get<double>(), a.at(5).get<double>(),
          a.at(6).get<double>()};
}

MetricReport MetricReportFromJson(const json& j) {
  auto opt = [](const json& v) {
    return v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>());
  };
  MetricReport r;
  r.k = j.at("k").get<std::size_t>();
  r.users = j.at("users").get<std::vector<UserId>>();
  r.positive_ranks = j.at("positive_ranks").get<std::vector<std::size_t>>();
  for (const auto& a : j.at("per_user")) r.per_user.push_back(RecordFromJson(a));
  r.mean = RecordFromJson(j.at("mean"));
  r.novelty.epc = j.at("epc").get<double>();
  r.novelty.efd = j.at("efd").get<double>();
  r.novelty.epc_per_user = j.at("epc_per_user").get<std::vector<double>>();
  r.novelty.efd_per_user = j.at("efd_per_user").get<std::vector<double>>();
  r.diversity.item_coverage = j.at("item_coverage").get<std::size_t>();
  r.diversity.gini = j.at("gini").get<double>();
  r.diversity.entropy = j.at("entropy").get<double>();
  r.bias.aclt = j.at("aclt").get<double>();
  r.bias.aplt = j.at("aplt").get<double>();
  r.bias.arp = j.at("arp").get<double>();
  r.bias.pop_rsp = opt(j.at("pop_rsp"));
  r.bias.pop_reo = opt(j.at("pop_reo"));
  return r;
}

json OptionalMatrix(const std::vector<std::vector<std::optional<double>>>& m) {
  json out = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
    out.push_back(r);
  }
  return out;
}

std::vector<std::vector<std::optional<double>>> OptionalMatrixFromJson(const json& j) {
  std::vector<std::vector<std::optional<double>>> out;
  for (const auto& row : j) {
    auto& r = out.emplace_back();
    for (const auto& v : row) {
      r.push_back(v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>()));
    }
  }
  return out;
}

}  // namespace

std::string FormatCell(std::optional<double> value) {
  if (!value) return "NA";
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.4f", *value);
  std::string s = buffer;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::uint64_t ConfigHash(const json& j) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : j.dump()) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string Hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

ExperimentConfig ParseConfig(const json& j, const std::filesystem::path& base_dir) {
  CheckKeys(j, {"description", "dataset", "models", "evaluation", "output"}, "config");
  ExperimentConfig config;
  config.raw = j;

  const json& d = j.contains("dataset") ? j.at("dataset") : throw ConfigError("missing dataset");
  CheckKeys(d, {"name", "split", "path", "format", "binarize_threshold", "negatives", "seed", "heavy"},
            "dataset");
  DatasetSpec& ds = config.dataset;
  ds.name = Required<std::string>(d, "name", "dataset");
  if (ds.name.empty() || SafeName(ds.name) != ds.name) {
    throw ConfigError("dataset.name must be non-empty and use only [A-Za-z0-9._-]");
  }
  ds.split = Field<std::string>(d, "split", "ncf_split", "dataset");
  if (ds.split != "ncf_split" && ds.split != "temporal_loo") {
    throw ConfigError("dataset.split must be ncf_split or temporal_loo");
  }
  ds.path = Resolve(base_dir, Required<std::string>(d, "path", "dataset"));
  ds.format = Field<std::string>(d, "format", "movielens_dat", "dataset");
  if (ds.split == "temporal_loo") {
    try {
      ParseLogFormat(ds.format);
    } catch (const Error& e) {
      throw ConfigError(std::string("dataset.format: ") + e.what());
    }
  }
  if (d.contains("binarize_threshold")) {
    ds.binarize_threshold = Field<double>(d, "binarize_threshold", 0.0, "dataset");
  }
  ds.negatives = Field<std::size_t>(d, "negatives", 100, "dataset");
  ds.seed = Field<std::uint64_t>(d, "seed", 0, "dataset");
  ds.heavy = Field<bool>(d, "heavy", false, "dataset");

  if (!j.contains("models") || !j.at("models").is_object() || j.at("models").empty()) {
    throw ConfigError("config must list at least one model");
  }
  for (const auto& [key, entry] : j.at("models").items()) {
    if (!entry.is_object()) throw ConfigError("models." + key + " must be an object");
    ModelSpec spec;
    spec.name = key;
    try {
      spec.algorithm = ParseAlgorithm(Field<std::string>(entry, "algorithm", key, key));
    } catch (const ContractError&) {
      throw ConfigError("models." + key + ": not one of MostPop, EASE, RP3beta, PureSVD, SLIM, "
                        "iALS, MF, NeuMF (set \"algorithm\" for custom names)");
    }
    if (entry.contains("seed")) spec.seed = Field<std::uint64_t>(entry, "seed", 0, key);
    if (IsStochastic(spec.algorithm) && !spec.seed) {
      throw ConfigError("models." + key + " needs a seed");
    }
    spec.sweep = Field<std::vector<std::size_t>>(entry, "sweep", {}, key);
    if (!spec.sweep.empty() && !IsEmbeddingAlgorithm(spec.algorithm)) {
      throw ConfigError("models." + key + ": sweep is only defined for MF and NeuMF");
    }
    for (const auto& [pkey, value] : entry.items()) {
      if (pkey != "algorithm" && pkey != "seed" && pkey != "sweep") spec.params[pkey] = value;
    }
    ValidateModelParams(spec);
    config.models.push_back(std::move(spec));
  }
  std::stable_sort(config.models.begin(), config.models.end(),
                   [](const ModelSpec& a, const ModelSpec& b) {
                     return a.algorithm != b.algorithm ? a.algorithm < b.algorithm
                                                       : a.name < b.name;
                   });

  EvaluationSpec& ev = config.evaluation;
  for (std::string_view name : kAccuracyMetricNames) ev.metrics.emplace_back(name);
  for (std::string_view name : kNoveltyDiversityMetricNames) ev.metrics.emplace_back(name);
  for (std::string_view name : kBiasMetricNames) ev.metrics.emplace_back(name);
  if (j.contains("evaluation")) {
    const json& e = j.at("evaluation");
    CheckKeys(e, {"cutoff", "metrics", "head_fraction", "significance_threshold",
                  "significance_metrics"},
              "evaluation");
    ev.cutoff = Field<std::size_t>(e, "cutoff", 10, "evaluation");
    if (e.contains("metrics")) {
      const auto requested = Field<std::vector<std::string>>(e, "metrics", {}, "evaluation");
      for (const auto& m : requested) {
        if (!IsKnownMetric(m)) throw ConfigError("unknown metric: " + m);
      }
      std::vector<std::string> ordered;
      for (const auto& m : ev.metrics) {
        if (std::find(requested.begin(), requested.end(), m) != requested.end()) {
          ordered.push_back(m);
        }
      }
      ev.metrics = ordered;
    }
    ev.head_fraction = Field<double>(e, "head_fraction", 0.2, "evaluation");
    ev.significance_threshold = Field<double>(e, "significance_threshold", 0.05, "evaluation");
    ev.significance_metrics =
        Field<std::vector<std::string>>(e, "significance_metrics", {"HR", "nDCG"}, "evaluation");
  }
  if (ev.cutoff < 1) throw ConfigError("evaluation.cutoff must be >= 1");
  if (!(ev.head_fraction > 0.0 && ev.head_fraction < 1.0)) {
    throw ConfigError("evaluation.head_fraction must lie in (0, 1)");
  }
  if (!(ev.significance_threshold > 0.0 && ev.significance_threshold < 1.0)) {
    throw ConfigError("evaluation.significance_threshold must lie in (0, 1)");
  }
  for (const auto& m : ev.significance_metrics) {
    if (!MetricReport::HasPerUser(m)) {
      throw ConfigError("no per-user values for significance metric " + m);
    }
  }

  if (j.contains("output")) {
    const json& o = j.at("output");
    CheckKeys(o, {"directory", "formats"}, "output");
    config.output.directory =
        Resolve(base_dir, Field<std::string>(o, "directory", "out", "output"));
    if (o.contains("formats")) {
      const auto formats = Field<std::vector<std::string>>(o, "formats", {}, "output");
      config.output.tsv = config.output.json = false;
      for (const auto& f : formats) {
        if (f == "tsv") config.output.tsv = true;
        else if (f == "json") config.output.json = true;
        else throw ConfigError("unknown output format: " + f);
      }
    }
  } else {
    config.output.directory = Resolve(base_dir, "out");
  }
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return ParseConfig(j, path.parent_path());
}

void RestrictModels(ExperimentConfig& config, const std::vector<std::string>& only) {
  if (only.empty()) return;
  for (const auto& name : only) {
    const bool known = std::any_of(config.models.begin(), config.models.end(),
                                   [&](const ModelSpec& m) { return m.name == name; });
    if (!known) throw ConfigError("--only names an unconfigured model: " + name);
  }
  std::erase_if(config.models, [&](const ModelSpec& m) {
    return std::find(only.begin(), only.end(), m.name) == only.end();
  });
}

void OverrideSeeds(ExperimentConfig& config, std::uint64_t seed) {
  for (auto& m : config.models) {
    if (m.seed) {
      m.seed = seed;
      config.raw["models"][m.name]["seed"] = seed;
    }
  }
}

std::vector<std::filesystem::path> DatasetFiles(const DatasetSpec& spec) {
  if (spec.split == "temporal_loo") return {spec.path};
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(spec.path)) {
    for (const auto& entry : std::filesystem::directory_iterator(spec.path)) {
      const std::string f = entry.path().filename().string();
      if (f.ends_with(".train.rating") || f.ends_with(".test.rating") ||
          f.ends_with(".test.negative")) {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

EvaluationPack LoadDataset(const DatasetSpec& spec) {
  if (spec.split == "ncf_split") return LoadNcfSplit(spec.path);
  InteractionLog log = LoadInteractions(spec.path, ParseLogFormat(spec.format));
  if (spec.binarize_threshold) log = Binarize(log, *spec.binarize_threshold);
  EvaluationPack pack = TemporalLeaveOneOut(log);
  pack = SampleTestNegatives(std::move(pack), spec.negatives, spec.seed);
  ValidatePack(pack);
  return pack;
}

TrainedModel FitModel(const ModelSpec& spec, const EvaluationPack& pack, Execution exec) {
  ParamReader p(spec.params, spec.name);
  const SparseMatrix& train = pack.train;
  const std::uint64_t seed = spec.seed.value_or(0);
  switch (spec.algorithm) {
    case Algorithm::kMostPop:
      p.Finish();
      return FitMostPop(train);
    case Algorithm::kEase: {
      EaseOptions o;
      o.l2 = p.Get("l2", o.l2);
      o.exec = exec;
      p.Finish();
      return FitEase(train, o);
    }
    case Algorithm::kRp3Beta: {
      Rp3BetaOptions o;
      o.alpha = p.Get("alpha", o.alpha);
      o.beta = p.Get("beta", o.beta);
      o.top_k = p.Get("top_k", o.top_k);
      o.normalize_similarity = p.Get("normalize_similarity", o.normalize_similarity);
      o.exec = exec;
      p.Finish();
      return FitRp3Beta(train, o);
    }
    case Algorithm::kPureSvd: {
      PureSvdOptions o;
      o.factors = p.Get("factors", o.factors);
      o.oversample = p.Get("oversample", o.oversample);
      o.power_iters = p.Get("power_iters", o.power_iters);
      o.seed = seed;
      o.exec = exec;
      p.Finish();
      return FitPureSvd(train, o);
    }
    case Algorithm::kSlim: {
      SlimOptions o;
      o.top_k = p.Get("top_k", o.top_k);
      o.max_iters = p.Get("max_iters", o.max_iters);
      o.tol = p.Get("tol", o.tol);
      if (p.Has("alpha") || p.Has("l1_ratio")) {
        // Elastic-net parameterization with the loss averaged over users.
        if (p.Has("l1") || p.Has("l2")) {
          throw ConfigError(spec.name + ": give either l1/l2 or alpha/l1_ratio");
        }
        const double alpha = p.Get("alpha", 1.0);
        const double ratio = p.Get("l1_ratio", 0.5);
        const double n = static_cast<double>(train.rows());
        o.l1 = n * alpha * ratio;
        o.l2 = n * alpha * (1.0 - ratio);
      } else {
        o.l1 = p.Get("l1", o.l1);
        o.l2 = p.Get("l2", o.l2);
      }
      o.exec = exec;
      p.Finish();
      return FitSlim(train, o);
    }
    case Algorithm::kIals: {
      IalsOptions o;
      o.factors = p.Get("factors", o.factors);
      o.reg = p.Get("reg", o.reg);
      o.alpha = p.Get("alpha", o.alpha);
      o.epochs = p.Get("epochs", o.epochs);
      o.init_std = p.Get("init_std", o.init_std);
      o.seed = seed;
      o.exec = exec;
      p.Finish();
      return FitIals(train, o);
    }
    case Algorithm::kMf:
    case Algorithm::kNeuMf: {
      json params = spec.params;
      params["seed"] = seed;
      TrainConfig c = TrainConfigFromJson(params);
      c.exec = exec;
      return spec.algorithm == Algorithm::kMf ? FitMf(train, pack, c) : FitNeuMf(train, pack, c);
    }
  }
  throw ContractError("unhandled algorithm");
}

nlohmann::json BuildManifest(const ExperimentConfig& config, const ReportBundle& bundle, Execution exec,
                   double wall_seconds) {
  json fingerprints = json::object();
  for (const auto& file : DatasetFiles(config.dataset)) {
    if (std::filesystem::exists(file)) {
      fingerprints[file.filename().string()] = Hex64(FingerprintFile(file));
    }
  }
  json models = json::array();
  for (const auto& r : bundle.results) {
    models.push_back({{"name", r.name},
                      {"algorithm", AlgorithmName(r.algorithm)},
                      {"hyperparameters", r.hyperparameters},
                      {"seed", r.seed ? json(*r.seed) : json(nullptr)},
                      {"fit_seconds", r.fit_seconds},
                      {"best_epoch", r.best_epoch},
                      {"warnings", r.warnings},
                      {"details", r.details}});
  }
  json failures = json::array();
  for (const auto& f : bundle.failures) {
    failures.push_back({{"name", f.name}, {"kind", f.kind}, {"message", f.message}});
  }
  return {{"config_hash", Hex64(ConfigHash(config.raw))},
          {"config", config.raw},
          {"dataset",
           {{"name", config.dataset.name},
            {"split", config.dataset.split},
            {"fingerprints", fingerprints}}},
          {"models", models},
          {"failures", failures},
          {"execution", exec == Execution::kSerial ? "serial" : "parallel"},
          {"threads", exec == Execution::kSerial ? 1 : MaxThreads()},
          {"generated_at", UtcNow()},
          {"wall_clock_seconds", wall_seconds},
          {"notes",
           {"MF and NeuMF epochs are selected by HR@10 on the test candidates, as in the "
            "replicated protocol; their accuracy is optimistically biased.",
            "Paired t-tests include every test user, including users missed by both systems."}}};
}

ReportBundle EvaluateModels(const ExperimentConfig& config, const EvaluationPack& pack,
                            const std::vector<std::pair<ModelSpec, TrainedModel>>& models,
                            Execution exec) {
  ReportBundle bundle;
  bundle.dataset = config.dataset.name;
  bundle.cutoff = config.evaluation.cutoff;
  bundle.metrics = config.evaluation.metrics;
  const PopularityProfile profile =
      BuildPopularityProfile(pack.train, config.evaluation.head_fraction);
  for (const auto& [spec, model] : models) {
    try {
      ModelResult r;
      r.name = spec.name;
      r.algorithm = model.algorithm();
      r.hyperparameters = model.hyperparameters();
      r.seed = spec.seed;
      r.trace = model.report().trace;
      r.best_epoch = model.report().best_epoch;
      r.warnings = model.report().warnings;
      r.details = model.report().details;
      r.metrics = Evaluate(model, pack, profile, config.evaluation.cutoff, exec);
      bundle.results.push_back(std::move(r));
    } catch (const std::exception& e) {
      bundle.failures.push_back({spec.name, ErrorKind(e), e.what()});
    }
  }
  return bundle;
}

ReportBundle RunExperiment(const ExperimentConfig& config, Execution exec,
                           const ProgressFn& progress) {
  const auto start = std::chrono::steady_clock::now();
  const EvaluationPack pack = LoadDataset(config.dataset);
  const PopularityProfile profile =
      BuildPopularityProfile(pack.train, config.evaluation.head_fraction);
  ReportBundle bundle;
  bundle.dataset = config.dataset.name;
  bundle.cutoff = config.evaluation.cutoff;
  bundle.metrics = config.evaluation.metrics;
  for (const ModelSpec& spec : config.models) {
    if (progress) progress("fitting " + spec.name);
    try {
      const auto t0 = std::chrono::steady_clock::now();
      const TrainedModel model = FitModel(spec, pack, exec);
      const auto t1 = std::chrono::steady_clock::now();
      ModelResult r;
      r.name = spec.name;
      r.algorithm = spec.algorithm;
      r.hyperparameters = model.hyperparameters();
      r.seed = spec.seed;
      r.trace = model.report().trace;
      r.best_epoch = model.report().best_epoch;
      r.warnings = model.report().warnings;
      r.details = model.report().details;
      r.fit_seconds = std::chrono::duration<double>(t1 - t0).count();
      r.metrics = Evaluate(model, pack, profile, config.evaluation.cutoff, exec);
      bundle.results.push_back(std::move(r));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      if (progress) progress("FAILED " + spec.name + ": " + e.what());
      bundle.failures.push_back({spec.name, ErrorKind(e), e.what()});
    }
  }
  if (bundle.results.size() >= 2) {
    ComputeSignificance(bundle, config.evaluation.significance_metrics,
                        config.evaluation.significance_threshold);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bundle.manifest = BuildManifest(config, bundle, exec, wall);
  return bundle;
}

std::vector<SweepPoint> RunSweep(const ExperimentConfig& config, const ModelSpec& spec,
                                 const EvaluationPack& pack, Execution exec,
                                 const ProgressFn& progress) {
  if (!IsEmbeddingAlgorithm(spec.algorithm)) {
    throw ConfigError(spec.name + ": sweep is only defined for MF and NeuMF");
  }
  const PopularityProfile profile =
      BuildPopularityProfile(pack.train, config.evaluation.head_fraction);
  std::vector<SweepPoint> points;
  for (std::size_t dim : spec.sweep) {
    if (progress) progress("sweep " + spec.name + " d=" + std::to_string(dim));
    ModelSpec point = spec;
    point.params["embedding_dim"] = dim;
    const TrainedModel model = FitModel(point, pack, exec);
    const MetricReport m = Evaluate(model, pack, profile, config.evaluation.cutoff, exec);
    points.push_back({dim, m.mean.hr, m.mean.ndcg, model.report().best_epoch});
  }
  return points;
}

void ComputeSignificance(ReportBundle& bundle, const std::vector<std::string>& metrics,
                         double threshold) {
  bundle.significance.clear();
  if (bundle.results.size() < 2) return;
  for (const auto& metric : metrics) {
    std::map<std::string, std::vector<double>> vectors;
    for (const auto& r : bundle.results) vectors[r.name] = r.metrics.PerUser(metric);
    bundle.significance.push_back(BuildSignificanceMatrix(vectors, metric, threshold));
  }
}

std::vector<std::filesystem::path> EmitReports(const ReportBundle& bundle,
                                               const std::filesystem::path& dir, bool tsv,
                                               bool json_format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory " + dir.string());
  }
  std::vector<std::filesystem::path> written;
  const std::string prefix = bundle.dataset + "_";
  if (tsv) {
    const std::pair<const char*, std::span<const std::string_view>> tables[] = {
        {"accuracy", kAccuracyMetricNames},
        {"novelty_diversity", kNoveltyDiversityMetricNames},
        {"bias", kBiasMetricNames}};
    for (const auto& [table, group] : tables) {
      const auto columns = MetricGroup(bundle.metrics, group);
      if (columns.empty() || bundle.results.empty()) continue;
      std::ostringstream out;
      out << "model";
      for (const auto& c : columns) out << '\t' << c;
      out << '\n';
      for (const auto& r : bundle.results) {
        out << r.name;
        for (const auto& c : columns) out << '\t' << Cell(c, r.metrics.Value(c));
        out << '\n';
      }
      WriteFile(dir / (prefix + table + ".tsv"), out.str(), written);
    }
    for (const auto& r : bundle.results) {
      std::ostringstream out;
      WritePerUserTsv(out, r.metrics);
      WriteFile(dir / (prefix + "peruser_" + SafeName(r.name) + ".tsv"), out.str(), written);
      if (!r.trace.empty()) {
        std::ostringstream t;
        t << "epoch\tloss\tHR@10\tnDCG@10\tselected\n";
        for (const auto& e : r.trace) {
          t << e.epoch << '\t' << FormatCell(e.loss) << '\t' << FormatCell(e.hit_rate) << '\t'
            << FormatCell(e.ndcg) << '\t' << (e.epoch == r.best_epoch ? 1 : 0) << '\n';
        }
        WriteFile(dir / (prefix + "trace_" + SafeName(r.name) + ".tsv"), t.str(), written);
      }
    }
    for (const auto& m : bundle.significance) {
      std::ostringstream p, mask;
      WriteSignificanceTsv(p, m);
      WriteSignificanceMaskTsv(mask, m);
      WriteFile(dir / (prefix + "significance_" + SafeName(m.metric) + ".tsv"), p.str(), written);
      WriteFile(dir / (prefix + "significance_" + SafeName(m.metric) + "_mask.tsv"), mask.str(),
                written);
    }
    for (const auto& [name, points] : bundle.sweeps) {
      std::ostringstream out;
      out << "dimension\tHR@" << bundle.cutoff << "\tnDCG@" << bundle.cutoff << "\tbest_epoch\n";
      for (const auto& pt : points) {
        out << pt.dimension << '\t' << FormatCell(pt.hr) << '\t' << FormatCell(pt.ndcg) << '\t'
            << pt.best_epoch << '\n';
      }
      WriteFile(dir / (prefix + "sweep_" + SafeName(name) + ".tsv"), out.str(), written);
    }
  }
  if (json_format) {
    WriteFile(dir / (prefix + "bundle.json"), BundleToJson(bundle).dump(2) + "\n", written);
  }
  WriteFile(dir / "manifest.json", bundle.manifest.dump(2) + "\n", written);
  return written;
}

nlohmann::json BundleToJson(const ReportBundle& bundle) {
  json results = json::array();
  for (const auto& r : bundle.results) {
    json trace = json::array();
    for (const auto& e : r.trace) trace.push_back({e.epoch, e.loss, e.hit_rate, e.ndcg});
    results.push_back({{"name", r.name},
                       {"algorithm", AlgorithmName(r.algorithm)},
                       {"hyperparameters", r.hyperparameters},
                       {"seed", r.seed ? json(*r.seed) : json(nullptr)},
                       {"metrics", MetricReportToJson(r.metrics)},
                       {"trace", trace},
                       {"best_epoch", r.best_epoch},
                       {"warnings", r.warnings},
                       {"details", r.details},
                       {"fit_seconds", r.fit_seconds}});
  }
  json failures = json::array();
  for (const auto& f : bundle.failures) {
    failures.push_back({{"name", f.name}, {"kind", f.kind}, {"message", f.message}});
  }
  json significance = json::array();
  for (const auto& m : bundle.significance) {
    significance.push_back({{"metric", m.metric},
                            {"names", m.names},
                            {"threshold", m.threshold},
                            {"bonferroni_threshold", m.bonferroni_threshold()},
                            {"p_values", OptionalMatrix(m.p_values)},
                            {"t_values", OptionalMatrix(m.t_values)},
                            {"significant", m.significant}});
  }
  json sweeps = json::object();
  for (const auto& [name, points] : bundle.sweeps) {
    json rows = json::array();
    for (const auto& p : points) {
      rows.push_back({{"dimension", p.dimension},
                      {"hr", p.hr},
                      {"ndcg", p.ndcg},
                      {"best_epoch", p.best_epoch}});
    }
    sweeps[name] = rows;
  }
  return {{"dataset", bundle.dataset},
          {"cutoff", bundle.cutoff},
          {"metrics", bundle.metrics},
          {"results", results},
          {"failures", failures},
          {"significance", significance},
          {"sweeps", sweeps},
          {"manifest", bundle.manifest}};
}

ReportBundle BundleFromJson(const nlohmann::json& j) {
  try {
    ReportBundle b;
    b.dataset = j.at("dataset").get<std::string>();
    b.cutoff = j.at("cutoff").get<std::size_t>();
    b.metrics = j.at("metrics").get<std::vector<std::string>>();
    for (const auto& r : j.at("results")) {
      ModelResult m;
      m.name = r.at("name").get<std::string>();
      m.algorithm = ParseAlgorithm(r.at("algorithm").get<std::string>());
      m.hyperparameters = r.at("hyperparameters");
      if (!r.at("seed").is_null()) m.seed = r.at("seed").get<std::uint64_t>();
      m.metrics = MetricReportFromJson(r.at("metrics"));
      for (const auto& e : r.at("trace")) {
        m.trace.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>(),
                           e.at(3).get<double>()});
      }
      m.best_epoch = r.at("best_epoch").get<int>();
      m.warnings = r.at("warnings").get<std::vector<std::string>>();
      m.details = r.at("details");
      m.fit_seconds = r.at("fit_seconds").get<double>();
      b.results.push_back(std::move(m));
    }
    for (const auto& f : j.at("failures")) {
      b.failures.push_back({f.at("name").get<std::string>(), f.at("kind").get<std::string>(),
                            f.at("message").get<std::string>()});
    }
    for (const auto& s : j.at("significance")) {
      SignificanceMatrix m;
      m.metric = s.at("metric").get<std::string>();
      m.names = s.at("names").get<std::vector<std::string>>();
      m.threshold = s.at("threshold").get<double>();
      m.p_values = OptionalMatrixFromJson(s.at("p_values"));
      m.t_values = OptionalMatrixFromJson(s.at("t_values"));
      m.significant = s.at("significant").get<std::vector<std::vector<bool>>>();
      b.significance.push_back(std::move(m));
    }
    for (const auto& [name, rows] : j.at("sweeps").items()) {
      auto& points = b.sweeps[name];
      for (const auto& p : rows) {
        points.push_back({p.at("dimension").get<std::size_t>(), p.at("hr").get<double>(),
                          p.at("ndcg").get<double>(), p.at("best_epoch").get<int>()});
      }
    }
    b.manifest = j.at("manifest");
    return b;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report bundle: ") + e.what());
  }
}

}  // namespace recbench
