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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "recbench/errors.h"
#include "test_util.h"

namespace recbench {
namespace {

using nlohmann::json;

json ToyConfig(json models) {
  return {{"dataset", {{"name", "toy"}, {"split", "ncf_split"},
                       {"path", (testing::FixtureDir() / "toy").string()}}},
          {"models", std::move(models)},
          {"evaluation", {{"cutoff", 2}}},
          {"output", {{"directory", "unused"}}}};
}

ExperimentConfig Parse(const json& j) { return ParseConfig(j, testing::FixtureDir()); }

// Hand-worked MostPop on the three-user fixture at cutoff 2. Train counts are
// [3, 2, 1, 1, 1, 0]; the top-2 lists are [3, 4], [2, 4], [1, 2] and the
// positives 5, 4, 1 sit at ranks 3, 2, 1. Head = {0, 1}.
TEST(RunExperimentTest, ToyMostPopMatchesHandComputation) {
  const auto bundle = RunExperiment(Parse(ToyConfig({{"MostPop", json::object()}})),
                                    Execution::kSerial);
  ASSERT_EQ(bundle.results.size(), 1u);
  const MetricReport& m = bundle.results[0].metrics;
  EXPECT_EQ(m.positive_ranks, (std::vector<std::size_t>{3, 2, 1}));
  EXPECT_NEAR(m.mean.hr, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.mean.ndcg, (1.0 / std::log2(3.0) + 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(m.mean.mrr, (0.5 + 1.0) / 3.0, 1e-12);
  EXPECT_NEAR(m.mean.f1, 2.0 / 3.0 * 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.mean.map, (0.25 + 0.75) / 3.0, 1e-12);
  EXPECT_NEAR(m.mean.mar, (0.5 + 1.0) / 3.0, 1e-12);
  // Full pools: user 1 has 6 - 3 - 1 = 2 other unconsumed items.
  EXPECT_NEAR(m.mean.lauc, (0.0 + 0.5 + 1.0) / 3.0, 1e-12);
  EXPECT_EQ(m.diversity.item_coverage, 4u);
  // Recommendation counts sorted [0, 0, 1, 1, 2, 2]: Gini = 16 / 30.
  EXPECT_NEAR(m.diversity.gini, 1.0 - 16.0 / 30.0, 1e-12);
  EXPECT_NEAR(m.diversity.entropy, std::log2(6.0) / 3.0 + 2.0 * std::log2(3.0) / 3.0, 1e-12);
  EXPECT_NEAR(m.bias.aclt, 5.0 / 3.0, 1e-12);
  EXPECT_NEAR(m.bias.aplt, 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(m.bias.arp, (1.0 + 1.0 + 1.5) / 3.0, 1e-12);
  // Unconsumed head items: only item 1 for user 2, recommended; unconsumed
  // tail items: 9, of which 5 recommended. Rates 1 and 5/9.
  const double rsp_mean = (1.0 + 5.0 / 9.0) / 2.0;
  EXPECT_NEAR(*m.bias.pop_rsp, (1.0 - 5.0 / 9.0) / 2.0 / rsp_mean, 1e-12);
  // Head positive (item 1) hit; tail positives hit 1 of 2.
  EXPECT_NEAR(*m.bias.pop_reo, 0.25 / 0.75, 1e-12);
  EXPECT_TRUE(bundle.failures.empty());
  EXPECT_TRUE(bundle.significance.empty());
}

TEST(ParseConfigTest, RejectsInvalidConfigs) {
  EXPECT_THROW(Parse(ToyConfig(json::object())), ConfigError);
  EXPECT_THROW(Parse(ToyConfig({{"BPR", json::object()}})), ConfigError);
  EXPECT_THROW(Parse(ToyConfig({{"PureSVD", {{"factors", 2}}}})), ConfigError);  // no seed
  EXPECT_THROW(Parse(ToyConfig({{"EASE", {{"lambda", 2}}}})), ConfigError);
  EXPECT_THROW(Parse(ToyConfig({{"EASE", {{"l2", 2}, {"sweep", {4}}}}})), ConfigError);
  auto bad_cutoff = ToyConfig({{"MostPop", json::object()}});
  bad_cutoff["evaluation"]["cutoff"] = 0;
  EXPECT_THROW(Parse(bad_cutoff), ConfigError);
  auto bad_head = ToyConfig({{"MostPop", json::object()}});
  bad_head["evaluation"]["head_fraction"] = 1.5;
  EXPECT_THROW(Parse(bad_head), ConfigError);
  auto extra = ToyConfig({{"MostPop", json::object()}});
  extra["extra"] = 1;
  EXPECT_THROW(Parse(extra), ConfigError);
}

TEST(ParseConfigTest, CanonicalOrderSeedsAndHash) {
  const auto config = LoadConfig(testing::ConfigDir() / "toy.json");
  std::vector<std::string> names;
  for (const auto& m : config.models) names.push_back(m.name);
  EXPECT_EQ(names, (std::vector<std::string>{"MostPop", "EASE", "RP3beta", "PureSVD", "SLIM",
                                             "iALS", "MF", "NeuMF"}));
  EXPECT_EQ(config.evaluation.metrics.size(), 17u);
  EXPECT_EQ(ConfigHash(config.raw), ConfigHash(LoadConfig(testing::ConfigDir() / "toy.json").raw));
  EXPECT_EQ(Hex64(ConfigHash(config.raw)).size(), 16u);

  auto only = config;
  RestrictModels(only, {"MF", "EASE"});
  ASSERT_EQ(only.models.size(), 2u);
  EXPECT_EQ(only.models[0].name, "EASE");
  EXPECT_THROW(RestrictModels(only, {"Nope"}), ConfigError);

  auto seeded = config;
  OverrideSeeds(seeded, 99);
  for (const auto& m : seeded.models) {
    if (m.seed) EXPECT_EQ(*m.seed, 99u);
  }
}

TEST(RunExperimentTest, SequentialRunsAreBitIdentical) {
  const auto config = LoadConfig(testing::ConfigDir() / "toy.json");
  auto a = BundleToJson(RunExperiment(config, Execution::kSerial));
  auto b = BundleToJson(RunExperiment(config, Execution::kSerial));
  for (auto* j : {&a, &b}) {
    j->erase("manifest");
    for (auto& r : (*j)["results"]) r.erase("fit_seconds");
  }
  EXPECT_EQ(a, b);
}

TEST(RunExperimentTest, FailureIsIsolated) {
  const json models = {{"MostPop", json::object()},
                       {"MF", {{"embedding_dim", 2}, {"learning_rate", 1e6}, {"l2", 1.0},
                               {"epochs", 2}, {"seed", 1}}}};
  const auto bundle = RunExperiment(Parse(ToyConfig(models)), Execution::kSerial);
  ASSERT_EQ(bundle.failures.size(), 1u);
  EXPECT_EQ(bundle.failures[0].name, "MF");
  EXPECT_EQ(bundle.failures[0].kind, "TrainingDivergedError");
  ASSERT_EQ(bundle.results.size(), 1u);
  const auto alone = RunExperiment(Parse(ToyConfig({{"MostPop", json::object()}})),
                                   Execution::kSerial);
  EXPECT_EQ(bundle.results[0].metrics.Values(), alone.results[0].metrics.Values());
  EXPECT_EQ(bundle.manifest.at("failures").size(), 1u);
}

TEST(RunSweepTest, SingleDimensionEqualsPlainRun) {
  const json mf = {{"embedding_dim", 4}, {"learning_rate", 0.05}, {"epochs", 3}, {"seed", 7}};
  const auto config = Parse(ToyConfig({{"MF", mf}}));
  const auto pack = LoadDataset(config.dataset);
  ModelSpec spec = config.models[0];
  spec.params["embedding_dim"] = 2;
  spec.sweep = {4};
  const auto points = RunSweep(config, spec, pack, Execution::kSerial);
  ASSERT_EQ(points.size(), 1u);
  const auto plain = RunExperiment(config, Execution::kSerial);
  EXPECT_EQ(points[0].dimension, 4u);
  EXPECT_EQ(points[0].hr, plain.results[0].metrics.mean.hr);
  EXPECT_EQ(points[0].ndcg, plain.results[0].metrics.mean.ndcg);
  EXPECT_EQ(points[0].best_epoch, plain.results[0].best_epoch);
}

std::vector<std::vector<std::string>> ReadTsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, '\t')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

TEST(EmitReportsTest, TsvAgreesWithJsonAndReemitIsByteIdentical) {
  const auto bundle = RunExperiment(LoadConfig(testing::ConfigDir() / "toy.json"), Execution::kSerial);
  testing::TempDir first, second;
  EmitReports(bundle, first.path(), true, true);
  const auto restored = BundleFromJson(json::parse(testing::ReadText(first / "toy_bundle.json")));
  EmitReports(restored, second.path(), true, false);

  std::size_t compared = 0;
  for (const char* table : {"toy_accuracy.tsv", "toy_novelty_diversity.tsv", "toy_bias.tsv"}) {
    const auto rows = ReadTsv(first / table);
    ASSERT_GE(rows.size(), 2u) << table;
    ASSERT_EQ(rows.size(), restored.results.size() + 1) << table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& result = restored.results[r - 1];
      ASSERT_EQ(rows[r][0], result.name);
      for (std::size_t c = 1; c < rows[0].size(); ++c) {
        const auto value = result.metrics.Value(rows[0][c]);
        if (!value) {
          EXPECT_EQ(rows[r][c], "NA");
          continue;
        }
        EXPECT_NEAR(std::stod(rows[r][c]), *value, 5e-5 + 1e-12) << table << " " << rows[0][c];
        ++compared;
      }
    }
    EXPECT_EQ(testing::ReadText(first / table), testing::ReadText(second / table)) << table;
  }
  EXPECT_EQ(compared, 8u * 17u);
  for (const auto& entry : std::filesystem::directory_iterator(first.path())) {
    if (entry.path().extension() != ".tsv") continue;
    EXPECT_EQ(testing::ReadText(entry.path()), testing::ReadText(second / entry.path().filename()))
        << entry.path().filename();
  }
  EXPECT_TRUE(std::filesystem::exists(first / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(first / "toy_significance_nDCG_mask.tsv"));
}

TEST(FormatCellTest, FourDecimalsAndMarkers) {
  EXPECT_EQ(FormatCell(0.123456), "0.1235");
  EXPECT_EQ(FormatCell(-0.00001), "0.0000");
  EXPECT_EQ(FormatCell(std::nullopt), "NA");
}

TEST(ManifestTest, RecordsProvenance) {
  const auto config = LoadConfig(testing::ConfigDir() / "toy.json");
  const auto bundle = RunExperiment(config, Execution::kSerial);
  const json& m = bundle.manifest;
  EXPECT_EQ(m.at("config_hash").get<std::string>(), Hex64(ConfigHash(config.raw)));
  EXPECT_EQ(m.at("dataset").at("fingerprints").size(), 3u);
  EXPECT_EQ(m.at("models").size(), 8u);
  for (const auto& model : m.at("models")) EXPECT_TRUE(model.contains("hyperparameters"));
}

int RunCli(const std::string& args, const std::filesystem::path& out) {
  const std::string command = "RECBENCH_OUT_DIR='" + out.string() + "' '" RECBENCH_CLI "' " +
                              args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliTest, ExitCodes) {
  testing::TempDir dir;
  const std::string toy = (testing::ConfigDir() / "toy.json").string();
  EXPECT_EQ(RunCli("compare --config '" + toy + "' --only MostPop,EASE --threads 1", dir.path()), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "toy_accuracy.tsv"));
  EXPECT_EQ(RunCli("report --bundle '" + (dir / "toy_bundle.json").string() + "'", dir.path()), 0);
  EXPECT_EQ(RunCli("report", dir.path()), 2);

  testing::WriteText(dir / "empty.json", ToyConfig(json::object()).dump());
  EXPECT_EQ(RunCli("compare --config '" + (dir / "empty.json").string() + "'", dir.path()), 2);
  EXPECT_EQ(RunCli("compare --config '" + (dir / "absent.json").string() + "'", dir.path()), 2);
  EXPECT_EQ(RunCli("compare --bogus-flag", dir.path()), 2);

  auto missing = ToyConfig({{"MostPop", json::object()}});
  missing["dataset"]["path"] = (dir / "nowhere").string();
  testing::WriteText(dir / "missing.json", missing.dump());
  EXPECT_EQ(RunCli("compare --config '" + (dir / "missing.json").string() + "'", dir.path()), 3);

  const json diverging = {{"MostPop", json::object()},
                          {"MF", {{"embedding_dim", 2}, {"learning_rate", 1e6}, {"l2", 1.0},
                                  {"epochs", 2}, {"seed", 1}}}};
  testing::WriteText(dir / "diverge.json", ToyConfig(diverging).dump());
  EXPECT_EQ(RunCli("compare --config '" + (dir / "diverge.json").string() + "'", dir.path()), 4);
  EXPECT_TRUE(std::filesystem::exists(dir / "toy_accuracy.tsv"));
}

TEST(CliTest, TrainThenEvaluateMatchesCompare) {
  testing::TempDir a, b;
  const std::string toy = (testing::ConfigDir() / "toy.json").string();
  ASSERT_EQ(RunCli("train --config '" + toy + "' --only EASE,MF --threads 1", a.path()), 0);
  EXPECT_TRUE(std::filesystem::exists(a / "models" / "MF.model"));
  ASSERT_EQ(RunCli("evaluate --config '" + toy + "' --only EASE,MF --threads 1", a.path()), 0);
  ASSERT_EQ(RunCli("compare --config '" + toy + "' --only EASE,MF --threads 1", b.path()), 0);
  EXPECT_EQ(testing::ReadText(a / "toy_accuracy.tsv"), testing::ReadText(b / "toy_accuracy.tsv"));
  EXPECT_EQ(RunCli("significance --config '" + toy + "' --only EASE,MF", b.path()), 0);
  EXPECT_TRUE(std::filesystem::exists(b / "toy_significance_HR.tsv"));
  EXPECT_EQ(RunCli("sweep --config '" + toy + "' --only MF --threads 1", b.path()), 0);
  EXPECT_TRUE(std::filesystem::exists(b / "toy_sweep_MF.tsv"));
  EXPECT_EQ(RunCli("prepare --config '" + toy + "'", b.path()), 0);
}

}  // namespace
}  // namespace recbench
