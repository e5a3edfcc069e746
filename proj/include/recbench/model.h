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
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "recbench/dataset.h"
#include "recbench/params.h"

namespace recbench {

enum class Algorithm { kMostPop, kEase, kRp3Beta, kPureSvd, kSlim, kIals, kMf, kNeuMf };

std::string_view AlgorithmName(Algorithm algorithm);
// Accepts the canonical names (MostPop, EASE, RP3beta, PureSVD, SLIM, iALS,
// MF, NeuMF), case-insensitively.
Algorithm ParseAlgorithm(std::string_view name);
bool IsEmbeddingAlgorithm(Algorithm algorithm);

struct PopularityPayload {
  std::vector<double> counts;
};

// Item-to-item weights W; score(u, j) = sum over i in history row u of W[i][j].
// Sparse weights are stored transposed (row j lists the sources of target j).
struct ItemItemPayload {
  std::shared_ptr<const SparseMatrix> history;
  Eigen::MatrixXd dense;         // W, empty when sparse
  SparseMatrix sparse_by_target; // W transposed, used when dense is empty
  bool zero_diagonal = false;

  bool is_dense() const { return dense.size() > 0; }
  double Weight(ItemId source, ItemId target) const;
};

// score(u, i) = <user_factors.row(u), item_factors.row(i)>
struct LatentFactorPayload {
  RowMatrix user_factors;
  RowMatrix item_factors;
  Eigen::VectorXd singular_values;  // PureSVD only
};

using ModelPayload = std::variant<PopularityPayload, ItemItemPayload,
                                  LatentFactorPayload, MFParams, NeuMFParams>;

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double hit_rate = 0.0;
  double ndcg = 0.0;
};

struct FitReport {
  std::vector<std::string> warnings;
  nlohmann::json details = nlohmann::json::object();
  std::vector<EpochRecord> trace;
  int best_epoch = -1;
};

// A fitted scorer. Scoring is a pure function of the payload.
class TrainedModel {
 public:
  TrainedModel(Algorithm algorithm, std::size_t num_users, std::size_t num_items,
               nlohmann::json hyperparameters, ModelPayload payload,
               FitReport report = {});

  Algorithm algorithm() const { return algorithm_; }
  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  const nlohmann::json& hyperparameters() const { return hyperparameters_; }
  const FitReport& report() const { return report_; }
  FitReport& mutable_report() { return report_; }
  const ModelPayload& payload() const { return payload_; }

  // One finite score per item, in input order. Out-of-range ids throw
  // ContractError. NeuMF scores are logits (monotone in the probability).
  std::vector<double> Score(UserId user, std::span<const ItemId> items) const;

 private:
  Algorithm algorithm_;
  std::size_t num_users_;
  std::size_t num_items_;
  nlohmann::json hyperparameters_;
  ModelPayload payload_;
  FitReport report_;
};

// Binary container: magic "RECBNCH1", u64 header length, JSON header, then
// the arrays listed in header["arrays"] as raw little-endian f64 / i64 data.
struct Container {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, std::vector<double>>> reals;
  std::vector<std::pair<std::string, std::vector<std::int64_t>>> integers;

  const std::vector<double>& Real(const std::string& name) const;
  const std::vector<std::int64_t>& Integer(const std::string& name) const;
};

void WriteContainer(const std::filesystem::path& path, const Container& c);
Container ReadContainer(const std::filesystem::path& path);

// Array helpers shared by model files and training checkpoints.
std::vector<double> Flatten(const RowMatrix& m);
RowMatrix Unflatten(const std::vector<double>& data, Eigen::Index rows,
                    Eigen::Index cols);
void PutMatrix(Container& c, const std::string& name, const RowMatrix& m);
RowMatrix GetMatrix(const Container& c, const std::string& name);
void PutVector(Container& c, const std::string& name, const Eigen::VectorXd& v);
Eigen::VectorXd GetVector(const Container& c, const std::string& name);
void PutMFParams(Container& c, const std::string& prefix, const MFParams& p);
MFParams GetMFParams(const Container& c, const std::string& prefix);
void PutNeuMFParams(Container& c, const std::string& prefix, const NeuMFParams& p);
NeuMFParams GetNeuMFParams(const Container& c, const std::string& prefix);

void SaveModel(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel LoadModel(const std::filesystem::path& path);

}  // namespace recbench
