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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "recbench/dataset.h"
#include "recbench/model.h"
#include "recbench/params.h"
#include "recbench/parallel.h"
#include "recbench/random.h"

namespace recbench {

// ---------------------------------------------------------------------------
// Forward passes.

// global_bias + user_bias[u] + item_bias[i] + <P[u], Q[i]>
double MfForward(const MFParams& params, UserId u, ItemId i);

// p'_u (*) q'_i
Eigen::VectorXd GmfForward(const NeuMFParams& params, UserId u, ItemId i);
// Tower output for the concatenation [p_u, q_i]; ReLU after every layer.
Eigen::VectorXd MlpForward(const NeuMFParams& params, UserId u, ItemId i);
// output_weight . [mlp, gmf] + output_bias
double NeuMfLogit(const NeuMFParams& params, UserId u, ItemId i);
// Logistic of the logit, in (0, 1).
double NeuMfForward(const NeuMFParams& params, UserId u, ItemId i);

// ---------------------------------------------------------------------------
// Losses and gradients.

struct Example {
  UserId user = 0;
  ItemId item = 0;
  double label = 0.0;  // 1 positive, 0 sampled negative
};

// log(1 + exp(x)) - y x, computed without overflow.
double LogisticLoss(double logit, double label);

// Sum over examples of LogisticLoss + reg/2 (|p_u|^2 + |q_i|^2 + b_u^2 + b_i^2).
double MfLoss(const MFParams& params, std::span<const Example> batch, double reg);
// Dense gradient of MfLoss, shaped like `params`.
MFParams MfGradient(const MFParams& params, std::span<const Example> batch,
                    double reg);
// One SGD step on a single example (all parameters updated from the
// pre-step values).
void MfSgdStep(MFParams& params, const Example& example, double lr, double reg);

// Mean over the batch of LogisticLoss + reg/2 * (squared norms of the four
// embedding rows the example touches). Tower and output weights are not
// regularized.
double NeuMfLoss(const NeuMFParams& params, std::span<const Example> batch,
                 double reg);
// Dense gradient of NeuMfLoss, shaped like `params`.
NeuMFParams NeuMfGradient(const NeuMFParams& params,
                          std::span<const Example> batch, double reg);

// Adam moments. Dense blocks are updated every step; embedding rows only when
// the batch touches them (with the global step count for bias correction).
struct AdamState {
  NeuMFParams m;
  NeuMFParams v;
  std::int64_t step = 0;
};
struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};
AdamState ZeroAdamState(const NeuMFParams& params);
// One optimizer step on `batch`; returns the batch loss before the step.
double NeuMfAdamStep(NeuMFParams& params, AdamState& state,
                     std::span<const Example> batch, double reg,
                     const AdamOptions& options);

// ---------------------------------------------------------------------------
// Initialization.

MFParams InitMf(std::size_t num_users, std::size_t num_items, std::size_t dim,
                double init_std, Rng& rng);
// `embedding_dim` = 3f: GMF f, MLP 2f per side, tower 4f -> 2f -> f.
// Embeddings N(0, init_std); tower Glorot-uniform; output LeCun-uniform;
// biases zero.
NeuMFParams InitNeuMf(std::size_t num_users, std::size_t num_items,
                      std::size_t embedding_dim, double init_std, Rng& rng);

// ---------------------------------------------------------------------------
// Training.

// m items uniform with replacement among those not in train row `user`.
std::vector<ItemId> SampleTrainingNegatives(const SparseMatrix& train,
                                            UserId user, std::size_t m,
                                            Rng& rng);

struct TrainConfig {
  std::size_t embedding_dim = 64;
  double learning_rate = 0.001;
  double l2 = 0.0;
  std::size_t negatives_per_positive = 4;
  std::size_t epochs = 20;
  // NeuMF minibatch size; MF uses per-example SGD.
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  std::string selection_metric = "HR@10";
  double init_std = 0.01;
  // Evaluation only; training itself is always sequential.
  Execution exec = Execution::kParallel;
  // When set, a checkpoint is written after every epoch and, if the file
  // already exists, training resumes from it.
  std::filesystem::path checkpoint;

  nlohmann::json ToJson() const;
};

// Throws ConfigError.
void ValidateTrainConfig(const TrainConfig& config, Algorithm algorithm);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

// Per-epoch HR@10 on `eval` selects the returned parameters (earliest epoch
// on ties); the full trace is kept in report().trace.
TrainedModel FitMf(const SparseMatrix& train, const EvaluationPack& eval,
                   const TrainConfig& config);
TrainedModel FitNeuMf(const SparseMatrix& train, const EvaluationPack& eval,
                      const TrainConfig& config);

}  // namespace recbench
