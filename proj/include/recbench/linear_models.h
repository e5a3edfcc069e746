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
#include <vector>

#include "recbench/dataset.h"
#include "recbench/model.h"
#include "recbench/parallel.h"

namespace recbench {

// score(u, i) = number of train interactions of item i.
TrainedModel FitMostPop(const SparseMatrix& train);

// Closed-form item autoencoder: P = (X^T X + l2 I)^-1, W = -P / diag(P) with a
// zero diagonal.
struct EaseOptions {
  double l2 = 500.0;
  Execution exec = Execution::kParallel;
};
TrainedModel FitEase(const SparseMatrix& train, const EaseOptions& options);

// Three-step random walk user -> item -> user -> item. Transition
// probabilities are raised to alpha, each target column is divided by its
// popularity^beta, the diagonal is cleared and every source row keeps its
// top_k entries; after optional L1 row normalization every target column
// keeps its top_k entries.
struct Rp3BetaOptions {
  double alpha = 1.0;
  double beta = 0.0;
  std::size_t top_k = 100;
  bool normalize_similarity = false;
  Execution exec = Execution::kParallel;
};
TrainedModel FitRp3Beta(const SparseMatrix& train, const Rp3BetaOptions& options);

// Rank-`factors` truncated SVD of the binary matrix by randomized range
// finding; score(u, .) = x_u V V^T.
struct PureSvdOptions {
  std::size_t factors = 50;
  std::uint64_t seed = 0;
  std::size_t oversample = 10;
  std::size_t power_iters = 4;
  Execution exec = Execution::kParallel;
};
TrainedModel FitPureSvd(const SparseMatrix& train, const PureSvdOptions& options);

// Per-item nonnegative elastic net with zero self-weight:
//   min_w 1/2 ||x_j - X w||^2 + l1 ||w||_1 + l2/2 ||w||^2,  w >= 0, w_j = 0,
// where w is restricted to the top_k items co-occurring most with j. Solved
// by cyclic coordinate descent until the largest coefficient change in a
// sweep drops below tol, or max_iters sweeps.
struct SlimOptions {
  double l1 = 1.0;
  double l2 = 1.0;
  std::size_t top_k = 100;
  std::size_t max_iters = 100;
  double tol = 1e-4;
  Execution exec = Execution::kParallel;
};
TrainedModel FitSlim(const SparseMatrix& train, const SlimOptions& options);

// Implicit ALS with confidence 1 + alpha * r and target 1 on observed
// entries, 0 elsewhere. The objective after every half-sweep is recorded in
// report().details["objective"] and must not increase.
struct IalsOptions {
  std::size_t factors = 50;
  double reg = 0.01;
  double alpha = 1.0;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  double init_std = 0.01;
  Execution exec = Execution::kParallel;
};
TrainedModel FitIals(const SparseMatrix& train, const IalsOptions& options);

// Weighted objective of an iALS factorization (exposed for tests).
double IalsObjective(const SparseMatrix& train, const RowMatrix& users,
                     const RowMatrix& items, double reg, double alpha);

}  // namespace recbench
