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
#include <utility>
#include <vector>

namespace recbench {

using UserId = std::int32_t;
using ItemId = std::int32_t;

struct Interaction {
  UserId user = 0;
  ItemId item = 0;
  double rating = 1.0;
  std::int64_t timestamp = 0;
};

// Raw feedback with contiguous zero-based ids. user_labels / item_labels map
// each index back to the identifier found in the source file.
struct InteractionLog {
  std::vector<Interaction> events;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<std::int64_t> user_labels;
  std::vector<std::int64_t> item_labels;
};

enum class LogFormat { kMovielensDat, kTsvRating };

LogFormat ParseLogFormat(const std::string& name);

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row. Immutable after construction.
class SparseMatrix {
 public:
  SparseMatrix() : offsets_(1, 0) {}
  // Validates the CSR invariants and throws ContractError when violated.
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<std::size_t> offsets, std::vector<ItemId> indices,
               std::vector<double> values);

  // Binary matrix from (row, col) pairs; duplicates collapse to one entry.
  static SparseMatrix FromPairs(std::size_t rows, std::size_t cols,
                                std::vector<std::pair<UserId, ItemId>> pairs);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return indices_.size(); }

  std::span<const ItemId> Row(std::size_t r) const {
    return {indices_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const double> RowValues(std::size_t r) const {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::size_t RowSize(std::size_t r) const {
    return offsets_[r + 1] - offsets_[r];
  }
  bool Contains(std::size_t r, ItemId c) const;

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<ItemId>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  SparseMatrix Transpose() const;
  // Number of stored entries per column.
  std::vector<std::size_t> ColumnCounts() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<ItemId> indices_;
  std::vector<double> values_;
};

struct TestCase {
  UserId user = 0;
  ItemId positive = 0;
  std::vector<ItemId> negatives;
  double rating = 1.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

// Train matrix plus one held-out positive and its negative candidates per
// test user. `tests` is sorted by user id.
struct EvaluationPack {
  SparseMatrix train;
  std::vector<TestCase> tests;
  // 1 + negatives per test user; uniform across users.
  std::size_t candidate_count = 1;
  // Users kept entirely in train because they had a single interaction.
  std::vector<UserId> train_only_users;

  std::size_t num_users() const { return train.rows(); }
  std::size_t num_items() const { return train.cols(); }
  const TestCase* Find(UserId user) const;
};

// Throws DataError when train/positive/negatives overlap or the negative
// count is not uniform.
void ValidatePack(const EvaluationPack& pack);

InteractionLog LoadInteractions(const std::filesystem::path& path,
                                LogFormat format);

// Keeps events with rating >= threshold and sets their rating to 1.
InteractionLog Binarize(const InteractionLog& log, double threshold);

struct LastEventSplit {
  InteractionLog train;
  std::vector<Interaction> held_out;  // at most one per user, sorted by user
  std::vector<UserId> train_only_users;
};

// Moves each user's latest event (ties: larger item id) out of the log.
// Users with a single event keep it in train.
LastEventSplit SplitLastEvent(const InteractionLog& log);

EvaluationPack TemporalLeaveOneOut(const InteractionLog& log);

// Draws n distinct negatives per test user, uniformly among items that are
// neither in the user's train row nor the positive.
EvaluationPack SampleTestNegatives(EvaluationPack pack, std::size_t n,
                                   std::uint64_t seed);

// Reads <dir>/<name>.train.rating, .test.rating and .test.negative. When
// `name` is empty the unique *.train.rating file in `dir` decides it.
EvaluationPack LoadNcfSplit(const std::filesystem::path& dir,
                            std::string name = {});
void WriteNcfSplit(const EvaluationPack& pack, const std::filesystem::path& dir,
                   const std::string& name);

struct PopularityProfile {
  std::vector<std::size_t> counts;  // train interactions per item
  std::vector<ItemId> head;         // ascending ids
  std::vector<ItemId> tail;         // ascending ids
  std::vector<char> is_head;        // indexed by item
  double head_fraction = 0.2;

  bool InHead(ItemId item) const { return is_head[item] != 0; }
};

// Items ordered by (count desc, id asc); the first ceil(fraction * items)
// form the head, everything else (including never-seen items) the tail.
PopularityProfile BuildPopularityProfile(const SparseMatrix& train,
                                         double head_fraction);

// 64-bit FNV-1a over a file's bytes, for run manifests.
std::uint64_t FingerprintFile(const std::filesystem::path& path);

}  // namespace recbench
