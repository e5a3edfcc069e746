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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recbench/dataset.h"
#include "recbench/model.h"
#include "recbench/parallel.h"

namespace recbench {

// A user's candidates ordered by (score desc, item id asc), truncated to k.
struct RankedList {
  UserId user = 0;
  ItemId positive = 0;
  std::vector<ItemId> items;
  std::vector<double> scores;
  // 1-based rank of the positive among all candidates.
  std::size_t positive_rank = 0;
};

// `candidates` must contain `positive`; scores align with candidates.
RankedList RankScored(UserId user, ItemId positive,
                      std::span<const ItemId> candidates,
                      std::span<const double> scores, std::size_t k);

// Scores the positive and the negatives of `user`'s test case.
RankedList RankCandidates(const TrainedModel& model, const EvaluationPack& pack,
                          UserId user, std::size_t k);

// One list per test case, in pack order.
std::vector<RankedList> RankAll(const TrainedModel& model,
                                const EvaluationPack& pack, std::size_t k,
                                Execution exec);

struct AccuracyRecord {
  double hr = 0.0;
  double ndcg = 0.0;
  double mrr = 0.0;
  double map = 0.0;  // mean over cutoffs 1..k of precision@cutoff
  double mar = 0.0;  // mean over cutoffs 1..k of recall@cutoff
  double f1 = 0.0;
  double lauc = 0.0;
};

// Closed forms for a single relevant item at `positive_rank`.
// `full_negative_pool` is the number of items the user has not consumed,
// excluding the positive.
AccuracyRecord AccuracyPerUser(std::size_t positive_rank, std::size_t k,
                               std::size_t full_negative_pool);

inline constexpr std::string_view kAccuracyMetricNames[] = {
    "HR", "nDCG", "F1", "LAUC", "MAP", "MAR", "MRR"};
inline constexpr std::string_view kNoveltyDiversityMetricNames[] = {
    "EPC", "EFD", "IC", "Gini", "SE"};
inline constexpr std::string_view kBiasMetricNames[] = {
    "ACLT", "APLT", "ARP", "PopRSP", "PopREO"};

// Throws ContractError for names outside kAccuracyMetricNames.
double AccuracyValue(const AccuracyRecord& record, std::string_view metric);

// Arithmetic mean of every field, summed in input order.
AccuracyRecord Aggregate(std::span<const AccuracyRecord> records);

struct NoveltyResult {
  double epc = 0.0;
  double efd = 0.0;
  std::vector<double> epc_per_user;
  std::vector<double> efd_per_user;
};

// Only the hit item contributes, discounted by 1/log2(1 + rank) and
// normalized by the discount mass of a full k list.
//   EPC item novelty: 1 - pop / num_users
//   EFD item novelty: -log2(pop / num_interactions)
// with pop floored at 1.
NoveltyResult NoveltyMetrics(std::span<const RankedList> lists,
                             const PopularityProfile& profile,
                             std::size_t num_users, std::size_t k);

struct DiversityResult {
  std::size_t item_coverage = 0;
  double gini = 0.0;     // 1 - Gini index, higher is more diverse
  double entropy = 0.0;  // Shannon entropy in bits
};

DiversityResult DiversityMetrics(std::span<const RankedList> lists,
                                 std::size_t num_items);

struct BiasResult {
  double aclt = 0.0;
  double aplt = 0.0;
  double arp = 0.0;
  std::optional<double> pop_rsp;  // empty when undefined
  std::optional<double> pop_reo;
};

BiasResult BiasMetrics(std::span<const RankedList> lists,
                       const PopularityProfile& profile,
                       const SparseMatrix& train, std::size_t k);

// Population standard deviation over mean; empty when the mean is zero.
std::optional<double> DispersionRatio(std::span<const double> values);

// Everything computed for one model at one cutoff.
struct MetricReport {
  std::size_t k = 10;
  std::vector<UserId> users;
  std::vector<std::size_t> positive_ranks;
  std::vector<AccuracyRecord> per_user;
  AccuracyRecord mean;
  NoveltyResult novelty;
  DiversityResult diversity;
  BiasResult bias;

  // All seventeen aggregate values in table order; empty optional = undefined.
  std::vector<std::pair<std::string, std::optional<double>>> Values() const;
  std::optional<double> Value(std::string_view metric) const;
  // Per-user vectors exist for the accuracy metrics, EPC and EFD.
  std::vector<double> PerUser(std::string_view metric) const;
  static bool HasPerUser(std::string_view metric);
};

MetricReport EvaluateLists(std::span<const RankedList> lists,
                           const EvaluationPack& pack,
                           const PopularityProfile& profile, std::size_t k);

MetricReport Evaluate(const TrainedModel& model, const EvaluationPack& pack,
                      const PopularityProfile& profile, std::size_t k,
                      Execution exec);

// HR@k and nDCG@k only, for per-epoch model selection.
struct HitRateNdcg {
  double hr = 0.0;
  double ndcg = 0.0;
};
HitRateNdcg EvaluateHitRate(const TrainedModel& model,
                            const EvaluationPack& pack, std::size_t k,
                            Execution exec);

// `user <tab> metric <tab> value` rows for every per-user metric.
void WritePerUserTsv(std::ostream& out, const MetricReport& report);

bool IsKnownMetric(std::string_view metric);

}  // namespace recbench
