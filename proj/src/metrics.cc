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

#include "recbench/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "recbench/errors.h"

namespace recbench {
namespace {

double Discount(std::size_t rank) { return 1.0 / std::log2(1.0 + static_cast<double>(rank)); }

bool RanksBefore(double score_a, ItemId a, double score_b, ItemId b) {
  return score_a > score_b || (score_a == score_b && a < b);
}

std::size_t FullNegativePool(const EvaluationPack& pack, UserId user) {
  const std::size_t consumed = pack.train.RowSize(static_cast<std::size_t>(user)) + 1;
  return pack.num_items() > consumed ? pack.num_items() - consumed : 0;
}

}  // namespace

RankedList RankScored(UserId user, ItemId positive, std::span<const ItemId> candidates,
                      std::span<const double> scores, std::size_t k) {
  if (candidates.size() != scores.size()) {
    throw ContractError("RankScored: candidate and score counts differ");
  }
  std::size_t where = candidates.size();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (!std::isfinite(scores[c])) {
      throw NumericalError("non-finite score for user " + std::to_string(user) +
                           ", item " + std::to_string(candidates[c]));
    }
    if (candidates[c] == positive) where = c;
  }
  if (where == candidates.size()) {
    throw ContractError("RankScored: positive item is not a candidate");
  }
  RankedList list;
  list.user = user;
  list.positive = positive;
  list.positive_rank = 1;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (c != where && RanksBefore(scores[c], candidates[c], scores[where], positive)) {
      ++list.positive_rank;
    }
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  auto before = [&](std::size_t a, std::size_t b) {
    return RanksBefore(scores[a], candidates[a], scores[b], candidates[b]);
  };
  const std::size_t keep = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    before);
  for (std::size_t r = 0; r < keep; ++r) {
    list.items.push_back(candidates[order[r]]);
    list.scores.push_back(scores[order[r]]);
  }
  return list;
}

RankedList RankCandidates(const TrainedModel& model, const EvaluationPack& pack, UserId user,
                          std::size_t k) {
  const TestCase* test = pack.Find(user);
  if (test == nullptr) {
    throw ContractError("user " + std::to_string(user) + " has no test entry");
  }
  std::vector<ItemId> candidates;
  candidates.reserve(test->negatives.size() + 1);
  candidates.push_back(test->positive);
  candidates.insert(candidates.end(), test->negatives.begin(), test->negatives.end());
  const std::vector<double> scores = model.Score(user, candidates);
  return RankScored(user, test->positive, candidates, scores, k);
}

std::vector<RankedList> RankAll(const TrainedModel& model, const EvaluationPack& pack,
                                std::size_t k, Execution exec) {
  std::vector<RankedList> lists(pack.tests.size());
  ForEachIndex(exec, lists.size(), [&](std::size_t t) {
    lists[t] = RankCandidates(model, pack, pack.tests[t].user, k);
  }, 8);
  return lists;
}

AccuracyRecord AccuracyPerUser(std::size_t positive_rank, std::size_t k,
                               std::size_t full_negative_pool) {
  if (positive_rank == 0) throw ContractError("positive rank is undefined");
  if (k == 0) throw ContractError("cutoff must be >= 1");
  AccuracyRecord record;
  const std::size_t r = positive_rank;
  if (r > k) return record;
  if (full_negative_pool < r - 1) {
    throw ContractError("negative pool smaller than the number of items ranked above the positive");
  }
  const double kd = static_cast<double>(k);
  record.hr = 1.0;
  record.ndcg = Discount(r);
  record.mrr = 1.0 / static_cast<double>(r);
  double precision_sum = 0.0;
  for (std::size_t j = r; j <= k; ++j) precision_sum += 1.0 / static_cast<double>(j);
  record.map = precision_sum / kd;
  record.mar = static_cast<double>(k - r + 1) / kd;
  record.f1 = 2.0 / (kd + 1.0);
  record.lauc = full_negative_pool == 0
                    ? 1.0
                    : 1.0 - static_cast<double>(r - 1) / static_cast<double>(full_negative_pool);
  return record;
}

double AccuracyValue(const AccuracyRecord& record, std::string_view metric) {
  if (metric == "HR") return record.hr;
  if (metric == "nDCG") return record.ndcg;
  if (metric == "F1") return record.f1;
  if (metric == "LAUC") return record.lauc;
  if (metric == "MAP") return record.map;
  if (metric == "MAR") return record.mar;
  if (metric == "MRR") return record.mrr;
  throw ContractError("not an accuracy metric: " + std::string(metric));
}

AccuracyRecord Aggregate(std::span<const AccuracyRecord> records) {
  if (records.empty()) throw ContractError("Aggregate: no records");
  AccuracyRecord sum;
  for (const auto& r : records) {
    sum.hr += r.hr;
    sum.ndcg += r.ndcg;
    sum.mrr += r.mrr;
    sum.map += r.map;
    sum.mar += r.mar;
    sum.f1 += r.f1;
    sum.lauc += r.lauc;
  }
  const double n = static_cast<double>(records.size());
  return {sum.hr / n, sum.ndcg / n, sum.mrr / n, sum.map / n,
          sum.mar / n, sum.f1 / n, sum.lauc / n};
}

NoveltyResult NoveltyMetrics(std::span<const RankedList> lists, const PopularityProfile& profile,
                             std::size_t num_users, std::size_t k) {
  if (k == 0) throw ContractError("cutoff must be >= 1");
  if (num_users == 0) throw ContractError("NoveltyMetrics: no users");
  double interactions = 0.0;
  for (std::size_t c : profile.counts) interactions += static_cast<double>(c);
  interactions = std::max(interactions, 1.0);
  double discount_mass = 0.0;
  for (std::size_t r = 1; r <= k; ++r) discount_mass += Discount(r);

  NoveltyResult result;
  result.epc_per_user.assign(lists.size(), 0.0);
  result.efd_per_user.assign(lists.size(), 0.0);
  for (std::size_t u = 0; u < lists.size(); ++u) {
    const RankedList& list = lists[u];
    if (list.positive_rank > k || list.positive_rank > list.items.size()) continue;
    const double pop =
        std::max(1.0, static_cast<double>(profile.counts.at(static_cast<std::size_t>(list.positive))));
    const double weight = Discount(list.positive_rank) / discount_mass;
    result.epc_per_user[u] = weight * (1.0 - pop / static_cast<double>(num_users));
    result.efd_per_user[u] = weight * -std::log2(pop / interactions);
  }
  if (!lists.empty()) {
    const double n = static_cast<double>(lists.size());
    result.epc = std::accumulate(result.epc_per_user.begin(), result.epc_per_user.end(), 0.0) / n;
    result.efd = std::accumulate(result.efd_per_user.begin(), result.efd_per_user.end(), 0.0) / n;
  }
  return result;
}

DiversityResult DiversityMetrics(std::span<const RankedList> lists, std::size_t num_items) {
  std::vector<double> counts(num_items, 0.0);
  double total = 0.0;
  for (const auto& list : lists) {
    for (ItemId i : list.items) {
      counts.at(static_cast<std::size_t>(i)) += 1.0;
      total += 1.0;
    }
  }
  DiversityResult result;
  for (double c : counts) {
    if (c > 0.0) {
      ++result.item_coverage;
      const double p = c / total;
      result.entropy -= p * std::log2(p);
    }
  }
  if (total > 0.0 && num_items > 1) {
    std::sort(counts.begin(), counts.end());
    const double n = static_cast<double>(num_items);
    double weighted = 0.0;
    for (std::size_t j = 0; j < num_items; ++j) {
      weighted += (2.0 * static_cast<double>(j + 1) - n - 1.0) * counts[j];
    }
    result.gini = 1.0 - weighted / ((n - 1.0) * total);
  } else {
    result.gini = total > 0.0 ? 1.0 : 0.0;
  }
  return result;
}

std::optional<double> DispersionRatio(std::span<const double> values) {
  if (values.empty()) return std::nullopt;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (mean == 0.0) return std::nullopt;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / n) / mean;
}

BiasResult BiasMetrics(std::span<const RankedList> lists, const PopularityProfile& profile,
                       const SparseMatrix& train, std::size_t k) {
  if (k == 0) throw ContractError("cutoff must be >= 1");
  BiasResult result;
  if (lists.empty()) return result;
  const double head_size = static_cast<double>(profile.head.size());
  const double tail_size = static_cast<double>(profile.tail.size());
  double tail_sum = 0.0;
  double popularity_sum = 0.0;
  // [0] head, [1] tail
  double rec_hits[2] = {0.0, 0.0};
  double rec_pool[2] = {0.0, 0.0};
  double eo_hits[2] = {0.0, 0.0};
  double eo_pool[2] = {0.0, 0.0};
  for (const auto& list : lists) {
    std::size_t tail_items = 0;
    double popularity = 0.0;
    for (ItemId i : list.items) {
      const int g = profile.InHead(i) ? 0 : 1;
      tail_items += static_cast<std::size_t>(g);
      popularity += static_cast<double>(profile.counts[static_cast<std::size_t>(i)]);
      if (!train.Contains(static_cast<std::size_t>(list.user), i)) rec_hits[g] += 1.0;
    }
    tail_sum += static_cast<double>(tail_items);
    if (!list.items.empty()) popularity_sum += popularity / static_cast<double>(list.items.size());

    double consumed_head = 0.0;
    for (ItemId i : train.Row(static_cast<std::size_t>(list.user))) {
      consumed_head += profile.InHead(i) ? 1.0 : 0.0;
    }
    const double consumed = static_cast<double>(train.RowSize(static_cast<std::size_t>(list.user)));
    rec_pool[0] += head_size - consumed_head;
    rec_pool[1] += tail_size - (consumed - consumed_head);

    const int pg = profile.InHead(list.positive) ? 0 : 1;
    eo_pool[pg] += 1.0;
    if (list.positive_rank <= std::min(k, list.items.size())) eo_hits[pg] += 1.0;
  }
  const double n = static_cast<double>(lists.size());
  result.aclt = tail_sum / n;
  result.aplt = result.aclt / static_cast<double>(k);
  result.arp = popularity_sum / n;
  auto ratio = [](const double hits[2], const double pool[2]) -> std::optional<double> {
    if (pool[0] <= 0.0 || pool[1] <= 0.0) return std::nullopt;
    const double p[2] = {hits[0] / pool[0], hits[1] / pool[1]};
    return DispersionRatio(p);
  };
  result.pop_rsp = ratio(rec_hits, rec_pool);
  result.pop_reo = ratio(eo_hits, eo_pool);
  return result;
}

std::vector<std::pair<std::string, std::optional<double>>> MetricReport::Values() const {
  std::vector<std::pair<std::string, std::optional<double>>> values;
  for (std::string_view name : kAccuracyMetricNames) {
    values.emplace_back(std::string(name), AccuracyValue(mean, name));
  }
  values.emplace_back("EPC", novelty.epc);
  values.emplace_back("EFD", novelty.efd);
  values.emplace_back("IC", static_cast<double>(diversity.item_coverage));
  values.emplace_back("Gini", diversity.gini);
  values.emplace_back("SE", diversity.entropy);
  values.emplace_back("ACLT", bias.aclt);
  values.emplace_back("APLT", bias.aplt);
  values.emplace_back("ARP", bias.arp);
  values.emplace_back("PopRSP", bias.pop_rsp);
  values.emplace_back("PopREO", bias.pop_reo);
  return values;
}

std::optional<double> MetricReport::Value(std::string_view metric) const {
  for (const auto& [name, value] : Values()) {
    if (name == metric) return value;
  }
  throw ContractError("unknown metric: " + std::string(metric));
}

bool MetricReport::HasPerUser(std::string_view metric) {
  if (metric == "EPC" || metric == "EFD") return true;
  return std::find(std::begin(kAccuracyMetricNames), std::end(kAccuracyMetricNames), metric) !=
         std::end(kAccuracyMetricNames);
}

std::vector<double> MetricReport::PerUser(std::string_view metric) const {
  if (metric == "EPC") return novelty.epc_per_user;
  if (metric == "EFD") return novelty.efd_per_user;
  std::vector<double> values;
  values.reserve(per_user.size());
  for (const auto& r : per_user) values.push_back(AccuracyValue(r, metric));
  return values;
}

bool IsKnownMetric(std::string_view metric) {
  auto contains = [&](std::span<const std::string_view> names) {
    return std::find(names.begin(), names.end(), metric) != names.end();
  };
  return contains(kAccuracyMetricNames) || contains(kNoveltyDiversityMetricNames) ||
         contains(kBiasMetricNames);
}

MetricReport EvaluateLists(std::span<const RankedList> lists, const EvaluationPack& pack,
                           const PopularityProfile& profile, std::size_t k) {
  if (lists.empty()) throw ContractError("no test users to evaluate");
  MetricReport report;
  report.k = k;
  for (const auto& list : lists) {
    report.users.push_back(list.user);
    report.positive_ranks.push_back(list.positive_rank);
    report.per_user.push_back(
        AccuracyPerUser(list.positive_rank, k, FullNegativePool(pack, list.user)));
  }
  report.mean = Aggregate(report.per_user);
  report.novelty = NoveltyMetrics(lists, profile, pack.num_users(), k);
  report.diversity = DiversityMetrics(lists, pack.num_items());
  report.bias = BiasMetrics(lists, profile, pack.train, k);
  return report;
}

MetricReport Evaluate(const TrainedModel& model, const EvaluationPack& pack,
                      const PopularityProfile& profile, std::size_t k, Execution exec) {
  const auto lists = RankAll(model, pack, k, exec);
  return EvaluateLists(lists, pack, profile, k);
}

HitRateNdcg EvaluateHitRate(const TrainedModel& model, const EvaluationPack& pack, std::size_t k,
                            Execution exec) {
  if (pack.tests.empty()) throw ContractError("no test users to evaluate");
  const auto lists = RankAll(model, pack, k, exec);
  HitRateNdcg result;
  for (const auto& list : lists) {
    if (list.positive_rank <= k) {
      result.hr += 1.0;
      result.ndcg += Discount(list.positive_rank);
    }
  }
  result.hr /= static_cast<double>(lists.size());
  result.ndcg /= static_cast<double>(lists.size());
  return result;
}

void WritePerUserTsv(std::ostream& out, const MetricReport& report) {
  out << "user\tmetric\tvalue\n";
  char buffer[64];
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  for (std::string_view name : kAccuracyMetricNames) {
    columns.emplace_back(std::string(name), report.PerUser(name));
  }
  columns.emplace_back("EPC", report.novelty.epc_per_user);
  columns.emplace_back("EFD", report.novelty.efd_per_user);
  for (std::size_t u = 0; u < report.users.size(); ++u) {
    for (const auto& [name, values] : columns) {
      std::snprintf(buffer, sizeof(buffer), "%.4f", values[u]);
      out << report.users[u] << '\t' << name << '\t' << buffer << '\n';
    }
  }
}

}  // namespace recbench
