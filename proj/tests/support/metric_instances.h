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


// Random ranking instances with matching brute-force oracle cases.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "oracle/metrics.h"
#include "recbench/dataset.h"
#include "recbench/metrics.h"

namespace recbench::testing {

// One random instance: a pack, ranked lists, and the matching oracle cases.
struct Instance {
  EvaluationPack pack;
  std::vector<RankedList> lists;
  std::vector<oracle::UserCase> cases;
  std::vector<std::set<int>> train_sets;
  std::size_t k = 1;
};

inline Instance RandomInstance(std::mt19937_64& gen, std::size_t num_items) {
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
  };
  Instance in;
  const std::size_t users = pick(1, 5);
  std::vector<std::pair<UserId, ItemId>> pairs;
  std::vector<std::vector<ItemId>> candidates(users);
  for (std::size_t u = 0; u < users; ++u) {
    std::vector<ItemId> order(num_items);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), gen);
    const std::size_t consumed = pick(u == 0 ? 1 : 0, 3);
    std::set<int> train(order.begin(), order.begin() + static_cast<long>(consumed));
    for (int i : train) pairs.emplace_back(static_cast<UserId>(u), i);
    const std::size_t count = pick(2, 8);
    candidates[u].assign(order.begin() + static_cast<long>(consumed),
                         order.begin() + static_cast<long>(consumed + count));
    in.train_sets.push_back(train);
  }
  in.pack.train = SparseMatrix::FromPairs(users, num_items, pairs);
  in.k = pick(1, 10);
  for (std::size_t u = 0; u < users; ++u) {
    const ItemId positive = candidates[u][0];
    std::vector<ItemId> cand = candidates[u];
    std::shuffle(cand.begin(), cand.end(), gen);
    std::vector<double> scores;
    std::vector<oracle::Candidate> oc;
    for (ItemId i : cand) {
      scores.push_back(static_cast<double>(pick(0, 3)));
      oc.push_back({i, scores.back()});
    }
    in.pack.tests.push_back({static_cast<UserId>(u), positive,
                             std::vector<ItemId>(candidates[u].begin() + 1, candidates[u].end()),
                             1.0, 0});
    in.lists.push_back(RankScored(static_cast<UserId>(u), positive, cand, scores, in.k));
    in.cases.push_back({static_cast<int>(u), positive, oracle::FullRanking(oc), in.train_sets[u]});
  }
  return in;
}

// Head set by count desc, id asc, size ceil(fraction * n).
inline std::set<int> HeadOracle(const std::vector<double>& counts, double fraction) {
  std::vector<int> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return counts[a] > counts[b]; });
  const auto size = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(counts.size())));
  return {order.begin(), order.begin() + static_cast<long>(size)};
}

}  // namespace recbench::testing
