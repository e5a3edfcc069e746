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

#include "recbench/synthetic.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "recbench/errors.h"
#include "recbench/random.h"

namespace recbench {

EvaluationPack MakeSyntheticPack(const SyntheticOptions& o) {
  if (o.clusters == 0 || o.items < o.clusters) {
    throw ContractError("synthetic data needs 1 <= clusters <= items");
  }
  if (o.min_items < 2 || o.max_items < o.min_items || o.max_items >= o.items / o.clusters) {
    throw ContractError("synthetic data needs 2 <= min_items <= max_items < items per cluster");
  }
  Rng rng(o.seed);
  // Cumulative Zipf weights within each cluster.
  std::vector<std::vector<ItemId>> members(o.clusters);
  for (std::size_t i = 0; i < o.items; ++i) members[i % o.clusters].push_back(static_cast<ItemId>(i));
  std::vector<std::vector<double>> cumulative(o.clusters);
  for (std::size_t c = 0; c < o.clusters; ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < members[c].size(); ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), o.zipf);
      cumulative[c].push_back(total);
    }
  }
  auto draw = [&](std::size_t cluster) {
    const auto& cum = cumulative[cluster];
    const double x = rng.Uniform01() * cum.back();
    const auto pos = std::upper_bound(cum.begin(), cum.end(), x) - cum.begin();
    return members[cluster][static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        pos, static_cast<std::ptrdiff_t>(cum.size()) - 1))];
  };

  EvaluationPack pack;
  std::vector<std::pair<UserId, ItemId>> pairs;
  for (std::size_t u = 0; u < o.users; ++u) {
    const std::size_t home = rng.UniformIndex(o.clusters);
    const std::size_t count = o.min_items + rng.UniformIndex(o.max_items - o.min_items + 1);
    std::set<ItemId> seen;
    ItemId last = 0;
    while (seen.size() < count) {
      const std::size_t cluster = rng.Uniform01() < o.affinity ? home : rng.UniformIndex(o.clusters);
      const ItemId item = draw(cluster);
      if (seen.insert(item).second) last = item;
    }
    for (ItemId i : seen) {
      if (i != last) pairs.emplace_back(static_cast<UserId>(u), i);
    }
    pack.tests.push_back({static_cast<UserId>(u), last, {}, 1.0, 0});
  }
  pack.train = SparseMatrix::FromPairs(o.users, o.items, std::move(pairs));
  return SampleTestNegatives(std::move(pack), o.negatives, o.seed + 1);
}

}  // namespace recbench
