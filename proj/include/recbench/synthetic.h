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

#include "recbench/dataset.h"

namespace recbench {

// Clustered implicit-feedback data with Zipf item popularity. Items are
// split round-robin into `clusters`; each user prefers one cluster with
// probability `affinity`. The last item drawn for a user is held out as the
// test positive.
struct SyntheticOptions {
  std::size_t users = 200;
  std::size_t items = 100;
  std::size_t min_items = 5;
  std::size_t max_items = 20;
  std::size_t clusters = 4;
  double zipf = 1.0;
  double affinity = 0.8;
  std::size_t negatives = 20;
  std::uint64_t seed = 0;
};

EvaluationPack MakeSyntheticPack(const SyntheticOptions& options);

}  // namespace recbench
