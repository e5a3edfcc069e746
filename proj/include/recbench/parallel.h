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

namespace recbench {

// Every parallel loop in the library writes each iteration's result into its
// own output slot, so kSerial and kParallel produce bit-identical results.
enum class Execution { kSerial, kParallel };

int MaxThreads();
void SetThreads(int n);

// `grain` is the OpenMP dynamic-schedule chunk size.
template <class Body>
void ForEachIndex(Execution exec, std::size_t n, Body&& body,
                  std::int64_t grain = 1) {
  const auto count = static_cast<std::int64_t>(n);
  if (exec == Execution::kSerial) {
    for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
    return;
  }
#pragma omp parallel for schedule(dynamic, grain)
  for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace recbench
