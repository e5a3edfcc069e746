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

#include <cstdint>
#include <random>
#include <string>

namespace recbench {

// Platform-stable random stream. The engine is std::mt19937_64 (fully
// specified by the standard); the distributions are implemented here because
// the standard library's distributions differ between implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformIndex(std::uint64_t n);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01();

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform01(); }

  // Box-Muller; the second variate of each pair is cached.
  double Normal(double mean, double stddev);

  // Textual state, sufficient to resume the stream bit-identically.
  std::string SaveState() const;
  void RestoreState(const std::string& state);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace recbench
