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

#include "recbench/random.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "recbench/errors.h"

namespace recbench {

std::uint64_t Rng::UniformIndex(std::uint64_t n) {
  if (n == 0) throw ContractError("UniformIndex: empty range");
  // Rejection sampling on the largest multiple of n.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::Uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Normal(double mean, double stddev) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + stddev * spare_;
  }
  double u1;
  do {
    u1 = Uniform01();
  } while (u1 <= 0.0);
  const double u2 = Uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + stddev * radius * std::cos(angle);
}

std::string Rng::SaveState() const {
  std::ostringstream out;
  out.precision(17);
  out << engine_ << ' ' << has_spare_ << ' ' << std::hexfloat << spare_;
  return out.str();
}

void Rng::RestoreState(const std::string& state) {
  std::istringstream in(state);
  in >> engine_ >> has_spare_;
  std::string spare_text;
  in >> spare_text;
  if (!in && !in.eof()) throw ParseError("<rng state>", 1, "bad state");
  spare_ = std::strtod(spare_text.c_str(), nullptr);
}

}  // namespace recbench
