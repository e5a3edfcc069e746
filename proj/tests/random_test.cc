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

#include <gtest/gtest.h>

#include "recbench/errors.h"

namespace recbench {
namespace {

TEST(RngTest, SeedDeterminesStream) {
  Rng a(42), b(42), c(43);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.Next();
    EXPECT_EQ(x, b.Next());
    if (k == 0) EXPECT_NE(x, c.Next());
  }
}

TEST(RngTest, SaveRestoreResumesStreamIncludingSpareNormal) {
  Rng a(7);
  a.Normal(0.0, 1.0);  // leaves a cached second deviate
  const std::string state = a.SaveState();
  Rng b(0);
  b.RestoreState(state);
  for (int k = 0; k < 20; ++k) {
    EXPECT_EQ(a.Normal(0.0, 1.0), b.Normal(0.0, 1.0));
    EXPECT_EQ(a.UniformIndex(17), b.UniformIndex(17));
  }
  EXPECT_THROW(b.RestoreState("garbage"), Error);
}

TEST(RngTest, RangesAndMoments) {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.UniformIndex(5), 5u);
    const double z = rng.Normal(2.0, 3.0);
    sum += z;
    sq += z * z;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 2.0, 5.0 * 3.0 / std::sqrt(n));
  EXPECT_NEAR(var, 9.0, 0.15);
  EXPECT_THROW(rng.UniformIndex(0), ContractError);
}

}  // namespace
}  // namespace recbench
