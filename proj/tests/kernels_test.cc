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

#include "recbench/kernels.h"

#include <gtest/gtest.h>

#include "recbench/random.h"
#include "recbench/synthetic.h"

namespace recbench {
namespace {

class KernelsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    threads_ = MaxThreads();
    SetThreads(3);
  }
  void TearDown() override { SetThreads(threads_); }
  int threads_ = 1;
  SparseMatrix train_ =
      MakeSyntheticPack({.users = 150, .items = 60, .max_items = 12, .negatives = 5, .seed = 8}).train;
};

TEST_F(KernelsTest, CooccurrenceMatchesReferenceExactly) {
  const auto reference = kernels::CooccurrenceReference(train_);
  EXPECT_EQ(kernels::Cooccurrence(train_, Execution::kSerial), reference);
  EXPECT_EQ(kernels::Cooccurrence(train_, Execution::kParallel), reference);
  EXPECT_EQ(reference, reference.transpose());
  const auto counts = train_.ColumnCounts();
  for (Eigen::Index i = 0; i < reference.rows(); ++i) {
    EXPECT_EQ(reference(i, i), static_cast<double>(counts[static_cast<std::size_t>(i)]));
  }
}

TEST_F(KernelsTest, SparseTimesDenseMatchesReferenceExactly) {
  Rng rng(1);
  RowMatrix m(60, 7);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.Normal(0.0, 1.0);
  const auto reference = kernels::SparseTimesDenseReference(train_, m);
  EXPECT_EQ(kernels::SparseTimesDense(train_, m, Execution::kSerial), reference);
  EXPECT_EQ(kernels::SparseTimesDense(train_, m, Execution::kParallel), reference);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(150, 60);
  for (std::size_t u = 0; u < train_.rows(); ++u) {
    for (ItemId i : train_.Row(u)) dense(static_cast<Eigen::Index>(u), i) = 1.0;
  }
  EXPECT_LT((dense * m - reference).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ParallelTest, ForEachIndexVisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  ForEachIndex(Execution::kParallel, hits.size(), [&](std::size_t i) { hits[i] += 1; }, 7);
  for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace recbench
