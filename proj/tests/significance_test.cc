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

#include "recbench/significance.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracle/quadrature.h"
#include "recbench/errors.h"

namespace recbench {
namespace {

TEST(StudentTest, MatchesQuadratureOracleGrid) {
  for (double n : {2.0, 5.0, 30.0, 1000.0}) {
    for (double t : {0.0, 0.5, 2.0, 10.0}) {
      const double dof = n - 1.0;
      const double expected = oracle::StudentTwoSidedTail(t, dof);
      EXPECT_NEAR(StudentTwoSidedP(t, dof), expected, 1e-9) << "n=" << n << " t=" << t;
      EXPECT_NEAR(StudentTwoSidedP(-t, dof), expected, 1e-9) << "n=" << n << " t=" << -t;
    }
  }
}

TEST(StudentTest, ClosedFormsForOneAndTwoDegrees) {
  // Cauchy: p = 1 - 2 atan(|t|) / pi; two dof: p = 1 - |t| / sqrt(2 + t^2).
  for (double t : {0.1, 1.0, 3.0, 40.0}) {
    EXPECT_NEAR(StudentTwoSidedP(t, 1.0), 1.0 - 2.0 * std::atan(t) / M_PI, 1e-12);
    EXPECT_NEAR(StudentTwoSidedP(t, 2.0), 1.0 - t / std::sqrt(2.0 + t * t), 1e-12);
  }
}

TEST(StudentTest, MonotoneDecreasingInAbsT) {
  for (double dof : {1.0, 4.0, 29.0, 999.0}) {
    double previous = 1.0 + 1e-15;
    for (double t = 0.0; t <= 12.0; t += 0.25) {
      const double p = StudentTwoSidedP(t, dof);
      EXPECT_LE(p, previous) << "dof=" << dof << " t=" << t;
      EXPECT_GE(p, 0.0);
      previous = p;
    }
  }
}

TEST(IncompleteBetaTest, KnownValuesAndSymmetry) {
  EXPECT_NEAR(RegularizedIncompleteBeta(0.5, 2.0, 2.0), 0.5, 1e-14);
  EXPECT_NEAR(RegularizedIncompleteBeta(0.3, 1.0, 1.0), 0.3, 1e-14);
  EXPECT_NEAR(RegularizedIncompleteBeta(0.2, 1.0, 3.0), 1.0 - std::pow(0.8, 3.0), 1e-14);
  EXPECT_EQ(RegularizedIncompleteBeta(0.0, 2.0, 3.0), 0.0);
  EXPECT_EQ(RegularizedIncompleteBeta(1.0, 2.0, 3.0), 1.0);
  for (double x : {0.05, 0.4, 0.9}) {
    EXPECT_NEAR(RegularizedIncompleteBeta(x, 2.5, 7.0),
                1.0 - RegularizedIncompleteBeta(1.0 - x, 7.0, 2.5), 1e-13);
  }
}

TEST(PairedTTestTest, RandomPairMatchesIndependentComputation) {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> a(10), b(10);
  for (int i = 0; i < 10; ++i) {
    a[i] = noise(gen);
    b[i] = a[i] + 0.4 + 0.5 * noise(gen);
  }
  double mean = 0.0;
  for (int i = 0; i < 10; ++i) mean += (a[i] - b[i]) / 10.0;
  double ss = 0.0;
  for (int i = 0; i < 10; ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double t = mean / std::sqrt(ss / 9.0 / 10.0);
  const auto r = PairedTTest(a, b);
  EXPECT_EQ(r.n, 10u);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.mean_difference, mean, 1e-14);
  EXPECT_NEAR(r.t, t, 1e-12);
  EXPECT_NEAR(r.p, oracle::StudentTwoSidedTail(t, 9.0), 1e-9);
}

TEST(PairedTTestTest, DegenerateAndSymmetricInputs) {
  const std::vector<double> a = {0.1, 0.5, 0.9};
  const auto same = PairedTTest(a, a);
  EXPECT_TRUE(same.degenerate);
  EXPECT_EQ(same.p, 1.0);
  const std::vector<double> d = {1, -1, 1, -1}, zero = {0, 0, 0, 0};
  const auto sym = PairedTTest(d, zero);
  EXPECT_EQ(sym.t, 0.0);
  EXPECT_DOUBLE_EQ(sym.p, 1.0);
  EXPECT_THROW(PairedTTest(a, d), ContractError);
  EXPECT_THROW(PairedTTest(std::vector<double>{1.0}, std::vector<double>{2.0}), ContractError);
}

TEST(PairedTTestTest, InvariantUnderSwapShiftAndScale) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(25), b(25), a2(25), b2(25);
    for (int i = 0; i < 25; ++i) {
      a[i] = u(gen);
      b[i] = u(gen) * 0.9;
      a2[i] = 3.0 * a[i] + 7.0;
      b2[i] = 3.0 * b[i] + 7.0;
    }
    const auto ab = PairedTTest(a, b), ba = PairedTTest(b, a), moved = PairedTTest(a2, b2);
    EXPECT_EQ(ab.t, -ba.t);
    EXPECT_EQ(ab.p, ba.p);
    EXPECT_NEAR(moved.t, ab.t, 1e-9 * std::max(1.0, std::abs(ab.t)));
    EXPECT_NEAR(moved.p, ab.p, 1e-9);
  }
}

TEST(SignificanceMatrixTest, IdenticalAlgorithmsAreNotSignificant) {
  const std::map<std::string, std::vector<double>> m = {{"A", {0, 1, 1, 0}}, {"B", {0, 1, 1, 0}}};
  const auto s = BuildSignificanceMatrix(m, "HR");
  EXPECT_EQ(s.pair_count(), 1u);
  EXPECT_EQ(*s.p_values[0][1], 1.0);
  EXPECT_FALSE(s.significant[0][1]);
  EXPECT_FALSE(s.p_values[0][0].has_value());
}

TEST(SignificanceMatrixTest, ThreeAlgorithmsGiveThreeSymmetricPairs) {
  std::mt19937_64 gen(8);
  std::bernoulli_distribution hit(0.5);
  std::map<std::string, std::vector<double>> m;
  for (const char* name : {"MF", "EASE", "NeuMF"}) {
    auto& v = m[name];
    for (int i = 0; i < 200; ++i) v.push_back(hit(gen) ? 1.0 : 0.0);
  }
  for (int i = 0; i < 120; ++i) m["MF"][i] = 1.0;
  const auto s = BuildSignificanceMatrix(m, "nDCG", 0.05);
  EXPECT_EQ(s.names, (std::vector<std::string>{"EASE", "MF", "NeuMF"}));
  EXPECT_EQ(s.pair_count(), 3u);
  EXPECT_DOUBLE_EQ(s.bonferroni_threshold(), 0.05 / 3.0);
  std::size_t computed = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      ASSERT_TRUE(s.p_values[a][b].has_value());
      ++computed;
      EXPECT_EQ(*s.p_values[a][b], *s.p_values[b][a]);
      EXPECT_EQ(*s.t_values[a][b], -*s.t_values[b][a]);
      EXPECT_EQ(s.significant[a][b], *s.p_values[a][b] < 0.05);
    }
  }
  EXPECT_EQ(computed, 6u);
  EXPECT_TRUE(s.significant[1][0]);

  std::ostringstream p, mask;
  WriteSignificanceTsv(p, s);
  WriteSignificanceMaskTsv(mask, s);
  EXPECT_EQ(p.str().substr(0, p.str().find('\n')), "model\tEASE\tMF\tNeuMF");
  EXPECT_NE(mask.str().find("EASE\tNA\t1\t"), std::string::npos);
}

TEST(SignificanceMatrixTest, ContractErrors) {
  EXPECT_THROW(BuildSignificanceMatrix({{"A", {1, 2}}}, "HR"), ContractError);
  EXPECT_THROW(BuildSignificanceMatrix({{"A", {1, 2}}, {"B", {1, 2, 3}}}, "HR"), ContractError);
}

}  // namespace
}  // namespace recbench
