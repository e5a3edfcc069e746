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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace recbench {

// I_x(a, b) for a, b > 0 and x in [0, 1].
double RegularizedIncompleteBeta(double x, double a, double b);

// Two-sided tail probability P(|T| >= |t|) of Student's t with `dof` degrees
// of freedom.
double StudentTwoSidedP(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  std::size_t n = 0;
  double mean_difference = 0.0;
  // All differences equal: t is reported as 0 and p as 1.
  bool degenerate = false;
};

// Paired two-sided t-test on a - b with n - 1 degrees of freedom.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

struct SignificanceMatrix {
  std::string metric;
  std::vector<std::string> names;  // sorted
  double threshold = 0.05;
  // Symmetric; the diagonal is empty.
  std::vector<std::vector<std::optional<double>>> p_values;
  std::vector<std::vector<std::optional<double>>> t_values;  // t[a][b] = -t[b][a]
  std::vector<std::vector<bool>> significant;                // p < threshold

  std::size_t pair_count() const;
  // threshold / pair_count, reported alongside the raw mask.
  double bonferroni_threshold() const;
};

SignificanceMatrix BuildSignificanceMatrix(
    const std::map<std::string, std::vector<double>>& per_algorithm,
    const std::string& metric, double threshold = 0.05);

// Square TSV of p-values (4 decimals, "NA" on the diagonal) and the matching
// 0/1 mask.
void WriteSignificanceTsv(std::ostream& out, const SignificanceMatrix& m);
void WriteSignificanceMaskTsv(std::ostream& out, const SignificanceMatrix& m);

}  // namespace recbench
