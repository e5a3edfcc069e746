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
#include <cstdio>
#include <limits>

#include "recbench/errors.h"

namespace recbench {
namespace {

// Continued fraction for I_x(a, b), modified Lentz.
double BetaContinuedFraction(double x, double a, double b) {
  constexpr int kMaxIterations = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

std::string Format4(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.4f", v);
  return buffer;
}

}  // namespace

double RegularizedIncompleteBeta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ContractError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw ContractError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * BetaContinuedFraction(x, a, b) / a;
  return 1.0 - front * BetaContinuedFraction(1.0 - x, b, a) / b;
}

double StudentTwoSidedP(double t, double dof) {
  if (!(dof > 0.0)) throw ContractError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ContractError("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return RegularizedIncompleteBeta(dof / (dof + t * t), 0.5 * dof, 0.5);
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractError("paired t-test: vectors have different lengths (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.size() < 2) throw ContractError("paired t-test needs at least two pairs");
  TTestResult result;
  result.n = a.size();
  const double n = static_cast<double>(a.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] - b[k];
  const double mean = sum / n;
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = (a[k] - b[k]) - mean;
    ss += e * e;
  }
  result.mean_difference = mean;
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    result.degenerate = true;
    result.t = 0.0;
    result.p = 1.0;
    return result;
  }
  result.t = mean / (sd / std::sqrt(n));
  result.p = StudentTwoSidedP(result.t, n - 1.0);
  return result;
}

std::size_t SignificanceMatrix::pair_count() const {
  return names.size() * (names.size() - 1) / 2;
}

double SignificanceMatrix::bonferroni_threshold() const {
  return pair_count() == 0 ? threshold : threshold / static_cast<double>(pair_count());
}

SignificanceMatrix BuildSignificanceMatrix(
    const std::map<std::string, std::vector<double>>& per_algorithm, const std::string& metric,
    double threshold) {
  if (per_algorithm.size() < 2) {
    throw ContractError("significance matrix needs at least two algorithms");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ContractError("significance threshold must lie in (0, 1)");
  }
  SignificanceMatrix m;
  m.metric = metric;
  m.threshold = threshold;
  std::vector<const std::vector<double>*> vectors;
  for (const auto& [name, values] : per_algorithm) {
    m.names.push_back(name);
    vectors.push_back(&values);
  }
  const std::size_t n = m.names.size();
  m.p_values.assign(n, std::vector<std::optional<double>>(n));
  m.t_values.assign(n, std::vector<std::optional<double>>(n));
  m.significant.assign(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const TTestResult r = PairedTTest(*vectors[a], *vectors[b]);
      m.p_values[a][b] = m.p_values[b][a] = r.p;
      m.t_values[a][b] = r.t;
      m.t_values[b][a] = -r.t;
      m.significant[a][b] = m.significant[b][a] = r.p < threshold;
    }
  }
  return m;
}

void WriteSignificanceTsv(std::ostream& out, const SignificanceMatrix& m) {
  out << "model";
  for (const auto& name : m.names) out << '\t' << name;
  out << '\n';
  for (std::size_t a = 0; a < m.names.size(); ++a) {
    out << m.names[a];
    for (std::size_t b = 0; b < m.names.size(); ++b) {
      out << '\t' << (m.p_values[a][b] ? Format4(*m.p_values[a][b]) : "NA");
    }
    out << '\n';
  }
}

void WriteSignificanceMaskTsv(std::ostream& out, const SignificanceMatrix& m) {
  out << "model";
  for (const auto& name : m.names) out << '\t' << name;
  out << '\n';
  for (std::size_t a = 0; a < m.names.size(); ++a) {
    out << m.names[a];
    for (std::size_t b = 0; b < m.names.size(); ++b) {
      out << '\t' << (a == b ? "NA" : (m.significant[a][b] ? "1" : "0"));
    }
    out << '\n';
  }
}

}  // namespace recbench
