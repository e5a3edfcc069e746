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

// Two-sided Student t tail by adaptive Simpson integration of the density.

#pragma once

#include <cmath>
#include <functional>

namespace recbench::oracle {

inline double AdaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                              double fa, double fm, double fb, double whole, double tol,
                              int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return AdaptiveSimpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         AdaptiveSimpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double Integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return AdaptiveSimpson(f, a, b, fa, fm, fb, whole, tol, 60);
}

inline double StudentDensity(double x, double dof) {
  const double log_c = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                       0.5 * std::log(dof * M_PI);
  return std::exp(log_c - 0.5 * (dof + 1.0) * std::log1p(x * x / dof));
}

// P(|T| >= |t|) = 2 * integral_{|t|}^inf f(x) dx with x = |t| + u / (1 - u).
inline double StudentTwoSidedTail(double t, double dof) {
  const double a = std::abs(t);
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double x = a + u / (1.0 - u);
    return StudentDensity(x, dof) / ((1.0 - u) * (1.0 - u));
  };
  return 2.0 * Integrate(g, 0.0, 1.0, 1e-13);
}

}  // namespace recbench::oracle
