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

// Central finite differences over named parameter blocks.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace recbench::oracle {

struct Block {
  std::string name;
  std::vector<double*> params;
  std::vector<double> analytic;  // same order as params
};

struct BlockError {
  std::string name;
  double relative = 0.0;
};

// ||analytic - numeric|| / max(||analytic||, ||numeric||), 0 when both vanish.
inline std::vector<BlockError> CheckBlocks(std::vector<Block>& blocks,
                                           const std::function<double()>& loss, double h) {
  std::vector<BlockError> errors;
  for (auto& b : blocks) {
    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t k = 0; k < b.params.size(); ++k) {
      double* x = b.params[k];
      const double saved = *x;
      *x = saved + h;
      const double up = loss();
      *x = saved - h;
      const double down = loss();
      *x = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff += (numeric - b.analytic[k]) * (numeric - b.analytic[k]);
      na += b.analytic[k] * b.analytic[k];
      nn += numeric * numeric;
    }
    const double scale = std::sqrt(std::max(na, nn));
    errors.push_back({b.name, scale < 1e-12 ? 0.0 : std::sqrt(diff) / scale});
  }
  return errors;
}

}  // namespace recbench::oracle
