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

#include <vector>

#include <Eigen/Dense>

namespace recbench {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Biased dot-product factorization:
//   score(u, i) = global_bias + user_bias[u] + item_bias[i] + <user.row(u), item.row(i)>
struct MFParams {
  RowMatrix user;
  RowMatrix item;
  double global_bias = 0.0;
  Eigen::VectorXd user_bias;
  Eigen::VectorXd item_bias;

  Eigen::Index dim() const { return user.cols(); }
};

// Fully connected layer y = weight * x + bias, weight is (out x in).
struct DenseLayer {
  RowMatrix weight;
  Eigen::VectorXd bias;
};

// GMF and MLP branches fused under one logistic prediction layer. The MLP
// tower consumes [mlp_user.row(u), mlp_item.row(i)] and every tower layer is
// followed by a ReLU. output_weight covers [tower output, gmf product].
struct NeuMFParams {
  RowMatrix gmf_user;
  RowMatrix gmf_item;
  RowMatrix mlp_user;
  RowMatrix mlp_item;
  std::vector<DenseLayer> tower;
  Eigen::VectorXd output_weight;
  double output_bias = 0.0;

  Eigen::Index gmf_dim() const { return gmf_user.cols(); }
  Eigen::Index mlp_out_dim() const {
    return tower.empty() ? mlp_user.cols() + mlp_item.cols()
                         : tower.back().weight.rows();
  }
};

}  // namespace recbench
