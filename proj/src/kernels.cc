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

#include "recbench/errors.h"

namespace recbench::kernels {

Eigen::MatrixXd CooccurrenceReference(const SparseMatrix& x) {
  const auto n = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.Row(r);
    const auto vals = x.RowValues(r);
    for (std::size_t a = 0; a < row.size(); ++a) {
      for (std::size_t b = 0; b < row.size(); ++b) {
        g(row[a], row[b]) += vals[a] * vals[b];
      }
    }
  }
  return g;
}

Eigen::MatrixXd Cooccurrence(const SparseMatrix& x, Execution exec) {
  const auto n = static_cast<Eigen::Index>(x.cols());
  const SparseMatrix xt = x.Transpose();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  // Column j of G: sum over rows r containing j of x[r][j] * x[r][:].
  ForEachIndex(exec, x.cols(), [&](std::size_t j) {
    double* column = g.col(static_cast<Eigen::Index>(j)).data();
    const auto rows = xt.Row(j);
    const auto weights = xt.RowValues(j);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto row = x.Row(rows[k]);
      const auto vals = x.RowValues(rows[k]);
      for (std::size_t a = 0; a < row.size(); ++a) column[row[a]] += weights[k] * vals[a];
    }
  });
  return g;
}

RowMatrix SparseTimesDenseReference(const SparseMatrix& x, const RowMatrix& m) {
  if (static_cast<Eigen::Index>(x.cols()) != m.rows()) {
    throw ContractError("SparseTimesDense: shape mismatch");
  }
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(x.rows()), m.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.Row(r);
    const auto vals = x.RowValues(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        out(static_cast<Eigen::Index>(r), c) += vals[k] * m(row[k], c);
      }
    }
  }
  return out;
}

RowMatrix SparseTimesDense(const SparseMatrix& x, const RowMatrix& m,
                           Execution exec) {
  if (static_cast<Eigen::Index>(x.cols()) != m.rows()) {
    throw ContractError("SparseTimesDense: shape mismatch");
  }
  RowMatrix out = RowMatrix::Zero(static_cast<Eigen::Index>(x.rows()), m.cols());
  ForEachIndex(exec, x.rows(), [&](std::size_t r) {
    const auto row = x.Row(r);
    const auto vals = x.RowValues(r);
    auto dst = out.row(static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < row.size(); ++k) dst += vals[k] * m.row(row[k]);
  });
  return out;
}

}  // namespace recbench::kernels
