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

#include <Eigen/Dense>

#include "recbench/dataset.h"
#include "recbench/params.h"
#include "recbench/parallel.h"

namespace recbench::kernels {

// Dense item-item co-occurrence X^T X of a CSR matrix.
//
// The reference accumulates each row's outer product in row order; the
// column kernel computes each output column independently from the
// transposed matrix, which parallelizes without write conflicts. Both sum
// integer-valued terms, so results agree exactly for binary input.
Eigen::MatrixXd CooccurrenceReference(const SparseMatrix& x);
Eigen::MatrixXd Cooccurrence(const SparseMatrix& x, Execution exec);

// X * M for CSR X and dense M (rows(M) == cols(X)).
RowMatrix SparseTimesDenseReference(const SparseMatrix& x, const RowMatrix& m);
RowMatrix SparseTimesDense(const SparseMatrix& x, const RowMatrix& m,
                           Execution exec);

}  // namespace recbench::kernels
