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

#include "recbench/linear_models.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "recbench/errors.h"
#include "recbench/kernels.h"
#include "recbench/random.h"

namespace recbench {
namespace {

using Entry = std::pair<ItemId, double>;

// Keeps the k largest nonzero entries (ties: smaller id first), sorted by id.
void KeepTopK(std::vector<Entry>& entries, std::size_t k) {
  std::erase_if(entries, [](const Entry& e) { return e.second == 0.0; });
  auto better = [](const Entry& a, const Entry& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  };
  if (entries.size() > k) {
    std::nth_element(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(k),
                     entries.end(), better);
    entries.resize(k);
  }
  std::sort(entries.begin(), entries.end());
}

SparseMatrix FromRows(std::size_t rows, std::size_t cols,
                      const std::vector<std::vector<Entry>>& data) {
  std::vector<std::size_t> offsets(rows + 1, 0);
  for (std::size_t r = 0; r < rows; ++r) offsets[r + 1] = offsets[r] + data[r].size();
  std::vector<ItemId> indices;
  std::vector<double> values;
  indices.reserve(offsets.back());
  values.reserve(offsets.back());
  for (const auto& row : data) {
    for (const auto& [c, v] : row) {
      indices.push_back(c);
      values.push_back(v);
    }
  }
  return SparseMatrix(rows, cols, std::move(offsets), std::move(indices),
                      std::move(values));
}

RowMatrix Orthonormalize(const RowMatrix& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr{Eigen::MatrixXd(m)};
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  return q;
}

void CheckFinite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + ": non-finite result");
}

}  // namespace

TrainedModel FitMostPop(const SparseMatrix& train) {
  const auto counts = train.ColumnCounts();
  PopularityPayload payload{std::vector<double>(counts.begin(), counts.end())};
  return TrainedModel(Algorithm::kMostPop, train.rows(), train.cols(),
                      nlohmann::json::object(), std::move(payload));
}

TrainedModel FitEase(const SparseMatrix& train, const EaseOptions& options) {
  if (!(options.l2 > 0.0)) throw ContractError("EASE: l2 must be positive");
  const auto n = static_cast<Eigen::Index>(train.cols());
  Eigen::MatrixXd gram = kernels::Cooccurrence(train, options.exec);
  gram.diagonal().array() += options.l2;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("EASE: Gram matrix is not positive definite");
  }
  gram.resize(0, 0);

  // Inverse by column blocks; each block is an independent solve.
  constexpr Eigen::Index kBlock = 64;
  const Eigen::Index blocks = (n + kBlock - 1) / kBlock;
  Eigen::MatrixXd inverse(n, n);
  ForEachIndex(options.exec, static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const Eigen::Index first = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index width = std::min(kBlock, n - first);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, width);
    for (Eigen::Index k = 0; k < width; ++k) rhs(first + k, k) = 1.0;
    inverse.middleCols(first, width) = llt.solve(rhs);
  });

  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot = inverse(j, j);
    inverse.col(j) /= -pivot;
    inverse(j, j) = 0.0;
  }
  CheckFinite(inverse, "EASE");

  ItemItemPayload payload;
  payload.history = std::make_shared<const SparseMatrix>(train);
  payload.dense = std::move(inverse);
  payload.zero_diagonal = true;
  return TrainedModel(Algorithm::kEase, train.rows(), train.cols(),
                      {{"l2", options.l2}}, std::move(payload));
}

TrainedModel FitRp3Beta(const SparseMatrix& train, const Rp3BetaOptions& options) {
  if (options.beta < 0.0) throw ContractError("RP3beta: beta must be >= 0");
  if (options.top_k < 1) throw ContractError("RP3beta: top_k must be >= 1");
  const std::size_t n = train.cols();
  const SparseMatrix by_item = train.Transpose();

  std::vector<double> user_step(train.rows(), 0.0);  // P(u -> i), to the alpha
  for (std::size_t u = 0; u < train.rows(); ++u) {
    const double total = std::accumulate(train.RowValues(u).begin(),
                                         train.RowValues(u).end(), 0.0);
    if (total > 0.0) user_step[u] = std::pow(1.0 / total, options.alpha);
  }
  std::vector<double> item_step(n, 0.0);   // P(i -> u), to the alpha
  std::vector<double> penalty(n, 0.0);     // popularity^-beta, 0 when unseen
  for (std::size_t i = 0; i < n; ++i) {
    const double popularity = static_cast<double>(by_item.RowSize(i));
    if (popularity > 0.0) {
      item_step[i] = std::pow(1.0 / popularity, options.alpha);
      penalty[i] = std::pow(popularity, -options.beta);
    }
  }

  std::vector<std::vector<Entry>> rows(n);
  ForEachIndex(options.exec, n, [&](std::size_t i) {
    std::vector<double> acc(n, 0.0);
    const auto users = by_item.Row(i);
    for (ItemId u : users) {
      const double w = item_step[i] * user_step[u];
      for (ItemId j : train.Row(u)) acc[j] += w;
    }
    acc[i] = 0.0;
    std::vector<Entry> entries;
    for (std::size_t j = 0; j < n; ++j) {
      if (acc[j] != 0.0) entries.emplace_back(static_cast<ItemId>(j), acc[j] * penalty[j]);
    }
    KeepTopK(entries, options.top_k);
    if (options.normalize_similarity) {
      double sum = 0.0;
      for (const auto& e : entries) sum += std::abs(e.second);
      if (sum > 0.0) {
        for (auto& e : entries) e.second /= sum;
      }
    }
    rows[i] = std::move(entries);
  });

  // Per target column: keep the top_k sources.
  std::vector<std::vector<Entry>> by_target(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : rows[i]) by_target[j].emplace_back(static_cast<ItemId>(i), v);
  }
  for (auto& column : by_target) KeepTopK(column, options.top_k);

  ItemItemPayload payload;
  payload.history = std::make_shared<const SparseMatrix>(train);
  payload.sparse_by_target = FromRows(n, n, by_target);
  payload.zero_diagonal = true;
  return TrainedModel(Algorithm::kRp3Beta, train.rows(), n,
                      {{"alpha", options.alpha},
                       {"beta", options.beta},
                       {"top_k", options.top_k},
                       {"normalize_similarity", options.normalize_similarity}},
                      std::move(payload));
}

TrainedModel FitPureSvd(const SparseMatrix& train, const PureSvdOptions& options) {
  const std::size_t max_rank = std::min(train.rows(), train.cols());
  if (options.factors < 1 || options.factors > max_rank) {
    throw ContractError("PureSVD: factors must lie in [1, min(users, items)]");
  }
  const auto users = static_cast<Eigen::Index>(train.rows());
  const auto items = static_cast<Eigen::Index>(train.cols());
  const auto width = static_cast<Eigen::Index>(
      std::min(options.factors + options.oversample, max_rank));

  Rng rng(options.seed);
  RowMatrix omega(items, width);
  for (Eigen::Index r = 0; r < items; ++r) {
    for (Eigen::Index c = 0; c < width; ++c) omega(r, c) = rng.Normal(0.0, 1.0);
  }
  const SparseMatrix transposed = train.Transpose();
  RowMatrix basis = Orthonormalize(kernels::SparseTimesDense(train, omega, options.exec));
  for (std::size_t it = 0; it < options.power_iters; ++it) {
    const RowMatrix z =
        Orthonormalize(kernels::SparseTimesDense(transposed, basis, options.exec));
    basis = Orthonormalize(kernels::SparseTimesDense(train, z, options.exec));
  }
  // B = Q^T X, computed as (X^T Q)^T.
  const Eigen::MatrixXd projected =
      kernels::SparseTimesDense(transposed, basis, options.exec).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(projected, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  FitReport report;
  const double cutoff = sigma.size() > 0 ? sigma(0) * static_cast<double>(std::max(users, items)) *
                                               std::numeric_limits<double>::epsilon()
                                         : 0.0;
  Eigen::Index effective = 0;
  while (effective < sigma.size() && sigma(effective) > cutoff) ++effective;
  Eigen::Index factors = static_cast<Eigen::Index>(options.factors);
  if (factors > effective) {
    report.warnings.push_back("PureSVD: requested " + std::to_string(factors) +
                              " factors but the matrix has effective rank " +
                              std::to_string(effective) + "; truncated");
    factors = effective;
  }
  report.details["effective_rank"] = effective;

  LatentFactorPayload payload;
  payload.item_factors = svd.matrixV().leftCols(factors);
  payload.user_factors = kernels::SparseTimesDense(train, payload.item_factors, options.exec);
  payload.singular_values = sigma.head(factors);
  CheckFinite(payload.user_factors, "PureSVD");
  return TrainedModel(Algorithm::kPureSvd, train.rows(), train.cols(),
                      {{"factors", options.factors},
                       {"seed", options.seed},
                       {"oversample", options.oversample},
                       {"power_iters", options.power_iters}},
                      std::move(payload), std::move(report));
}

TrainedModel FitSlim(const SparseMatrix& train, const SlimOptions& options) {
  if (options.l1 < 0.0 || options.l2 < 0.0) {
    throw ContractError("SLIM: l1 and l2 must be >= 0");
  }
  const std::size_t n = train.cols();
  const Eigen::MatrixXd gram = kernels::Cooccurrence(train, options.exec);

  std::vector<std::vector<Entry>> columns(n);
  std::vector<std::size_t> sweeps(n, 0);
  std::vector<char> converged(n, 1);
  ForEachIndex(options.exec, n, [&](std::size_t j) {
    std::vector<ItemId> candidates;
    for (std::size_t c = 0; c < n; ++c) {
      if (c != j && gram(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) > 0.0) {
        candidates.push_back(static_cast<ItemId>(c));
      }
    }
    const auto col = gram.col(static_cast<Eigen::Index>(j));
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](ItemId a, ItemId b) { return col(a) > col(b); });
    if (candidates.size() > options.top_k) candidates.resize(options.top_k);
    std::sort(candidates.begin(), candidates.end());
    const auto m = static_cast<Eigen::Index>(candidates.size());
    if (m == 0) return;

    Eigen::MatrixXd a(m, m);
    Eigen::VectorXd residual(m);  // b - A w
    for (Eigen::Index p = 0; p < m; ++p) {
      residual(p) = col(candidates[p]);
      for (Eigen::Index q = 0; q < m; ++q) a(p, q) = gram(candidates[p], candidates[q]);
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    bool done = false;
    std::size_t sweep = 0;
    while (!done && sweep < options.max_iters) {
      ++sweep;
      double max_change = 0.0;
      for (Eigen::Index p = 0; p < m; ++p) {
        const double old = w(p);
        const double z = residual(p) + a(p, p) * old;
        const double updated = std::max(0.0, (z - options.l1) / (a(p, p) + options.l2));
        if (updated != old) {
          const double delta = updated - old;
          residual.noalias() -= delta * a.col(p);
          w(p) = updated;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      done = max_change < options.tol;
    }
    sweeps[j] = sweep;
    converged[j] = done ? 1 : 0;
    for (Eigen::Index p = 0; p < m; ++p) {
      if (w(p) > 0.0) columns[j].emplace_back(candidates[p], w(p));
    }
  });

  FitReport report;
  const auto stalled = static_cast<std::size_t>(std::count(converged.begin(), converged.end(), 0));
  report.details["nonconverged_columns"] = stalled;
  report.details["max_sweeps"] = sweeps.empty() ? 0 : *std::max_element(sweeps.begin(), sweeps.end());
  report.details["stopping_rule"] = "max |coefficient change| per sweep < tol, or max_iters sweeps";
  if (stalled > 0) {
    report.warnings.push_back("SLIM: " + std::to_string(stalled) +
                              " columns hit max_iters before converging");
  }

  ItemItemPayload payload;
  payload.history = std::make_shared<const SparseMatrix>(train);
  payload.sparse_by_target = FromRows(n, n, columns);
  payload.zero_diagonal = true;
  return TrainedModel(Algorithm::kSlim, train.rows(), n,
                      {{"l1", options.l1},
                       {"l2", options.l2},
                       {"top_k", options.top_k},
                       {"max_iters", options.max_iters},
                       {"tol", options.tol}},
                      std::move(payload), std::move(report));
}

double IalsObjective(const SparseMatrix& train, const RowMatrix& users,
                     const RowMatrix& items, double reg, double alpha) {
  const Eigen::MatrixXd item_gram = items.transpose() * items;
  // Every (u, i) pair with target 0 and weight 1 ...
  double total = ((users * item_gram).cwiseProduct(users)).sum();
  // ... corrected on observed entries to weight c and target 1.
  for (std::size_t u = 0; u < train.rows(); ++u) {
    const auto row = train.Row(u);
    const auto vals = train.RowValues(u);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double s = users.row(static_cast<Eigen::Index>(u)).dot(items.row(row[k]));
      const double c = 1.0 + alpha * vals[k];
      total += c * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  return total + reg * (users.squaredNorm() + items.squaredNorm());
}

namespace {

// Solves every row of `target` given the fixed factors of the other side.
void IalsHalfSweep(const SparseMatrix& rows, const RowMatrix& fixed, RowMatrix& target,
                   double reg, double alpha, Execution exec) {
  const Eigen::Index d = fixed.cols();
  const Eigen::MatrixXd base =
      Eigen::MatrixXd(fixed.transpose() * fixed) + reg * Eigen::MatrixXd::Identity(d, d);
  ForEachIndex(exec, rows.rows(), [&](std::size_t r) {
    Eigen::MatrixXd a = base;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    const auto row = rows.Row(r);
    const auto vals = rows.RowValues(r);
    for (std::size_t k = 0; k < row.size(); ++k) {
      const double c = 1.0 + alpha * vals[k];
      const auto f = fixed.row(row[k]).transpose();
      a.noalias() += (c - 1.0) * f * f.transpose();
      rhs.noalias() += c * f;
    }
    const Eigen::VectorXd x = a.llt().solve(rhs);
    const double residual = (a * x - rhs).norm();
    if (!(residual < 1e-6 * std::max(1.0, rhs.norm()))) {
      throw NumericalError("iALS: normal-equation residual " + std::to_string(residual) +
                           " for row " + std::to_string(r));
    }
    target.row(static_cast<Eigen::Index>(r)) = x.transpose();
  }, 16);
}

}  // namespace

TrainedModel FitIals(const SparseMatrix& train, const IalsOptions& options) {
  if (!(options.reg > 0.0)) throw ContractError("iALS: reg must be positive");
  if (options.epochs < 1) throw ContractError("iALS: epochs must be >= 1");
  if (options.factors < 1) throw ContractError("iALS: factors must be >= 1");
  const auto d = static_cast<Eigen::Index>(options.factors);
  Rng rng(options.seed);
  RowMatrix users(static_cast<Eigen::Index>(train.rows()), d);
  RowMatrix items(static_cast<Eigen::Index>(train.cols()), d);
  for (Eigen::Index k = 0; k < users.size(); ++k) users.data()[k] = rng.Normal(0.0, options.init_std);
  for (Eigen::Index k = 0; k < items.size(); ++k) items.data()[k] = rng.Normal(0.0, options.init_std);

  const SparseMatrix by_item = train.Transpose();
  std::vector<double> objective;
  objective.push_back(IalsObjective(train, users, items, options.reg, options.alpha));
  auto record = [&](const char* side, std::size_t epoch) {
    const double value = IalsObjective(train, users, items, options.reg, options.alpha);
    if (!std::isfinite(value)) throw NumericalError("iALS: non-finite objective");
    const double previous = objective.back();
    if (value > previous + 1e-10 * std::abs(previous) + 1e-12) {
      throw NumericalError("iALS: objective increased after " + std::string(side) +
                           " half-sweep of epoch " + std::to_string(epoch));
    }
    objective.push_back(value);
  };
  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    IalsHalfSweep(train, items, users, options.reg, options.alpha, options.exec);
    record("user", epoch);
    IalsHalfSweep(by_item, users, items, options.reg, options.alpha, options.exec);
    record("item", epoch);
  }

  FitReport report;
  report.details["objective"] = objective;
  LatentFactorPayload payload{std::move(users), std::move(items), Eigen::VectorXd()};
  return TrainedModel(Algorithm::kIals, train.rows(), train.cols(),
                      {{"factors", options.factors},
                       {"reg", options.reg},
                       {"alpha", options.alpha},
                       {"epochs", options.epochs},
                       {"seed", options.seed},
                       {"init_std", options.init_std}},
                      std::move(payload), std::move(report));
}

}  // namespace recbench
