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

#include "recbench/model.h"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include "recbench/embedding_models.h"
#include "recbench/errors.h"

namespace recbench {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container format assumes a little-endian host");

constexpr char kMagic[8] = {'R', 'E', 'C', 'B', 'N', 'C', 'H', '1'};

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double SparseDot(std::span<const ItemId> a, std::span<const ItemId> b,
                 std::span<const double> b_values) {
  double sum = 0.0;
  std::size_t x = 0, y = 0;
  while (x < a.size() && y < b.size()) {
    if (a[x] < b[y]) {
      ++x;
    } else if (b[y] < a[x]) {
      ++y;
    } else {
      sum += b_values[y];
      ++x;
      ++y;
    }
  }
  return sum;
}

void PutCsr(Container& c, const std::string& prefix, const SparseMatrix& m) {
  c.header[prefix + "shape"] = {m.rows(), m.cols()};
  std::vector<std::int64_t> offsets(m.offsets().begin(), m.offsets().end());
  std::vector<std::int64_t> indices(m.indices().begin(), m.indices().end());
  c.integers.emplace_back(prefix + "offsets", std::move(offsets));
  c.integers.emplace_back(prefix + "indices", std::move(indices));
  c.reals.emplace_back(prefix + "values", m.values());
}

SparseMatrix GetCsr(const Container& c, const std::string& prefix) {
  const auto shape = c.header.at(prefix + "shape");
  const auto& offsets = c.Integer(prefix + "offsets");
  const auto& indices = c.Integer(prefix + "indices");
  return SparseMatrix(shape.at(0).get<std::size_t>(), shape.at(1).get<std::size_t>(),
                      std::vector<std::size_t>(offsets.begin(), offsets.end()),
                      std::vector<ItemId>(indices.begin(), indices.end()),
                      c.Real(prefix + "values"));
}

}  // namespace

std::string_view AlgorithmName(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kMostPop: return "MostPop";
    case Algorithm::kEase: return "EASE";
    case Algorithm::kRp3Beta: return "RP3beta";
    case Algorithm::kPureSvd: return "PureSVD";
    case Algorithm::kSlim: return "SLIM";
    case Algorithm::kIals: return "iALS";
    case Algorithm::kMf: return "MF";
    case Algorithm::kNeuMf: return "NeuMF";
  }
  return "?";
}

Algorithm ParseAlgorithm(std::string_view name) {
  const std::string key = Lower(name);
  for (Algorithm a : {Algorithm::kMostPop, Algorithm::kEase, Algorithm::kRp3Beta,
                      Algorithm::kPureSvd, Algorithm::kSlim, Algorithm::kIals,
                      Algorithm::kMf, Algorithm::kNeuMf}) {
    if (Lower(AlgorithmName(a)) == key) return a;
  }
  if (key == "easer" || key == "ease_r") return Algorithm::kEase;
  throw ConfigError("unknown model '" + std::string(name) + "'");
}

bool IsEmbeddingAlgorithm(Algorithm algorithm) {
  return algorithm == Algorithm::kMf || algorithm == Algorithm::kNeuMf;
}

double ItemItemPayload::Weight(ItemId source, ItemId target) const {
  if (is_dense()) return dense(source, target);
  const auto row = sparse_by_target.Row(target);
  const auto it = std::lower_bound(row.begin(), row.end(), source);
  if (it == row.end() || *it != source) return 0.0;
  return sparse_by_target.RowValues(target)[it - row.begin()];
}

TrainedModel::TrainedModel(Algorithm algorithm, std::size_t num_users,
                           std::size_t num_items, nlohmann::json hyperparameters,
                           ModelPayload payload, FitReport report)
    : algorithm_(algorithm),
      num_users_(num_users),
      num_items_(num_items),
      hyperparameters_(std::move(hyperparameters)),
      payload_(std::move(payload)),
      report_(std::move(report)) {}

std::vector<double> TrainedModel::Score(UserId user,
                                        std::span<const ItemId> items) const {
  if (user < 0 || static_cast<std::size_t>(user) >= num_users_) {
    throw ContractError("Score: user " + std::to_string(user) + " out of range");
  }
  for (ItemId i : items) {
    if (i < 0 || static_cast<std::size_t>(i) >= num_items_) {
      throw ContractError("Score: item " + std::to_string(i) + " out of range");
    }
  }
  std::vector<double> scores(items.size());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PopularityPayload>) {
          for (std::size_t k = 0; k < items.size(); ++k) scores[k] = p.counts[items[k]];
        } else if constexpr (std::is_same_v<T, ItemItemPayload>) {
          const auto history = p.history->Row(user);
          for (std::size_t k = 0; k < items.size(); ++k) {
            if (p.is_dense()) {
              double s = 0.0;
              for (ItemId src : history) s += p.dense(src, items[k]);
              scores[k] = s;
            } else {
              scores[k] = SparseDot(history, p.sparse_by_target.Row(items[k]),
                                    p.sparse_by_target.RowValues(items[k]));
            }
          }
        } else if constexpr (std::is_same_v<T, LatentFactorPayload>) {
          for (std::size_t k = 0; k < items.size(); ++k) {
            scores[k] = p.user_factors.row(user).dot(p.item_factors.row(items[k]));
          }
        } else if constexpr (std::is_same_v<T, MFParams>) {
          for (std::size_t k = 0; k < items.size(); ++k) {
            scores[k] = MfForward(p, user, items[k]);
          }
        } else if constexpr (std::is_same_v<T, NeuMFParams>) {
          for (std::size_t k = 0; k < items.size(); ++k) {
            scores[k] = NeuMfLogit(p, user, items[k]);
          }
        }
      },
      payload_);
  return scores;
}

// ---------------------------------------------------------------------------
// Container

const std::vector<double>& Container::Real(const std::string& name) const {
  for (const auto& [n, v] : reals) {
    if (n == name) return v;
  }
  throw DataError("container has no real array '" + name + "'");
}

const std::vector<std::int64_t>& Container::Integer(const std::string& name) const {
  for (const auto& [n, v] : integers) {
    if (n == name) return v;
  }
  throw DataError("container has no integer array '" + name + "'");
}

void WriteContainer(const std::filesystem::path& path, const Container& c) {
  nlohmann::json header = c.header;
  header["arrays"] = nlohmann::json::array();
  for (const auto& [name, v] : c.reals) {
    header["arrays"].push_back({{"name", name}, {"dtype", "f64"}, {"count", v.size()}});
  }
  for (const auto& [name, v] : c.integers) {
    header["arrays"].push_back({{"name", name}, {"dtype", "i64"}, {"count", v.size()}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t length = text.size();
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, v] : c.reals) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  for (const auto& [name, v] : c.integers) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(std::int64_t)));
  }
  if (!out) throw DataError("write failed for " + path.string());
}

Container ReadContainer(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + ": not a recbench container");
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw DataError(path.string() + ": truncated header");
  Container c;
  c.header = nlohmann::json::parse(text);
  for (const auto& a : c.header.at("arrays")) {
    const std::string name = a.at("name");
    const std::size_t count = a.at("count");
    if (a.at("dtype") == "f64") {
      std::vector<double> v(count);
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(count * sizeof(double)));
      c.reals.emplace_back(name, std::move(v));
    } else {
      std::vector<std::int64_t> v(count);
      in.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(count * sizeof(std::int64_t)));
      c.integers.emplace_back(name, std::move(v));
    }
    if (!in) throw DataError(path.string() + ": truncated array '" + name + "'");
  }
  c.header.erase("arrays");
  return c;
}

std::vector<double> Flatten(const RowMatrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

RowMatrix Unflatten(const std::vector<double>& data, Eigen::Index rows,
                    Eigen::Index cols) {
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw DataError("array size does not match its shape");
  }
  RowMatrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

void PutMatrix(Container& c, const std::string& name, const RowMatrix& m) {
  c.header["shape:" + name] = {m.rows(), m.cols()};
  c.reals.emplace_back(name, Flatten(m));
}

RowMatrix GetMatrix(const Container& c, const std::string& name) {
  const auto& shape = c.header.at("shape:" + name);
  return Unflatten(c.Real(name), shape.at(0).get<Eigen::Index>(),
                   shape.at(1).get<Eigen::Index>());
}

void PutVector(Container& c, const std::string& name, const Eigen::VectorXd& v) {
  c.reals.emplace_back(name, std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd GetVector(const Container& c, const std::string& name) {
  const auto& data = c.Real(name);
  return Eigen::Map<const Eigen::VectorXd>(data.data(),
                                           static_cast<Eigen::Index>(data.size()));
}

void PutMFParams(Container& c, const std::string& prefix, const MFParams& p) {
  PutMatrix(c, prefix + "user", p.user);
  PutMatrix(c, prefix + "item", p.item);
  PutVector(c, prefix + "user_bias", p.user_bias);
  PutVector(c, prefix + "item_bias", p.item_bias);
  PutVector(c, prefix + "global_bias", Eigen::VectorXd::Constant(1, p.global_bias));
}

MFParams GetMFParams(const Container& c, const std::string& prefix) {
  MFParams p;
  p.user = GetMatrix(c, prefix + "user");
  p.item = GetMatrix(c, prefix + "item");
  p.user_bias = GetVector(c, prefix + "user_bias");
  p.item_bias = GetVector(c, prefix + "item_bias");
  p.global_bias = GetVector(c, prefix + "global_bias")(0);
  return p;
}

void PutNeuMFParams(Container& c, const std::string& prefix, const NeuMFParams& p) {
  PutMatrix(c, prefix + "gmf_user", p.gmf_user);
  PutMatrix(c, prefix + "gmf_item", p.gmf_item);
  PutMatrix(c, prefix + "mlp_user", p.mlp_user);
  PutMatrix(c, prefix + "mlp_item", p.mlp_item);
  c.header[prefix + "tower_layers"] = p.tower.size();
  for (std::size_t l = 0; l < p.tower.size(); ++l) {
    PutMatrix(c, prefix + "tower" + std::to_string(l) + "_w", p.tower[l].weight);
    PutVector(c, prefix + "tower" + std::to_string(l) + "_b", p.tower[l].bias);
  }
  PutVector(c, prefix + "output_w", p.output_weight);
  PutVector(c, prefix + "output_b", Eigen::VectorXd::Constant(1, p.output_bias));
}

NeuMFParams GetNeuMFParams(const Container& c, const std::string& prefix) {
  NeuMFParams p;
  p.gmf_user = GetMatrix(c, prefix + "gmf_user");
  p.gmf_item = GetMatrix(c, prefix + "gmf_item");
  p.mlp_user = GetMatrix(c, prefix + "mlp_user");
  p.mlp_item = GetMatrix(c, prefix + "mlp_item");
  const std::size_t layers = c.header.at(prefix + "tower_layers");
  for (std::size_t l = 0; l < layers; ++l) {
    p.tower.push_back({GetMatrix(c, prefix + "tower" + std::to_string(l) + "_w"),
                       GetVector(c, prefix + "tower" + std::to_string(l) + "_b")});
  }
  p.output_weight = GetVector(c, prefix + "output_w");
  p.output_bias = GetVector(c, prefix + "output_b")(0);
  return p;
}

void SaveModel(const std::filesystem::path& path, const TrainedModel& model) {
  Container c;
  c.header["format"] = "recbench-model";
  c.header["version"] = 1;
  c.header["algorithm"] = AlgorithmName(model.algorithm());
  c.header["num_users"] = model.num_users();
  c.header["num_items"] = model.num_items();
  c.header["hyperparameters"] = model.hyperparameters();
  c.header["warnings"] = model.report().warnings;
  c.header["details"] = model.report().details;
  c.header["best_epoch"] = model.report().best_epoch;
  nlohmann::json trace = nlohmann::json::array();
  for (const EpochRecord& r : model.report().trace) {
    trace.push_back({r.epoch, r.loss, r.hit_rate, r.ndcg});
  }
  c.header["trace"] = trace;

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, PopularityPayload>) {
          c.header["payload"] = "popularity";
          c.reals.emplace_back("counts", p.counts);
        } else if constexpr (std::is_same_v<T, ItemItemPayload>) {
          c.header["payload"] = "item_item";
          c.header["zero_diagonal"] = p.zero_diagonal;
          c.header["dense"] = p.is_dense();
          PutCsr(c, "history_", *p.history);
          if (p.is_dense()) {
            PutMatrix(c, "weights", RowMatrix(p.dense));
          } else {
            PutCsr(c, "weights_t_", p.sparse_by_target);
          }
        } else if constexpr (std::is_same_v<T, LatentFactorPayload>) {
          c.header["payload"] = "latent";
          PutMatrix(c, "user_factors", p.user_factors);
          PutMatrix(c, "item_factors", p.item_factors);
          PutVector(c, "singular_values", p.singular_values);
        } else if constexpr (std::is_same_v<T, MFParams>) {
          c.header["payload"] = "mf";
          PutMFParams(c, "", p);
        } else if constexpr (std::is_same_v<T, NeuMFParams>) {
          c.header["payload"] = "neumf";
          PutNeuMFParams(c, "", p);
        }
      },
      model.payload());
  WriteContainer(path, c);
}

TrainedModel LoadModel(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  if (c.header.value("format", "") != "recbench-model") {
    throw DataError(path.string() + ": not a model file");
  }
  const Algorithm algorithm = ParseAlgorithm(c.header.at("algorithm").get<std::string>());
  const std::string kind = c.header.at("payload");
  ModelPayload payload;
  if (kind == "popularity") {
    payload = PopularityPayload{c.Real("counts")};
  } else if (kind == "item_item") {
    ItemItemPayload p;
    p.zero_diagonal = c.header.at("zero_diagonal");
    p.history = std::make_shared<const SparseMatrix>(GetCsr(c, "history_"));
    if (c.header.at("dense").get<bool>()) {
      p.dense = GetMatrix(c, "weights");
    } else {
      p.sparse_by_target = GetCsr(c, "weights_t_");
    }
    payload = std::move(p);
  } else if (kind == "latent") {
    payload = LatentFactorPayload{GetMatrix(c, "user_factors"),
                                  GetMatrix(c, "item_factors"),
                                  GetVector(c, "singular_values")};
  } else if (kind == "mf") {
    payload = GetMFParams(c, "");
  } else if (kind == "neumf") {
    payload = GetNeuMFParams(c, "");
  } else {
    throw DataError(path.string() + ": unknown payload '" + kind + "'");
  }
  FitReport report;
  report.warnings = c.header.at("warnings").get<std::vector<std::string>>();
  report.details = c.header.at("details");
  report.best_epoch = c.header.at("best_epoch");
  for (const auto& r : c.header.at("trace")) {
    report.trace.push_back({r.at(0).get<int>(), r.at(1).get<double>(),
                            r.at(2).get<double>(), r.at(3).get<double>()});
  }
  return TrainedModel(algorithm, c.header.at("num_users"), c.header.at("num_items"),
                      c.header.at("hyperparameters"), std::move(payload),
                      std::move(report));
}

}  // namespace recbench
