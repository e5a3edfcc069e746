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

#include "recbench/embedding_models.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "recbench/errors.h"
#include "recbench/metrics.h"

namespace recbench {
namespace {

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void CheckIndices(std::size_t users, std::size_t items, UserId u, ItemId i) {
  if (u < 0 || static_cast<std::size_t>(u) >= users || i < 0 ||
      static_cast<std::size_t>(i) >= items) {
    throw ContractError("index out of range: user " + std::to_string(u) + ", item " +
                        std::to_string(i));
  }
}

// Intermediate values of one NeuMF forward pass.
struct NeuMfTrace {
  Eigen::VectorXd gmf;
  std::vector<Eigen::VectorXd> inputs;  // inputs[l] feeds tower layer l
  std::vector<Eigen::VectorXd> pre;     // pre-activations
  Eigen::VectorXd mlp;                  // tower output
  double logit = 0.0;
};

NeuMfTrace NeuMfTraceForward(const NeuMFParams& p, UserId u, ItemId i) {
  CheckIndices(static_cast<std::size_t>(p.gmf_user.rows()),
               static_cast<std::size_t>(p.gmf_item.rows()), u, i);
  NeuMfTrace t;
  t.gmf = p.gmf_user.row(u).cwiseProduct(p.gmf_item.row(i)).transpose();
  Eigen::VectorXd h(p.mlp_user.cols() + p.mlp_item.cols());
  h << p.mlp_user.row(u).transpose(), p.mlp_item.row(i).transpose();
  for (const auto& layer : p.tower) {
    t.inputs.push_back(h);
    Eigen::VectorXd z = layer.weight * h + layer.bias;
    t.pre.push_back(z);
    h = z.cwiseMax(0.0);
  }
  t.mlp = std::move(h);
  const Eigen::Index m = t.mlp.size();
  t.logit = p.output_weight.head(m).dot(t.mlp) + p.output_weight.tail(t.gmf.size()).dot(t.gmf) +
            p.output_bias;
  return t;
}

using RowGrads = std::map<Eigen::Index, Eigen::VectorXd>;

// Gradient with dense tower/output blocks and sparse embedding rows.
struct NeuMfSparseGrad {
  RowGrads gmf_user, gmf_item, mlp_user, mlp_item;
  std::vector<DenseLayer> tower;
  Eigen::VectorXd output_weight;
  double output_bias = 0.0;
};

void AddRow(RowGrads& grads, Eigen::Index row, const Eigen::VectorXd& g) {
  auto [it, inserted] = grads.try_emplace(row, g);
  if (!inserted) it->second += g;
}

// Returns the mean loss over `batch`.
double NeuMfAccumulate(const NeuMFParams& p, std::span<const Example> batch, double reg,
                       NeuMfSparseGrad& g) {
  g = NeuMfSparseGrad();
  for (const auto& layer : p.tower) {
    g.tower.push_back({RowMatrix::Zero(layer.weight.rows(), layer.weight.cols()),
                       Eigen::VectorXd::Zero(layer.bias.size())});
  }
  g.output_weight = Eigen::VectorXd::Zero(p.output_weight.size());
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const Eigen::Index f = p.gmf_dim();
  const Eigen::Index half = p.mlp_user.cols();
  double loss = 0.0;
  for (const Example& ex : batch) {
    const NeuMfTrace t = NeuMfTraceForward(p, ex.user, ex.item);
    const auto pu = p.gmf_user.row(ex.user).transpose();
    const auto qi = p.gmf_item.row(ex.item).transpose();
    const auto mu = p.mlp_user.row(ex.user).transpose();
    const auto mi = p.mlp_item.row(ex.item).transpose();
    loss += LogisticLoss(t.logit, ex.label) +
            0.5 * reg * (pu.squaredNorm() + qi.squaredNorm() + mu.squaredNorm() + mi.squaredNorm());

    const double dlogit = (Sigmoid(t.logit) - ex.label) * scale;
    const Eigen::Index m = t.mlp.size();
    g.output_bias += dlogit;
    g.output_weight.head(m) += dlogit * t.mlp;
    g.output_weight.tail(f) += dlogit * t.gmf;

    const Eigen::VectorXd dgmf = dlogit * p.output_weight.tail(f);
    AddRow(g.gmf_user, ex.user, dgmf.cwiseProduct(qi) + reg * scale * pu);
    AddRow(g.gmf_item, ex.item, dgmf.cwiseProduct(pu) + reg * scale * qi);

    Eigen::VectorXd dh = dlogit * p.output_weight.head(m);
    for (std::size_t l = p.tower.size(); l-- > 0;) {
      const Eigen::VectorXd dz = dh.cwiseProduct((t.pre[l].array() > 0.0).cast<double>().matrix());
      g.tower[l].weight.noalias() += dz * t.inputs[l].transpose();
      g.tower[l].bias += dz;
      dh = p.tower[l].weight.transpose() * dz;
    }
    AddRow(g.mlp_user, ex.user, dh.head(half) + reg * scale * mu);
    AddRow(g.mlp_item, ex.item, dh.tail(p.mlp_item.cols()) + reg * scale * mi);
  }
  return loss * scale;
}

NeuMFParams ZerosLike(const NeuMFParams& p) {
  NeuMFParams z;
  z.gmf_user = RowMatrix::Zero(p.gmf_user.rows(), p.gmf_user.cols());
  z.gmf_item = RowMatrix::Zero(p.gmf_item.rows(), p.gmf_item.cols());
  z.mlp_user = RowMatrix::Zero(p.mlp_user.rows(), p.mlp_user.cols());
  z.mlp_item = RowMatrix::Zero(p.mlp_item.rows(), p.mlp_item.cols());
  for (const auto& layer : p.tower) {
    z.tower.push_back({RowMatrix::Zero(layer.weight.rows(), layer.weight.cols()),
                       Eigen::VectorXd::Zero(layer.bias.size())});
  }
  z.output_weight = Eigen::VectorXd::Zero(p.output_weight.size());
  z.output_bias = 0.0;
  return z;
}

template <class Block>
void AdamUpdate(Block& param, Block& m, Block& v, const Block& grad,
                const AdamOptions& o, double c1, double c2) {
  m = o.beta1 * m + (1.0 - o.beta1) * grad;
  v = o.beta2 * v + (1.0 - o.beta2) * grad.cwiseProduct(grad);
  param -= (o.lr * (m / c1).array() / ((v / c2).array().sqrt() + o.epsilon)).matrix();
}

void AdamRows(RowMatrix& param, RowMatrix& m, RowMatrix& v, const RowGrads& grads,
              const AdamOptions& o, double c1, double c2) {
  for (const auto& [row, grad] : grads) {
    Eigen::VectorXd pr = param.row(row).transpose();
    Eigen::VectorXd mr = m.row(row).transpose();
    Eigen::VectorXd vr = v.row(row).transpose();
    AdamUpdate(pr, mr, vr, grad, o, c1, c2);
    param.row(row) = pr.transpose();
    m.row(row) = mr.transpose();
    v.row(row) = vr.transpose();
  }
}

bool AllFinite(const MFParams& p) {
  return p.user.allFinite() && p.item.allFinite() && std::isfinite(p.global_bias) &&
         p.user_bias.allFinite() && p.item_bias.allFinite();
}

bool AllFinite(const NeuMFParams& p) {
  bool ok = p.gmf_user.allFinite() && p.gmf_item.allFinite() && p.mlp_user.allFinite() &&
            p.mlp_item.allFinite() && p.output_weight.allFinite() && std::isfinite(p.output_bias);
  for (const auto& layer : p.tower) ok = ok && layer.weight.allFinite() && layer.bias.allFinite();
  return ok;
}

void Shuffle(std::vector<Example>& examples, Rng& rng) {
  for (std::size_t k = examples.size(); k > 1; --k) {
    const std::size_t j = rng.UniformIndex(k);
    std::swap(examples[k - 1], examples[j]);
  }
}

std::vector<Example> EpochExamples(const SparseMatrix& train, std::size_t negatives, Rng& rng) {
  std::vector<Example> examples;
  examples.reserve(train.nnz() * (negatives + 1));
  for (std::size_t u = 0; u < train.rows(); ++u) {
    const auto user = static_cast<UserId>(u);
    for (ItemId i : train.Row(u)) {
      examples.push_back({user, i, 1.0});
      for (ItemId n : SampleTrainingNegatives(train, user, negatives, rng)) {
        examples.push_back({user, n, 0.0});
      }
    }
  }
  Shuffle(examples, rng);
  return examples;
}

// Shared epoch loop: per-epoch HR@10 selection and checkpointing.
template <class Params>
struct TrainingState {
  explicit TrainingState(std::uint64_t seed) : rng(seed) {}
  Params params;
  Params best;
  std::vector<EpochRecord> trace;
  int best_epoch = -1;
  double best_hr = -1.0;
  Rng rng;
  std::optional<AdamState> adam;
};

nlohmann::json ResumeKey(const TrainConfig& config) {
  nlohmann::json j = config.ToJson();
  j.erase("epochs");
  return j;
}

void PutParams(Container& c, const std::string& prefix, const MFParams& p) {
  PutMFParams(c, prefix, p);
}
void PutParams(Container& c, const std::string& prefix, const NeuMFParams& p) {
  PutNeuMFParams(c, prefix, p);
}
void GetParams(const Container& c, const std::string& prefix, MFParams& p) {
  p = GetMFParams(c, prefix);
}
void GetParams(const Container& c, const std::string& prefix, NeuMFParams& p) {
  p = GetNeuMFParams(c, prefix);
}

template <class Params>
void SaveCheckpoint(const std::filesystem::path& path, Algorithm algorithm,
                    const TrainConfig& config, const TrainingState<Params>& s) {
  Container c;
  c.header["kind"] = "checkpoint";
  c.header["algorithm"] = AlgorithmName(algorithm);
  c.header["config"] = ResumeKey(config);
  c.header["epoch"] = s.trace.size();
  c.header["best_epoch"] = s.best_epoch;
  c.header["best_hr"] = s.best_hr;
  c.header["rng"] = s.rng.SaveState();
  PutParams(c, "params_", s.params);
  PutParams(c, "best_", s.best);
  if (s.adam) {
    c.header["adam_step"] = s.adam->step;
    PutNeuMFParams(c, "adam_m_", s.adam->m);
    PutNeuMFParams(c, "adam_v_", s.adam->v);
  }
  std::vector<double> trace;
  for (const auto& r : s.trace) {
    trace.insert(trace.end(), {static_cast<double>(r.epoch), r.loss, r.hit_rate, r.ndcg});
  }
  c.reals.emplace_back("trace", std::move(trace));
  const std::filesystem::path tmp = path.string() + ".tmp";
  WriteContainer(tmp, c);
  std::filesystem::rename(tmp, path);
}

template <class Params>
void LoadCheckpoint(const std::filesystem::path& path, Algorithm algorithm,
                    const TrainConfig& config, TrainingState<Params>& s) {
  const Container c = ReadContainer(path);
  if (c.header.value("kind", "") != "checkpoint" ||
      c.header.value("algorithm", "") != AlgorithmName(algorithm)) {
    throw ConfigError(path.string() + ": not a " + std::string(AlgorithmName(algorithm)) +
                      " checkpoint");
  }
  if (c.header.at("config") != ResumeKey(config)) {
    throw ConfigError(path.string() + ": checkpoint was written with a different configuration");
  }
  GetParams(c, "params_", s.params);
  GetParams(c, "best_", s.best);
  s.best_epoch = c.header.at("best_epoch").get<int>();
  s.best_hr = c.header.at("best_hr").get<double>();
  s.rng.RestoreState(c.header.at("rng").get<std::string>());
  if (c.header.contains("adam_step")) {
    s.adam = AdamState{GetNeuMFParams(c, "adam_m_"), GetNeuMFParams(c, "adam_v_"),
                       c.header.at("adam_step").get<std::int64_t>()};
  }
  const auto& trace = c.Real("trace");
  s.trace.clear();
  for (std::size_t k = 0; k + 4 <= trace.size(); k += 4) {
    s.trace.push_back({static_cast<int>(trace[k]), trace[k + 1], trace[k + 2], trace[k + 3]});
  }
}

template <class Params, class EpochFn>
TrainedModel RunTraining(Algorithm algorithm, const SparseMatrix& train,
                         const EvaluationPack& eval, const TrainConfig& config,
                         TrainingState<Params> state, EpochFn&& run_epoch) {
  ValidateTrainConfig(config, algorithm);
  if (!config.checkpoint.empty() && std::filesystem::exists(config.checkpoint)) {
    LoadCheckpoint(config.checkpoint, algorithm, config, state);
  }
  const bool select = !eval.tests.empty();
  for (auto epoch = static_cast<int>(state.trace.size()) + 1;
       epoch <= static_cast<int>(config.epochs); ++epoch) {
    const double loss = run_epoch(state, epoch);
    if (!std::isfinite(loss) || !AllFinite(state.params)) {
      throw TrainingDivergedError(epoch, config.learning_rate);
    }
    EpochRecord record{epoch, loss, 0.0, 0.0};
    if (select) {
      const TrainedModel snapshot(algorithm, train.rows(), train.cols(), nlohmann::json::object(),
                                  state.params);
      const HitRateNdcg m = EvaluateHitRate(snapshot, eval, 10, config.exec);
      record.hit_rate = m.hr;
      record.ndcg = m.ndcg;
    }
    state.trace.push_back(record);
    if (!select || record.hit_rate > state.best_hr) {
      state.best_hr = record.hit_rate;
      state.best_epoch = epoch;
      state.best = state.params;
    }
    if (!config.checkpoint.empty()) {
      SaveCheckpoint(config.checkpoint, algorithm, config, state);
    }
  }

  FitReport report;
  report.trace = state.trace;
  report.best_epoch = state.best_epoch;
  report.details["selection"] = select ? "HR@10 on the evaluation pack" : "last epoch";
  if (select) {
    report.warnings.push_back(
        "epoch selection uses the test positives (the replicated protocol); "
        "reported accuracy is optimistically biased");
  }
  return TrainedModel(algorithm, train.rows(), train.cols(), config.ToJson(),
                      std::move(state.best), std::move(report));
}

}  // namespace

double MfForward(const MFParams& p, UserId u, ItemId i) {
  CheckIndices(static_cast<std::size_t>(p.user.rows()), static_cast<std::size_t>(p.item.rows()),
               u, i);
  return p.global_bias + p.user_bias(u) + p.item_bias(i) + p.user.row(u).dot(p.item.row(i));
}

Eigen::VectorXd GmfForward(const NeuMFParams& p, UserId u, ItemId i) {
  CheckIndices(static_cast<std::size_t>(p.gmf_user.rows()),
               static_cast<std::size_t>(p.gmf_item.rows()), u, i);
  return p.gmf_user.row(u).cwiseProduct(p.gmf_item.row(i)).transpose();
}

Eigen::VectorXd MlpForward(const NeuMFParams& p, UserId u, ItemId i) {
  return NeuMfTraceForward(p, u, i).mlp;
}

double NeuMfLogit(const NeuMFParams& p, UserId u, ItemId i) {
  return NeuMfTraceForward(p, u, i).logit;
}

double NeuMfForward(const NeuMFParams& p, UserId u, ItemId i) {
  return Sigmoid(NeuMfLogit(p, u, i));
}

double LogisticLoss(double logit, double label) {
  const double softplus = logit > 0.0 ? logit + std::log1p(std::exp(-logit))
                                      : std::log1p(std::exp(logit));
  return softplus - label * logit;
}

double MfLoss(const MFParams& p, std::span<const Example> batch, double reg) {
  double loss = 0.0;
  for (const Example& ex : batch) {
    loss += LogisticLoss(MfForward(p, ex.user, ex.item), ex.label) +
            0.5 * reg *
                (p.user.row(ex.user).squaredNorm() + p.item.row(ex.item).squaredNorm() +
                 p.user_bias(ex.user) * p.user_bias(ex.user) +
                 p.item_bias(ex.item) * p.item_bias(ex.item));
  }
  return loss;
}

MFParams MfGradient(const MFParams& p, std::span<const Example> batch, double reg) {
  MFParams g;
  g.user = RowMatrix::Zero(p.user.rows(), p.user.cols());
  g.item = RowMatrix::Zero(p.item.rows(), p.item.cols());
  g.user_bias = Eigen::VectorXd::Zero(p.user_bias.size());
  g.item_bias = Eigen::VectorXd::Zero(p.item_bias.size());
  for (const Example& ex : batch) {
    const double d = Sigmoid(MfForward(p, ex.user, ex.item)) - ex.label;
    g.global_bias += d;
    g.user_bias(ex.user) += d + reg * p.user_bias(ex.user);
    g.item_bias(ex.item) += d + reg * p.item_bias(ex.item);
    g.user.row(ex.user) += d * p.item.row(ex.item) + reg * p.user.row(ex.user);
    g.item.row(ex.item) += d * p.user.row(ex.user) + reg * p.item.row(ex.item);
  }
  return g;
}

void MfSgdStep(MFParams& p, const Example& ex, double lr, double reg) {
  const double d = Sigmoid(MfForward(p, ex.user, ex.item)) - ex.label;
  const Eigen::VectorXd pu = p.user.row(ex.user).transpose();
  const Eigen::VectorXd qi = p.item.row(ex.item).transpose();
  p.user.row(ex.user) -= lr * (d * qi + reg * pu).transpose();
  p.item.row(ex.item) -= lr * (d * pu + reg * qi).transpose();
  p.user_bias(ex.user) -= lr * (d + reg * p.user_bias(ex.user));
  p.item_bias(ex.item) -= lr * (d + reg * p.item_bias(ex.item));
  p.global_bias -= lr * d;
}

double NeuMfLoss(const NeuMFParams& p, std::span<const Example> batch, double reg) {
  if (batch.empty()) return 0.0;
  double loss = 0.0;
  for (const Example& ex : batch) {
    loss += LogisticLoss(NeuMfLogit(p, ex.user, ex.item), ex.label) +
            0.5 * reg *
                (p.gmf_user.row(ex.user).squaredNorm() + p.gmf_item.row(ex.item).squaredNorm() +
                 p.mlp_user.row(ex.user).squaredNorm() + p.mlp_item.row(ex.item).squaredNorm());
  }
  return loss / static_cast<double>(batch.size());
}

NeuMFParams NeuMfGradient(const NeuMFParams& p, std::span<const Example> batch, double reg) {
  NeuMfSparseGrad sparse;
  NeuMfAccumulate(p, batch, reg, sparse);
  NeuMFParams g = ZerosLike(p);
  for (const auto& [row, v] : sparse.gmf_user) g.gmf_user.row(row) = v.transpose();
  for (const auto& [row, v] : sparse.gmf_item) g.gmf_item.row(row) = v.transpose();
  for (const auto& [row, v] : sparse.mlp_user) g.mlp_user.row(row) = v.transpose();
  for (const auto& [row, v] : sparse.mlp_item) g.mlp_item.row(row) = v.transpose();
  g.tower = std::move(sparse.tower);
  g.output_weight = std::move(sparse.output_weight);
  g.output_bias = sparse.output_bias;
  return g;
}

AdamState ZeroAdamState(const NeuMFParams& params) {
  return AdamState{ZerosLike(params), ZerosLike(params), 0};
}

double NeuMfAdamStep(NeuMFParams& p, AdamState& s, std::span<const Example> batch, double reg,
                     const AdamOptions& o) {
  NeuMfSparseGrad g;
  const double loss = NeuMfAccumulate(p, batch, reg, g);
  ++s.step;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(s.step));
  AdamRows(p.gmf_user, s.m.gmf_user, s.v.gmf_user, g.gmf_user, o, c1, c2);
  AdamRows(p.gmf_item, s.m.gmf_item, s.v.gmf_item, g.gmf_item, o, c1, c2);
  AdamRows(p.mlp_user, s.m.mlp_user, s.v.mlp_user, g.mlp_user, o, c1, c2);
  AdamRows(p.mlp_item, s.m.mlp_item, s.v.mlp_item, g.mlp_item, o, c1, c2);
  for (std::size_t l = 0; l < p.tower.size(); ++l) {
    AdamUpdate(p.tower[l].weight, s.m.tower[l].weight, s.v.tower[l].weight, g.tower[l].weight, o,
               c1, c2);
    AdamUpdate(p.tower[l].bias, s.m.tower[l].bias, s.v.tower[l].bias, g.tower[l].bias, o, c1, c2);
  }
  AdamUpdate(p.output_weight, s.m.output_weight, s.v.output_weight, g.output_weight, o, c1, c2);
  s.m.output_bias = o.beta1 * s.m.output_bias + (1.0 - o.beta1) * g.output_bias;
  s.v.output_bias = o.beta2 * s.v.output_bias + (1.0 - o.beta2) * g.output_bias * g.output_bias;
  p.output_bias -= o.lr * (s.m.output_bias / c1) / (std::sqrt(s.v.output_bias / c2) + o.epsilon);
  return loss;
}

MFParams InitMf(std::size_t num_users, std::size_t num_items, std::size_t dim, double init_std,
                Rng& rng) {
  MFParams p;
  p.user.resize(static_cast<Eigen::Index>(num_users), static_cast<Eigen::Index>(dim));
  p.item.resize(static_cast<Eigen::Index>(num_items), static_cast<Eigen::Index>(dim));
  for (Eigen::Index k = 0; k < p.user.size(); ++k) p.user.data()[k] = rng.Normal(0.0, init_std);
  for (Eigen::Index k = 0; k < p.item.size(); ++k) p.item.data()[k] = rng.Normal(0.0, init_std);
  p.user_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_users));
  p.item_bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_items));
  return p;
}

NeuMFParams InitNeuMf(std::size_t num_users, std::size_t num_items, std::size_t embedding_dim,
                      double init_std, Rng& rng) {
  if (embedding_dim == 0 || embedding_dim % 3 != 0) {
    throw ContractError("NeuMF embedding_dim must be a positive multiple of 3");
  }
  const auto f = static_cast<Eigen::Index>(embedding_dim / 3);
  const auto users = static_cast<Eigen::Index>(num_users);
  const auto items = static_cast<Eigen::Index>(num_items);
  auto normal = [&](Eigen::Index rows, Eigen::Index cols) {
    RowMatrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.Normal(0.0, init_std);
    return m;
  };
  NeuMFParams p;
  p.gmf_user = normal(users, f);
  p.gmf_item = normal(items, f);
  p.mlp_user = normal(users, 2 * f);
  p.mlp_item = normal(items, 2 * f);
  const Eigen::Index sizes[] = {4 * f, 2 * f, f};
  for (int l = 0; l < 2; ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    DenseLayer layer{RowMatrix(sizes[l + 1], sizes[l]), Eigen::VectorXd::Zero(sizes[l + 1])};
    for (Eigen::Index k = 0; k < layer.weight.size(); ++k) {
      layer.weight.data()[k] = rng.Uniform(-limit, limit);
    }
    p.tower.push_back(std::move(layer));
  }
  const double limit = std::sqrt(3.0 / static_cast<double>(2 * f));
  p.output_weight.resize(2 * f);
  for (Eigen::Index k = 0; k < p.output_weight.size(); ++k) {
    p.output_weight(k) = rng.Uniform(-limit, limit);
  }
  p.output_bias = 0.0;
  return p;
}

std::vector<ItemId> SampleTrainingNegatives(const SparseMatrix& train, UserId user, std::size_t m,
                                            Rng& rng) {
  if (m == 0) throw ContractError("negative count must be >= 1");
  if (user < 0 || static_cast<std::size_t>(user) >= train.rows()) {
    throw ContractError("user out of range: " + std::to_string(user));
  }
  const auto u = static_cast<std::size_t>(user);
  if (train.RowSize(u) >= train.cols()) {
    throw SamplingError("user " + std::to_string(user) + " has consumed the whole catalog");
  }
  std::vector<ItemId> out;
  out.reserve(m);
  while (out.size() < m) {
    const auto item = static_cast<ItemId>(rng.UniformIndex(train.cols()));
    if (!train.Contains(u, item)) out.push_back(item);
  }
  return out;
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"embedding_dim", embedding_dim},
          {"learning_rate", learning_rate},
          {"l2", l2},
          {"negatives_per_positive", negatives_per_positive},
          {"epochs", epochs},
          {"batch_size", batch_size},
          {"seed", seed},
          {"selection_metric", selection_metric},
          {"init_std", init_std}};
}

TrainConfig TrainConfigFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("training configuration must be an object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "l2") c.l2 = value.get<double>();
      else if (key == "negatives_per_positive") c.negatives_per_positive = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "selection_metric") c.selection_metric = value.get<std::string>();
      else if (key == "init_std") c.init_std = value.get<double>();
      else throw ConfigError("unknown training option: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad training option: ") + e.what());
  }
  return c;
}

void ValidateTrainConfig(const TrainConfig& c, Algorithm algorithm) {
  if (!IsEmbeddingAlgorithm(algorithm)) {
    throw ConfigError(std::string(AlgorithmName(algorithm)) + " is not trained by SGD");
  }
  if (c.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (algorithm == Algorithm::kNeuMf && c.embedding_dim % 3 != 0) {
    throw ConfigError("NeuMF embedding_dim must be a multiple of 3 (GMF f + MLP 2f)");
  }
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(c.l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  if (c.negatives_per_positive == 0) throw ConfigError("negatives_per_positive must be positive");
  if (c.epochs == 0) throw ConfigError("epochs must be positive");
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(c.init_std > 0.0)) throw ConfigError("init_std must be positive");
  if (c.selection_metric != "HR@10") throw ConfigError("selection_metric must be HR@10");
}

TrainedModel FitMf(const SparseMatrix& train, const EvaluationPack& eval,
                   const TrainConfig& config) {
  ValidateTrainConfig(config, Algorithm::kMf);
  TrainingState<MFParams> state(config.seed);
  state.params = InitMf(train.rows(), train.cols(), config.embedding_dim, config.init_std, state.rng);
  state.best = state.params;
  return RunTraining(Algorithm::kMf, train, eval, config, std::move(state),
                     [&](TrainingState<MFParams>& s, int) {
                       const auto examples =
                           EpochExamples(train, config.negatives_per_positive, s.rng);
                       double loss = 0.0;
                       for (const Example& ex : examples) {
                         loss += MfLoss(s.params, std::span(&ex, 1), config.l2);
                         MfSgdStep(s.params, ex, config.learning_rate, config.l2);
                       }
                       return examples.empty() ? 0.0 : loss / static_cast<double>(examples.size());
                     });
}

TrainedModel FitNeuMf(const SparseMatrix& train, const EvaluationPack& eval,
                      const TrainConfig& config) {
  ValidateTrainConfig(config, Algorithm::kNeuMf);
  TrainingState<NeuMFParams> state(config.seed);
  state.params =
      InitNeuMf(train.rows(), train.cols(), config.embedding_dim, config.init_std, state.rng);
  state.best = state.params;
  state.adam = ZeroAdamState(state.params);
  const AdamOptions adam{.lr = config.learning_rate};
  return RunTraining(
      Algorithm::kNeuMf, train, eval, config, std::move(state),
      [&](TrainingState<NeuMFParams>& s, int) {
        const auto examples = EpochExamples(train, config.negatives_per_positive, s.rng);
        double loss = 0.0;
        for (std::size_t start = 0; start < examples.size(); start += config.batch_size) {
          const std::size_t len = std::min(config.batch_size, examples.size() - start);
          const std::span<const Example> batch(examples.data() + start, len);
          loss += NeuMfAdamStep(s.params, *s.adam, batch, config.l2, adam) *
                  static_cast<double>(len);
        }
        return examples.empty() ? 0.0 : loss / static_cast<double>(examples.size());
      });
}

}  // namespace recbench
