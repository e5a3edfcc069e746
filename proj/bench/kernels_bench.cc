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

// Serial reference vs OpenMP kernels on synthetic data. The second benchmark
// argument selects the execution mode: 0 serial, 1 parallel.

#include <map>

#include <benchmark/benchmark.h>

#include "recbench/dataset.h"
#include "recbench/kernels.h"
#include "recbench/linear_models.h"
#include "recbench/metrics.h"
#include "recbench/synthetic.h"

namespace recbench {
namespace {

const EvaluationPack& Pack(std::size_t users) {
  static std::map<std::size_t, EvaluationPack> cache;
  auto it = cache.find(users);
  if (it == cache.end()) {
    SyntheticOptions o;
    o.users = users;
    o.items = users / 2;
    o.min_items = 5;
    o.max_items = 40;
    o.clusters = 4;
    o.negatives = 99;
    o.seed = 1;
    it = cache.emplace(users, MakeSyntheticPack(o)).first;
  }
  return it->second;
}

Execution Mode(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::kSerial : Execution::kParallel;
}

void BM_Cooccurrence(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::Cooccurrence(pack.train, Mode(state)));
}

void BM_SparseTimesDense(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  const RowMatrix m = RowMatrix::Random(static_cast<Eigen::Index>(pack.train.cols()), 64);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::SparseTimesDense(pack.train, m, Mode(state)));
}

void BM_Ease(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(FitEase(pack.train, {.l2 = 100.0, .exec = Mode(state)}));
}

void BM_Rp3Beta(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  Rp3BetaOptions o;
  o.alpha = 0.5;
  o.beta = 0.25;
  o.top_k = 50;
  o.exec = Mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(FitRp3Beta(pack.train, o));
}

void BM_Slim(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  SlimOptions o;
  o.l1 = 0.1;
  o.l2 = 1.0;
  o.top_k = 50;
  o.max_iters = 20;
  o.exec = Mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(FitSlim(pack.train, o));
}

void BM_Ials(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  IalsOptions o;
  o.factors = 32;
  o.epochs = 3;
  o.seed = 1;
  o.exec = Mode(state);
  for (auto _ : state) benchmark::DoNotOptimize(FitIals(pack.train, o));
}

void BM_Evaluate(benchmark::State& state) {
  const auto& pack = Pack(static_cast<std::size_t>(state.range(0)));
  const auto profile = BuildPopularityProfile(pack.train, 0.2);
  const auto model = FitMostPop(pack.train);
  for (auto _ : state) benchmark::DoNotOptimize(Evaluate(model, pack, profile, 10, Mode(state)));
}

void Sizes(benchmark::internal::Benchmark* b) {
  for (int users : {1000, 4000}) {
    for (int mode : {0, 1}) b->Args({users, mode});
  }
  b->ArgNames({"users", "parallel"})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_Cooccurrence)->Apply(Sizes);
BENCHMARK(BM_SparseTimesDense)->Apply(Sizes);
BENCHMARK(BM_Ease)->Apply(Sizes);
BENCHMARK(BM_Rp3Beta)->Apply(Sizes);
BENCHMARK(BM_Slim)->Apply(Sizes);
BENCHMARK(BM_Ials)->Apply(Sizes);
BENCHMARK(BM_Evaluate)->Apply(Sizes);

}  // namespace
}  // namespace recbench

BENCHMARK_MAIN();
