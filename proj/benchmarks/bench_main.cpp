// Copyright 2026 The mfhlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "mfhlab/experiments.hpp"
#include "mfhlab/ranking.hpp"
#include "mfhlab/theory.hpp"

namespace {

using namespace mfhlab;

mvd::MultimodalDataset GammaData(int overlap, int n) {
  Rng rng(7);
  const auto spec = mvd::BuildGammaPoint(overlap, rng);
  return mvd::Sample(spec, n, rng);
}

void BM_Sample(benchmark::State& state) {
  Rng spec_rng(1);
  const auto spec = mvd::BuildGammaPoint(4, spec_rng);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(mvd::Sample(spec, static_cast<int>(state.range(0)), rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sample)->Arg(200)->Arg(1000);

void BM_TrainCe(benchmark::State& state) {
  const auto data = GammaData(4, static_cast<int>(state.range(0)));
  models::GdOptions gd;
  gd.max_iters = 500;
  for (auto _ : state)
    benchmark::DoNotOptimize(models::TrainCe(models::Model::LogisticBinary(25), data.xa, data.y, gd));
}
BENCHMARK(BM_TrainCe)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Distill(benchmark::State& state) {
  const auto data = GammaData(10, 200);
  kd::KdConfig cfg;
  cfg.gd.max_iters = 500;
  const auto teacher = models::TrainCe(models::Model::LogisticBinary(25), data.xa, data.y, cfg.gd);
  for (auto _ : state)
    benchmark::DoNotOptimize(kd::Distill(teacher, data, cfg, models::Model::LogisticBinary(50)));
}
BENCHMARK(BM_Distill)->Unit(benchmark::kMillisecond);

void BM_RankFeatures(benchmark::State& state) {
  const auto data = GammaData(4, 1000);
  ranking::JointOptions opts;
  opts.gd.max_iters = 500;
  const auto [f1, f2] = ranking::JointTrain(data, opts);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ranking::RankFeatures(f1, f2, data, Modality::kA, static_cast<int>(state.range(0)), 3));
}
BENCHMARK(BM_RankFeatures)->Arg(1)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_VerifyBound(benchmark::State& state) {
  experiments::TheoremBatchConfig cfg;
  cfg.instances = 1;
  cfg.jobs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(experiments::RunTheoremBatch(cfg));
}
BENCHMARK(BM_VerifyBound)->Unit(benchmark::kMillisecond);

void BM_LemmaLMax(benchmark::State& state) {
  double eps = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theory::LemmaLMax(eps));
    eps = eps < 5 ? eps * 1.01 : 0.5;
  }
}
BENCHMARK(BM_LemmaLMax);

}  // namespace

BENCHMARK_MAIN();
