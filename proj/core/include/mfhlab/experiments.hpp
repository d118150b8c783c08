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

#pragma once

// Seeded multi-run drivers over the synthetic data family with mean / sample
// std aggregation. Every run is a pure function of its config.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mfhlab/models.hpp"
#include "mfhlab/ranking.hpp"
#include "mfhlab/theory.hpp"

namespace mfhlab::experiments {

enum class SweepKind { kGamma, kAlpha, kTable2, kNullifyRatio, kPermutationCount, kRankingEval };

const char* SweepKindName(SweepKind kind);
SweepKind ParseSweepKind(const std::string& name);

enum class TeacherFlavor { kRegular, kGroundTruthGeneral, kRankedGeneral, kRankedSpecific, kRankedRandom };

const char* FlavorName(TeacherFlavor f);
TeacherFlavor ParseFlavor(const std::string& name);

struct SweepConfig {
  SweepKind kind = SweepKind::kGamma;
  // Empty means the kind's default grid. Units: overlap count (gamma),
  // d_total (alpha), gamma (table2), ratio (nullify), M (permutation).
  std::vector<double> points;
  int n_train = 200;
  int n_test = 1000;
  double rho = 0.5;
  std::uint64_t master_seed = 7;
  int seeds = 10;
  models::ModelKind model = models::ModelKind::kLogisticBinary;
  int hidden = 16;
  models::GdOptions gd;
  // Teacher used for student_kd in the gamma and alpha sweeps.
  TeacherFlavor teacher_flavor = TeacherFlavor::kRegular;
  double flavor_ratio = 0.5;

  // The table2, nullify, ablation and ranking runs use the nested recipe
  // J1 = {0..d-1}, J2 = {0..general-1} on d1 x d2 ambient spaces.
  int subset_d1 = 50;
  int subset_d2 = 50;
  int subset_d = 40;
  int subset_general = 20;

  int permutations = 5;
  ranking::DistSpace dist = ranking::DistSpace::kScores;
  double nullify_rho = 0.0;
  double ablation_ratio = 0.75;
  int reruns = 5;
  int ranking_n = 1000;
  std::vector<std::pair<int, int>> ranking_specs = {{30, 10}, {20, 10}, {30, 20}, {40, 30}};

  int jobs = 0;  // 0: hardware concurrency

  void Validate() const;
  std::vector<double> EffectivePoints() const;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single seed
  int n = 0;
};

Stat Aggregate(const std::vector<double>& values);

struct ResultRow {
  double point = 0.0;
  std::map<std::string, Stat> metrics;

  const Stat& at(const std::string& metric) const;
};

struct SweepResult {
  SweepKind kind = SweepKind::kGamma;
  std::vector<ResultRow> rows;  // ascending point
  std::string recipe;           // human-readable description of the specs used

  const ResultRow& row(double point, double tol = 1e-9) const;
};

SweepResult RunGammaSweep(const SweepConfig& cfg);
SweepResult RunAlphaSweep(const SweepConfig& cfg);
SweepResult RunTable2(const SweepConfig& cfg);
SweepResult RunNullifySweep(const SweepConfig& cfg);
SweepResult RunRankingEval(const SweepConfig& cfg);
SweepResult RunPermutationAblation(const SweepConfig& cfg);
SweepResult Run(const SweepConfig& cfg);

// sweep_kind,point,metric,mean,std,n_seeds sorted by point then metric.
void WriteResultCsv(std::ostream& os, const SweepResult& result);

struct TheoremBatchConfig {
  int instances = 100;
  std::uint64_t master_seed = 7;
  // Samples per instance as a multiple of max(d1, d2).
  int n_factor = 2;
  models::GdOptions teacher_gd;
  models::GdOptions student_gd = theory::TheoryGdDefaults();
  int jobs = 0;

  friend bool operator==(const TheoremBatchConfig&, const TheoremBatchConfig&) = default;
};

// Instance i uses the gamma-sweep spec with overlap {0,2,4,6,8}[i % 5], a
// bias-free logistic teacher on modality a, and reports seed = i.
std::vector<theory::TheoremCertificate> RunTheoremBatch(const TheoremBatchConfig& cfg);

// Runs fn(0..count-1) on up to `jobs` threads. The exception of the lowest
// failing index is rethrown.
void ParallelFor(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace mfhlab::experiments
