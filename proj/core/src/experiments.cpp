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

#include "mfhlab/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "mfhlab/csv.hpp"
#include "mfhlab/kd.hpp"
#include "mfhlab/mvd.hpp"

namespace mfhlab::experiments {

using models::Model;

const char* SweepKindName(SweepKind kind) {
  switch (kind) {
    case SweepKind::kGamma: return "gamma";
    case SweepKind::kAlpha: return "alpha";
    case SweepKind::kTable2: return "table2";
    case SweepKind::kNullifyRatio: return "nullify_ratio";
    case SweepKind::kPermutationCount: return "permutation_count";
    case SweepKind::kRankingEval: return "ranking_eval";
  }
  return "gamma";
}

SweepKind ParseSweepKind(const std::string& name) {
  for (SweepKind k : {SweepKind::kGamma, SweepKind::kAlpha, SweepKind::kTable2,
                      SweepKind::kNullifyRatio, SweepKind::kPermutationCount,
                      SweepKind::kRankingEval})
    if (name == SweepKindName(k)) return k;
  throw InvalidArgument("unknown sweep kind '" + name + "'");
}

const char* FlavorName(TeacherFlavor f) {
  switch (f) {
    case TeacherFlavor::kRegular: return "regular";
    case TeacherFlavor::kGroundTruthGeneral: return "ground-truth-general";
    case TeacherFlavor::kRankedGeneral: return "ranked-general";
    case TeacherFlavor::kRankedSpecific: return "ranked-specific";
    case TeacherFlavor::kRankedRandom: return "ranked-random";
  }
  return "regular";
}

TeacherFlavor ParseFlavor(const std::string& name) {
  for (TeacherFlavor f : {TeacherFlavor::kRegular, TeacherFlavor::kGroundTruthGeneral,
                          TeacherFlavor::kRankedGeneral, TeacherFlavor::kRankedSpecific,
                          TeacherFlavor::kRankedRandom})
    if (name == FlavorName(f)) return f;
  throw InvalidArgument("unknown teacher flavor '" + name + "'");
}

void SweepConfig::Validate() const {
  Require(n_train >= 1 && n_test >= 1, "n_train and n_test must be positive");
  Require(seeds >= 1, "seeds must be at least 1");
  Require(rho >= 0.0 && rho <= 1.0, "rho out of [0,1]");
  Require(nullify_rho >= 0.0 && nullify_rho <= 1.0, "nullify_rho out of [0,1]");
  Require(flavor_ratio >= 0.0 && flavor_ratio <= 1.0, "flavor_ratio out of [0,1]");
  Require(ablation_ratio >= 0.0 && ablation_ratio <= 1.0, "ablation_ratio out of [0,1]");
  Require(hidden >= 1, "hidden must be positive");
  Require(permutations >= 1, "permutations must be at least 1");
  Require(reruns >= 2, "reruns must be at least 2");
  Require(ranking_n >= 1, "ranking_n must be positive");
  Require(jobs >= 0, "jobs must be non-negative");
  Require(subset_d >= 1 && subset_d <= subset_d1 && subset_d <= subset_d2,
          "subset_d must fit inside subset_d1 and subset_d2");
  Require(subset_general >= 1 && subset_general <= subset_d, "subset_general out of [1, subset_d]");
  Require(!ranking_specs.empty(), "ranking_specs must not be empty");
  for (auto [d, k] : ranking_specs)
    Require(k >= 1 && k <= d && d <= subset_d1 && d <= subset_d2,
            fmt::format("ranking spec {}:{} is not valid", d, k));
  gd.Validate();
  for (double p : EffectivePoints()) {
    switch (kind) {
      case SweepKind::kNullifyRatio:
        Require(p >= 0.0 && p <= 1.0, "nullify ratio out of [0,1]");
        break;
      case SweepKind::kPermutationCount:
        Require(p >= 1.0 && p == std::floor(p), "permutation counts must be positive integers");
        break;
      case SweepKind::kTable2:
        Require(p > 0.0 && p <= 1.0, "table2 gamma out of (0,1]");
        break;
      default:
        break;
    }
  }
}

std::vector<double> SweepConfig::EffectivePoints() const {
  if (!points.empty()) return points;
  switch (kind) {
    case SweepKind::kGamma: return {0, 2, 4, 6, 8, 10};
    case SweepKind::kAlpha: return {10, 20, 30, 40, 50};
    case SweepKind::kTable2: return {0.25, 0.5, 0.75};
    case SweepKind::kNullifyRatio: return {0, 0.25, 0.5, 0.75, 0.9};
    case SweepKind::kPermutationCount: return {1, 2, 5, 10, 20};
    case SweepKind::kRankingEval: {
      std::vector<double> out;
      for (std::size_t i = 0; i < ranking_specs.size(); ++i) out.push_back(static_cast<double>(i));
      return out;
    }
  }
  return {};
}

Stat Aggregate(const std::vector<double>& values) {
  Stat s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (s.n - 1));
  }
  // Identical inputs must reproduce the single-run value exactly.
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
    s.mean = values.front();
    s.std = 0.0;
  }
  return s;
}

const Stat& ResultRow::at(const std::string& metric) const {
  auto it = metrics.find(metric);
  Require(it != metrics.end(), "no metric '" + metric + "' in result row");
  return it->second;
}

const ResultRow& SweepResult::row(double point, double tol) const {
  for (const auto& r : rows)
    if (std::abs(r.point - point) <= tol) return r;
  throw InvalidArgument(fmt::format("no result row at point {}", point));
}

void ParallelFor(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (int i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

struct Sample {
  int point;
  std::string metric;
  double value;
};

using Task = std::function<std::vector<Sample>(int)>;

// Runs `tasks` jobs and folds their samples into rows. Values are appended in
// task order, so the reduce does not depend on scheduling.
SweepResult Collect(const SweepConfig& cfg, const std::vector<double>& point_values, int tasks,
                    const Task& task) {
  std::vector<std::vector<Sample>> out(tasks);
  ParallelFor(tasks, cfg.jobs, [&](int i) { out[i] = task(i); });
  std::map<int, std::map<std::string, std::vector<double>>> acc;
  for (const auto& samples : out)
    for (const auto& s : samples) acc[s.point][s.metric].push_back(s.value);
  SweepResult result;
  result.kind = cfg.kind;
  for (auto& [p, metrics] : acc) {
    ResultRow row;
    row.point = point_values[p];
    for (auto& [name, values] : metrics) row.metrics[name] = Aggregate(values);
    result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.point < b.point; });
  return result;
}

std::uint64_t U(int v) { return static_cast<std::uint64_t>(v); }

// Data streams are keyed by (master, seed, stage) only, so every sweep point
// of a seed reuses the same draws and points differ only through the spec.
Rng DataRng(const SweepConfig& cfg, int seed, Stage stage) {
  return MakeRng(cfg.master_seed, {U(seed), Key(stage)});
}

std::uint64_t PointSeed(const SweepConfig& cfg, int seed, Stage stage, int point) {
  return DeriveSeed(cfg.master_seed, {U(seed), Key(stage), U(point)});
}

Model MakeModel(const SweepConfig& cfg, int d, int seed, Stage stage, int point) {
  switch (cfg.model) {
    case models::ModelKind::kLogisticBinary: return Model::LogisticBinary(d);
    case models::ModelKind::kSoftmaxLinear: return Model::SoftmaxLinear(d, 2);
    case models::ModelKind::kMlp1: {
      Rng rng(PointSeed(cfg, seed, stage, point));
      return Model::Mlp1(d, cfg.hidden, 2, rng);
    }
  }
  return Model::LogisticBinary(d);
}

struct Split {
  mvd::MultimodalDataset train;
  mvd::MultimodalDataset test;
};

Split Draw(const SweepConfig& cfg, const mvd::MvdSpec& spec, int seed, int n_train, int n_test) {
  Rng tr = DataRng(cfg, seed, Stage::kTrainData);
  Rng te = DataRng(cfg, seed, Stage::kTestData);
  Split s;
  s.train = mvd::Sample(spec, n_train, tr);
  s.test = mvd::Sample(spec, n_test, te);
  return s;
}

kd::KdConfig KdFor(const SweepConfig& cfg, double rho) {
  kd::KdConfig k;
  k.rho = rho;
  k.teacher_input = kd::Input::kA;
  k.student_input = kd::Input::kB;
  k.gd = cfg.gd;
  return k;
}

ranking::JointOptions JointFor(const SweepConfig& cfg, int seed, int point) {
  ranking::JointOptions j;
  j.kind = cfg.model;
  j.hidden = cfg.hidden;
  j.seed = PointSeed(cfg, seed, Stage::kJointInit, point);
  j.dist = cfg.dist;
  j.gd = cfg.gd;
  return j;
}

ranking::SaliencyVector RankA(const SweepConfig& cfg, const mvd::MultimodalDataset& train, int seed,
                              int point, int m) {
  const auto [f1, f2] = ranking::JointTrain(train, JointFor(cfg, seed, point));
  return ranking::RankFeatures(f1, f2, train, Modality::kA, m,
                               PointSeed(cfg, seed, Stage::kRanking, point), cfg.dist);
}

ranking::NullifyMode ModeOf(TeacherFlavor f) {
  switch (f) {
    case TeacherFlavor::kRankedSpecific: return ranking::NullifyMode::kSpecific;
    case TeacherFlavor::kRankedRandom: return ranking::NullifyMode::kRandom;
    default: return ranking::NullifyMode::kGeneral;
  }
}

// Regular, MFH-style and ranked teachers share one pipeline: train on
// modality a, then distill into modality b and evaluate everything on test.
std::vector<Sample> TeacherStudentRun(const SweepConfig& cfg, const mvd::MvdSpec& spec, int p,
                                      int seed) {
  const Split s = Draw(cfg, spec, seed, cfg.n_train, cfg.n_test);
  const int d1 = spec.d1(), d2 = spec.d2();
  const Model teacher =
      models::TrainCe(MakeModel(cfg, d1, seed, Stage::kTeacherInit, p), s.train.xa, s.train.y, cfg.gd);
  const Model nokd =
      models::TrainCe(MakeModel(cfg, d2, seed, Stage::kStudentInit, p), s.train.xb, s.train.y, cfg.gd);
  kd::TeacherFn view = kd::Frozen(teacher);
  double view_acc = kd::Evaluate(teacher, s.test.xa, s.test.y);
  if (cfg.teacher_flavor == TeacherFlavor::kGroundTruthGeneral) {
    const auto plan = ranking::GroundTruthGeneralPlan(s.train.roles_a, s.train.xa);
    const Model mg = ranking::RetrainedTeacher(MakeModel(cfg, d1, seed, Stage::kTeacherInit, p),
                                               plan, s.train.xa, s.train.y, cfg.gd);
    view = ranking::MaskedTeacher(mg, plan);
    view_acc = kd::Accuracy(view(s.test.xa), s.test.y);
  } else if (cfg.teacher_flavor != TeacherFlavor::kRegular) {
    const auto sal = RankA(cfg, s.train, seed, p, cfg.permutations);
    Rng rng(PointSeed(cfg, seed, Stage::kRandomNullify, p));
    const auto plan =
        ranking::MakeNullifyPlan(sal, ModeOf(cfg.teacher_flavor), cfg.flavor_ratio, s.train.xa, rng);
    view = ranking::MaskedTeacher(teacher, plan);
    view_acc = kd::Accuracy(view(s.test.xa), s.test.y);
  }
  const Model student = kd::Distill(view, s.train, KdFor(cfg, cfg.rho),
                                    MakeModel(cfg, d2, seed, Stage::kStudentInit, p));
  const double t = kd::Evaluate(teacher, s.test.xa, s.test.y);
  const double b = kd::Evaluate(nokd, s.test.xb, s.test.y);
  const double k = kd::Evaluate(student, s.test.xb, s.test.y);
  std::vector<Sample> out = {{p, "teacher_acc", t},
                             {p, "student_nokd_acc", b},
                             {p, "student_kd_acc", k},
                             {p, "kd_gain", k - b}};
  if (cfg.teacher_flavor != TeacherFlavor::kRegular) out.push_back({p, "kd_teacher_acc", view_acc});
  return out;
}

SweepResult PointSeedSweep(const SweepConfig& cfg, const std::vector<double>& point_values,
                           const std::function<mvd::MvdSpec(int, Rng&)>& build) {
  const int points = static_cast<int>(point_values.size());
  return Collect(cfg, point_values, points * cfg.seeds, [&](int i) {
    const int p = i / cfg.seeds;
    const int seed = i % cfg.seeds;
    Rng delta = DataRng(cfg, seed, Stage::kDelta);
    return TeacherStudentRun(cfg, build(p, delta), p, seed);
  });
}

int AsInt(double v, const char* what) {
  Require(v == std::floor(v), fmt::format("{} must be an integer (got {})", what, v));
  return static_cast<int>(v);
}

mvd::MvdSpec SubsetSpec(const SweepConfig& cfg, int general, Rng& delta) {
  return mvd::BuildSubsetPoint(cfg.subset_d1, cfg.subset_d2, cfg.subset_d, general, delta);
}

std::string SubsetRecipe(const SweepConfig& cfg, const std::string& general) {
  return fmt::format("d1={} d2={} d={} J1={{0..{}}} J2={{0..{}-1}}", cfg.subset_d1, cfg.subset_d2,
                     cfg.subset_d, cfg.subset_d - 1, general);
}

}  // namespace

SweepResult RunGammaSweep(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kGamma;
  cfg.Validate();
  const auto pts = cfg.EffectivePoints();
  std::vector<int> overlap;
  std::vector<double> gammas;
  for (double v : pts) {
    overlap.push_back(AsInt(v, "overlap"));
    Rng probe(0);
    gammas.push_back(mvd::GammaOf(mvd::BuildGammaPoint(overlap.back(), probe)).value());
  }
  SweepResult r = PointSeedSweep(cfg, gammas, [&](int p, Rng& rng) {
    return mvd::BuildGammaPoint(overlap[p], rng);
  });
  r.recipe = "d1=25 d2=50 d=20 J1={0..9} J2={10-overlap..19-overlap}";
  return r;
}

SweepResult RunAlphaSweep(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kAlpha;
  cfg.Validate();
  std::vector<int> dt;
  std::vector<double> alphas;
  for (double v : cfg.EffectivePoints()) {
    dt.push_back(AsInt(v, "d_total"));
    Rng probe(0);
    alphas.push_back(mvd::AlphaOf(mvd::BuildAlphaPoint(dt.back(), probe)).value());
  }
  SweepResult r = PointSeedSweep(cfg, alphas, [&](int p, Rng& rng) {
    return mvd::BuildAlphaPoint(dt[p], rng);
  });
  r.recipe = "d1=50 d2=50 d=d_total J1={0..d_total-1} J2={0..9}";
  return r;
}

SweepResult RunTable2(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kTable2;
  cfg.Validate();
  const auto pts = cfg.EffectivePoints();
  std::vector<int> general;
  for (double g : pts) {
    const int k = static_cast<int>(std::lround(g * cfg.subset_d));
    Require(std::abs(static_cast<double>(k) / cfg.subset_d - g) < 1e-9,
            fmt::format("gamma {} is not reachable with d={}", g, cfg.subset_d));
    general.push_back(k);
  }
  const int points = static_cast<int>(pts.size());
  SweepResult r = Collect(cfg, pts, points * cfg.seeds, [&](int i) {
    const int p = i / cfg.seeds;
    const int seed = i % cfg.seeds;
    Rng delta = DataRng(cfg, seed, Stage::kDelta);
    const mvd::MvdSpec spec = SubsetSpec(cfg, general[p], delta);
    const Split s = Draw(cfg, spec, seed, cfg.n_train, cfg.n_test);
    const int d1 = spec.d1(), d2 = spec.d2();
    auto teacher_init = [&] { return MakeModel(cfg, d1, seed, Stage::kTeacherInit, p); };
    auto student_init = [&] { return MakeModel(cfg, d2, seed, Stage::kStudentInit, p); };
    const Model teacher = models::TrainCe(teacher_init(), s.train.xa, s.train.y, cfg.gd);
    const auto plan = ranking::GroundTruthGeneralPlan(s.train.roles_a, s.train.xa);
    const Model mg = ranking::RetrainedTeacher(teacher_init(), plan, s.train.xa, s.train.y, cfg.gd);
    const kd::TeacherFn mg_view = ranking::MaskedTeacher(mg, plan);
    const Model nokd = models::TrainCe(student_init(), s.train.xb, s.train.y, cfg.gd);
    const kd::KdConfig kc = KdFor(cfg, cfg.rho);
    const Model kd_student = kd::Distill(teacher, s.train, kc, student_init());
    const Model mg_student = kd::Distill(mg_view, s.train, kc, student_init());
    return std::vector<Sample>{
        {p, "teacher_acc", kd::Evaluate(teacher, s.test.xa, s.test.y)},
        {p, "mg_teacher_acc", kd::Accuracy(mg_view(s.test.xa), s.test.y)},
        {p, "student_nokd_acc", kd::Evaluate(nokd, s.test.xb, s.test.y)},
        {p, "student_kd_acc", kd::Evaluate(kd_student, s.test.xb, s.test.y)},
        {p, "student_mgkd_acc", kd::Evaluate(mg_student, s.test.xb, s.test.y)},
    };
  });
  r.recipe = SubsetRecipe(cfg, "round(gamma*d)");
  return r;
}

SweepResult RunNullifySweep(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kNullifyRatio;
  cfg.Validate();
  const auto ratios = cfg.EffectivePoints();
  SweepResult r = Collect(cfg, ratios, cfg.seeds, [&](int seed) {
    Rng delta = DataRng(cfg, seed, Stage::kDelta);
    const mvd::MvdSpec spec = SubsetSpec(cfg, cfg.subset_general, delta);
    const Split s = Draw(cfg, spec, seed, cfg.n_train, cfg.n_test);
    const int d1 = spec.d1(), d2 = spec.d2();
    const Model teacher = models::TrainCe(MakeModel(cfg, d1, seed, Stage::kTeacherInit, 0),
                                          s.train.xa, s.train.y, cfg.gd);
    auto student_init = [&] { return MakeModel(cfg, d2, seed, Stage::kStudentInit, 0); };
    const Model nokd = models::TrainCe(student_init(), s.train.xb, s.train.y, cfg.gd);
    const kd::KdConfig kc = KdFor(cfg, cfg.nullify_rho);
    const double regular =
        kd::Evaluate(kd::Distill(teacher, s.train, kc, student_init()), s.test.xb, s.test.y);
    const double base = kd::Evaluate(nokd, s.test.xb, s.test.y);
    const auto sal = RankA(cfg, s.train, seed, 0, cfg.permutations);
    std::vector<Sample> out;
    for (int p = 0; p < static_cast<int>(ratios.size()); ++p) {
      out.push_back({p, "student_nokd_acc", base});
      out.push_back({p, "student_kd_acc", regular});
      for (auto mode : {ranking::NullifyMode::kGeneral, ranking::NullifyMode::kSpecific,
                        ranking::NullifyMode::kRandom}) {
        Rng rng(PointSeed(cfg, seed, Stage::kRandomNullify, p));
        const auto plan = ranking::MakeNullifyPlan(sal, mode, ratios[p], s.train.xa, rng);
        const kd::TeacherFn view = ranking::MaskedTeacher(teacher, plan);
        const Model student = kd::Distill(view, s.train, kc, student_init());
        const std::string name = ranking::NullifyModeName(mode);
        out.push_back({p, "teacher_" + name + "_acc", kd::Accuracy(view(s.test.xa), s.test.y)});
        out.push_back({p, "student_" + name + "_acc", kd::Evaluate(student, s.test.xb, s.test.y)});
      }
    }
    return out;
  });
  r.recipe = SubsetRecipe(cfg, std::to_string(cfg.subset_general));
  return r;
}

SweepResult RunRankingEval(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kRankingEval;
  cfg.points.clear();
  cfg.Validate();
  std::vector<double> gammas;
  for (auto [d, k] : cfg.ranking_specs) gammas.push_back(static_cast<double>(k) / d);
  const int points = static_cast<int>(gammas.size());
  SweepResult r = Collect(cfg, gammas, points * cfg.seeds, [&](int i) {
    const int p = i / cfg.seeds;
    const int seed = i % cfg.seeds;
    const auto [d, k] = cfg.ranking_specs[p];
    Rng delta = DataRng(cfg, seed, Stage::kDelta);
    const mvd::MvdSpec spec = mvd::BuildSubsetPoint(cfg.subset_d1, cfg.subset_d2, d, k, delta);
    Rng tr = DataRng(cfg, seed, Stage::kTrainData);
    const mvd::MultimodalDataset data = mvd::Sample(spec, cfg.ranking_n, tr);
    const auto sal = RankA(cfg, data, seed, p, cfg.permutations);
    return std::vector<Sample>{{p, "fs_accuracy", ranking::FsAccuracy(sal, data.roles_a)}};
  });
  std::string specs;
  for (auto [d, k] : cfg.ranking_specs) specs += fmt::format(" {}:{}", d, k);
  r.recipe = fmt::format("d1={} d2={} J1={{0..d-1}} J2={{0..k-1}} d:k in{}", cfg.subset_d1,
                         cfg.subset_d2, specs);
  return r;
}

SweepResult RunPermutationAblation(const SweepConfig& cfg_in) {
  SweepConfig cfg = cfg_in;
  cfg.kind = SweepKind::kPermutationCount;
  cfg.Validate();
  const auto pts = cfg.EffectivePoints();
  std::vector<int> ms;
  for (double v : pts) ms.push_back(AsInt(v, "M"));
  SweepResult r = Collect(cfg, pts, cfg.seeds, [&](int seed) {
    Rng delta = DataRng(cfg, seed, Stage::kDelta);
    const mvd::MvdSpec spec = SubsetSpec(cfg, cfg.subset_general, delta);
    const Split s = Draw(cfg, spec, seed, cfg.n_train, cfg.n_test);
    const int d1 = spec.d1(), d2 = spec.d2();
    const Model teacher = models::TrainCe(MakeModel(cfg, d1, seed, Stage::kTeacherInit, 0),
                                          s.train.xa, s.train.y, cfg.gd);
    const auto [f1, f2] = ranking::JointTrain(s.train, JointFor(cfg, seed, 0));
    const kd::KdConfig kc = KdFor(cfg, cfg.nullify_rho);
    std::vector<Sample> out;
    for (int p = 0; p < static_cast<int>(ms.size()); ++p) {
      const auto sal = ranking::RankFeatures(f1, f2, s.train, Modality::kA, ms[p],
                                             PointSeed(cfg, seed, Stage::kRanking, 0), cfg.dist);
      Rng unused(0);
      const auto plan = ranking::MakeNullifyPlan(sal, ranking::NullifyMode::kGeneral,
                                                 cfg.ablation_ratio, s.train.xa, unused);
      const Model student = kd::Distill(ranking::MaskedTeacher(teacher, plan), s.train, kc,
                                        MakeModel(cfg, d2, seed, Stage::kStudentInit, 0));
      out.push_back({p, "student_mgkd_acc", kd::Evaluate(student, s.test.xb, s.test.y)});
      out.push_back({p, "fs_accuracy", ranking::FsAccuracy(sal, s.train.roles_a)});
      std::vector<Vector> reruns;
      for (int q = 0; q < cfg.reruns; ++q)
        reruns.push_back(ranking::RankFeatures(f1, f2, s.train, Modality::kA, ms[p],
                                               PointSeed(cfg, seed, Stage::kRerun, q), cfg.dist)
                             .p);
      double var = 0.0;
      for (int j = 0; j < d1; ++j) {
        std::vector<double> col;
        for (const auto& v : reruns) col.push_back(v[j]);
        const Stat st = Aggregate(col);
        var += st.std * st.std;
      }
      out.push_back({p, "salience_rerun_var", var / d1});
    }
    return out;
  });
  r.recipe = SubsetRecipe(cfg, std::to_string(cfg.subset_general)) +
             fmt::format(" general plan ratio={}", cfg.ablation_ratio);
  return r;
}

SweepResult Run(const SweepConfig& cfg) {
  switch (cfg.kind) {
    case SweepKind::kGamma: return RunGammaSweep(cfg);
    case SweepKind::kAlpha: return RunAlphaSweep(cfg);
    case SweepKind::kTable2: return RunTable2(cfg);
    case SweepKind::kNullifyRatio: return RunNullifySweep(cfg);
    case SweepKind::kPermutationCount: return RunPermutationAblation(cfg);
    case SweepKind::kRankingEval: return RunRankingEval(cfg);
  }
  return {};
}

void WriteResultCsv(std::ostream& os, const SweepResult& result) {
  os << "sweep_kind,point,metric,mean,std,n_seeds\n";
  for (const auto& row : result.rows)
    for (const auto& [name, st] : row.metrics)
      os << SweepKindName(result.kind) << ',' << csv::Num(row.point) << ',' << name << ','
         << csv::Num(st.mean) << ',' << csv::Num(st.std) << ',' << st.n << '\n';
}

std::vector<theory::TheoremCertificate> RunTheoremBatch(const TheoremBatchConfig& cfg) {
  Require(cfg.instances >= 1, "instances must be at least 1");
  Require(cfg.n_factor >= 1, "n_factor must be at least 1");
  cfg.teacher_gd.Validate();
  cfg.student_gd.Validate();
  static constexpr int kOverlaps[] = {0, 2, 4, 6, 8};
  std::vector<theory::TheoremCertificate> out(cfg.instances);
  ParallelFor(cfg.instances, cfg.jobs, [&](int i) {
    Rng delta = MakeRng(cfg.master_seed, {U(i), Key(Stage::kDelta)});
    const mvd::MvdSpec spec = mvd::BuildGammaPoint(kOverlaps[i % 5], delta);
    Rng data_rng = MakeRng(cfg.master_seed, {U(i), Key(Stage::kTheoryData)});
    const int n = cfg.n_factor * std::max(spec.d1(), spec.d2());
    const mvd::MultimodalDataset data = mvd::Sample(spec, n, data_rng);
    const Model teacher =
        models::TrainCe(Model::LogisticBinary(spec.d1(), false), data.xa, data.y, cfg.teacher_gd);
    Vector theta = teacher.theta();
    if (theta.norm() == 0.0) theta = Vector::Ones(spec.d1());
    out[i] = theory::VerifyBound(data, mvd::GammaOf(spec).value(), theta, cfg.student_gd);
    out[i].seed = U(i);
  });
  return out;
}

}  // namespace mfhlab::experiments
