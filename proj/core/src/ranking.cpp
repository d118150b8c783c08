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

#include "mfhlab/ranking.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mfhlab/csv.hpp"

namespace mfhlab::ranking {

using models::Model;

const char* DistSpaceName(DistSpace s) {
  return s == DistSpace::kScores ? "scores" : "probabilities";
}

DistSpace ParseDistSpace(const std::string& name) {
  if (name == "scores") return DistSpace::kScores;
  if (name == "probabilities") return DistSpace::kProbabilities;
  throw InvalidArgument("unknown dist space '" + name + "' (scores|probabilities)");
}

Matrix Outputs(const Model& model, const Matrix& x, DistSpace space) {
  return space == DistSpace::kScores ? models::Scores(model, x) : models::PredictProba(model, x);
}

double Dist(const Matrix& out1, const Matrix& out2) {
  Require(out1.rows() == out2.rows() && out1.cols() == out2.cols(), "Dist shape mismatch");
  Require(out1.size() > 0, "Dist of empty outputs");
  return (out1 - out2).squaredNorm() / static_cast<double>(out1.size());
}

double JointLoss(const Model& f1, const Model& f2, const Matrix& xa, const Matrix& xb,
                 const Labels& y, DistSpace space, double clamp, Vector* grad) {
  Require(f1.classes() == f2.classes() && f1.score_dim() == f2.score_dim(),
          "joint models must share the output layout");
  Require(xa.rows() == xb.rows(), "modalities have different sample counts");
  const Matrix targets = models::OneHot(y, f1.classes());
  const Matrix q1 = models::PredictProba(f1, xa);
  const Matrix q2 = models::PredictProba(f2, xb);
  double loss = models::SoftCrossEntropy(q1, targets, clamp) +
                models::SoftCrossEntropy(q2, targets, clamp);
  Matrix g1, g2;
  if (space == DistSpace::kScores) {
    const Matrix diff = models::Scores(f1, xa) - models::Scores(f2, xb);
    loss += diff.squaredNorm() / static_cast<double>(diff.size());
    if (grad != nullptr) {
      const Matrix dd = (2.0 / static_cast<double>(diff.size())) * diff;
      g1 = models::SoftCrossEntropyScoreGrad(f1, q1, targets, clamp) + dd;
      g2 = models::SoftCrossEntropyScoreGrad(f2, q2, targets, clamp) - dd;
    }
  } else {
    const Matrix diff = q1 - q2;
    loss += diff.squaredNorm() / static_cast<double>(diff.size());
    if (grad != nullptr) {
      const Matrix dd = (2.0 / static_cast<double>(diff.size())) * diff;
      g1 = models::SoftCrossEntropyScoreGrad(f1, q1, targets, clamp) +
           models::ProbaGradToScores(f1, q1, dd);
      g2 = models::SoftCrossEntropyScoreGrad(f2, q2, targets, clamp) +
           models::ProbaGradToScores(f2, q2, -dd);
    }
  }
  if (grad != nullptr) {
    const Vector p1 = models::ScoreGradToParams(f1, xa, g1);
    const Vector p2 = models::ScoreGradToParams(f2, xb, g2);
    grad->resize(p1.size() + p2.size());
    *grad << p1, p2;
  }
  return loss;
}

std::pair<Model, Model> JointTrain(const mvd::MultimodalDataset& data, const JointOptions& opts,
                                   models::TrainInfo* info) {
  Require(data.n() >= 1, "empty dataset");
  const int d1 = static_cast<int>(data.xa.cols());
  const int d2 = static_cast<int>(data.xb.cols());
  auto make = [&](int d, Rng& rng) {
    switch (opts.kind) {
      case models::ModelKind::kLogisticBinary: return Model::LogisticBinary(d);
      case models::ModelKind::kSoftmaxLinear: return Model::SoftmaxLinear(d, 2);
      case models::ModelKind::kMlp1: return Model::Mlp1(d, opts.hidden, 2, rng);
    }
    return Model::LogisticBinary(d);
  };
  Rng rng = MakeRng(opts.seed, {Key(Stage::kJointInit)});
  const Model f1 = make(d1, rng);
  const Model f2 = make(d2, rng);
  const Eigen::Index n1 = f1.params().size();
  const Eigen::Index n2 = f2.params().size();
  models::Objective objective = [&](const Vector& p, Vector& grad) {
    return JointLoss(f1.WithParams(p.head(n1)), f2.WithParams(p.tail(n2)), data.xa, data.xb,
                     data.y, opts.dist, opts.gd.prob_clamp, &grad);
  };
  Vector init(n1 + n2);
  init << f1.params(), f2.params();
  const Vector p = models::GradientDescent(objective, init, opts.gd, "joint_train", info);
  return {f1.WithParams(p.head(n1)), f2.WithParams(p.tail(n2))};
}

SaliencyVector RankFeatures(const Model& f1, const Model& f2, const mvd::MultimodalDataset& data,
                            Modality target, int m, std::uint64_t seed, DistSpace space) {
  Require(m >= 1, "permutation count M must be at least 1");
  const bool on_a = target == Modality::kA;
  const Model& moving = on_a ? f1 : f2;
  const Model& fixed_model = on_a ? f2 : f1;
  Matrix x = on_a ? data.xa : data.xb;
  Require(x.cols() == moving.input_dim(), "ranked modality does not match its network");
  const Matrix fixed = Outputs(fixed_model, on_a ? data.xb : data.xa, space);
  const Eigen::Index n = x.rows();
  const int d = static_cast<int>(x.cols());
  SaliencyVector out;
  out.p = Vector::Zero(d);
  out.permutations_used = m;
  std::vector<Eigen::Index> perm(n);
  for (int i = 0; i < d; ++i) {
    const Vector original = x.col(i);
    double total = 0.0;
    for (int r = 0; r < m; ++r) {
      Rng rng = MakeRng(seed, {Key(Stage::kRanking), on_a ? 0u : 1u, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(r)});
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index k = 0; k < n; ++k) x(k, i) = original[perm[k]];
      total += Dist(Outputs(moving, x, space), fixed);
    }
    x.col(i) = original;
    out.p[i] = total / m;
  }
  if (!out.p.allFinite()) throw NumericalError("rank_features", "non-finite salience");
  const double mx = d > 0 ? out.p.maxCoeff() : 0.0;
  if (mx > 0.0) {
    out.p /= mx;
  } else {
    out.p.setZero();
    out.all_zero = true;
  }
  return out;
}

const char* NullifyModeName(NullifyMode mode) {
  switch (mode) {
    case NullifyMode::kGeneral: return "general";
    case NullifyMode::kSpecific: return "specific";
    case NullifyMode::kRandom: return "random";
  }
  return "general";
}

bool NullifyPlan::IsNullified(int channel) const {
  return std::binary_search(nullified.begin(), nullified.end(), channel);
}

namespace {

Vector ColumnMeans(const Matrix& x) {
  Require(x.rows() > 0, "cannot take means of an empty matrix");
  return x.colwise().mean().transpose();
}

}  // namespace

NullifyPlan MakeNullifyPlan(const SaliencyVector& saliency, NullifyMode mode, double ratio,
                            const Matrix& x_train, Rng& rng) {
  Require(ratio >= 0.0 && ratio <= 1.0, "nullify ratio out of [0,1]");
  const int d = static_cast<int>(saliency.p.size());
  Require(x_train.cols() == d, "training matrix does not match the saliency length");
  NullifyPlan plan;
  plan.mode = mode;
  plan.ratio = ratio;
  plan.replacement = ColumnMeans(x_train);
  const int count = static_cast<int>(std::lround(ratio * d));
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  const Vector& p = saliency.p;
  switch (mode) {
    case NullifyMode::kGeneral:
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] < p[b]; });
      break;
    case NullifyMode::kSpecific:
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
      break;
    case NullifyMode::kRandom:
      std::shuffle(order.begin(), order.end(), rng);
      break;
  }
  plan.nullified.assign(order.begin(), order.begin() + count);
  std::sort(plan.nullified.begin(), plan.nullified.end());
  return plan;
}

NullifyPlan GroundTruthGeneralPlan(const std::vector<mvd::ChannelRole>& roles,
                                   const Matrix& x_train) {
  Require(x_train.cols() == static_cast<Eigen::Index>(roles.size()),
          "training matrix does not match the role vector");
  NullifyPlan plan;
  plan.mode = NullifyMode::kGeneral;
  plan.replacement = ColumnMeans(x_train);
  for (int j = 0; j < static_cast<int>(roles.size()); ++j)
    if (roles[j] != mvd::ChannelRole::kGeneralDecisive) plan.nullified.push_back(j);
  plan.ratio = roles.empty() ? 0.0 : static_cast<double>(plan.nullified.size()) / roles.size();
  return plan;
}

Matrix ApplyNullify(const NullifyPlan& plan, const Matrix& x) {
  Require(x.cols() == plan.channels(),
          fmt::format("nullify plan covers {} channels, matrix has {}", plan.channels(), x.cols()));
  Matrix out = x;
  for (int j : plan.nullified) out.col(j).setConstant(plan.replacement[j]);
  return out;
}

kd::TeacherFn MaskedTeacher(const Model& teacher, const NullifyPlan& plan) {
  Require(teacher.input_dim() == plan.channels(), "plan and teacher dimensions differ");
  return [teacher, plan](const Matrix& x) {
    return models::PredictProba(teacher, ApplyNullify(plan, x));
  };
}

Model RetrainedTeacher(const Model& init, const NullifyPlan& plan, const Matrix& x_train,
                       const Labels& y, const models::GdOptions& gd) {
  return models::TrainCe(init, ApplyNullify(plan, x_train), y, gd);
}

double FsAccuracy(const SaliencyVector& saliency, const std::vector<mvd::ChannelRole>& roles) {
  const int d = static_cast<int>(saliency.p.size());
  Require(d == static_cast<int>(roles.size()), "saliency and role vectors differ in length");
  Require(d > 0, "no channels to score");
  const int k = static_cast<int>(
      std::count(roles.begin(), roles.end(), mvd::ChannelRole::kGeneralDecisive));
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  const Vector& p = saliency.p;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] > p[b]; });
  std::vector<bool> predicted(d, false);
  for (int i = 0; i < k; ++i) predicted[order[i]] = true;
  int hits = 0;
  for (int j = 0; j < d; ++j)
    hits += predicted[j] == (roles[j] == mvd::ChannelRole::kGeneralDecisive) ? 1 : 0;
  return static_cast<double>(hits) / d;
}

void WriteSaliencyCsv(std::ostream& os, const SaliencyVector& s) {
  os << "channel,salience\n";
  for (Eigen::Index j = 0; j < s.p.size(); ++j) os << j << ',' << csv::Num(s.p[j]) << '\n';
}

void WritePlanCsv(std::ostream& os, const NullifyPlan& plan) {
  os << "channel,nullified,replacement_value\n";
  for (int j = 0; j < plan.channels(); ++j)
    os << j << ',' << (plan.IsNullified(j) ? 1 : 0) << ',' << csv::Num(plan.replacement[j]) << '\n';
}

}  // namespace mfhlab::ranking
