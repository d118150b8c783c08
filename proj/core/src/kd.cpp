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

#include "mfhlab/kd.hpp"

#include <fmt/format.h>

namespace mfhlab::kd {

using models::Model;

const char* InputName(Input input) {
  switch (input) {
    case Input::kA: return "a";
    case Input::kB: return "b";
    case Input::kConcat: return "ab";
  }
  return "a";
}

Input ParseInput(const std::string& name) {
  if (name == "a") return Input::kA;
  if (name == "b") return Input::kB;
  if (name == "ab") return Input::kConcat;
  throw InvalidArgument("unknown modality input '" + name + "' (a|b|ab)");
}

Matrix Slice(const mvd::MultimodalDataset& data, Input input) {
  switch (input) {
    case Input::kA: return data.xa;
    case Input::kB: return data.xb;
    case Input::kConcat: {
      Matrix out(data.xa.rows(), data.xa.cols() + data.xb.cols());
      out << data.xa, data.xb;
      return out;
    }
  }
  return data.xa;
}

void KdConfig::Validate() const {
  Require(rho >= 0.0 && rho <= 1.0, "rho out of [0,1]");
  Require(student_input != Input::kConcat, "student input must be a single modality");
  gd.Validate();
}

TeacherFn Frozen(const Model& teacher) {
  return [teacher](const Matrix& x) { return models::PredictProba(teacher, x); };
}

double KdLoss(const Matrix& student, const Matrix& teacher, const Labels& y, double rho,
              double clamp) {
  Require(rho >= 0.0 && rho <= 1.0, "rho out of [0,1]");
  Require(student.rows() == teacher.rows() && student.cols() == teacher.cols(),
          "student/teacher probability shape mismatch");
  Require(static_cast<Eigen::Index>(y.size()) == student.rows(), "label count does not match rows");
  const double ce = rho > 0.0
      ? models::SoftCrossEntropy(student, models::OneHot(y, static_cast<int>(student.cols())), clamp)
      : 0.0;
  const double kl = rho < 1.0 ? models::MeanKl(teacher, student, clamp) : 0.0;
  return rho * ce + (1.0 - rho) * kl;
}

namespace {

// KL(t || q) = sum t ln t - sum t ln q, so both terms share the soft-target
// cross-entropy gradient with target rho * onehot + (1 - rho) * teacher.
Matrix MixedTargets(const Matrix& teacher, const Labels& y, double rho) {
  const Matrix onehot = models::OneHot(y, static_cast<int>(teacher.cols()));
  if (rho == 1.0) return onehot;
  return rho * onehot + (1.0 - rho) * teacher;
}

}  // namespace

Vector GradKd(const Model& student, const Matrix& x, const Matrix& teacher, const Labels& y,
              double rho, double clamp) {
  Require(teacher.rows() == x.rows() && teacher.cols() == student.classes(),
          "teacher probabilities have the wrong shape");
  const Matrix q = models::PredictProba(student, x);
  return models::ScoreGradToParams(
      student, x, models::SoftCrossEntropyScoreGrad(student, q, MixedTargets(teacher, y, rho), clamp));
}

Model DistillFromProbs(const Matrix& teacher, const Matrix& x, const Labels& y,
                       const KdConfig& cfg, const Model& init, models::TrainInfo* info) {
  cfg.Validate();
  Require(x.cols() == init.input_dim(),
          fmt::format("student expects {} channels, got {}", init.input_dim(), x.cols()));
  Require(teacher.rows() == x.rows() && teacher.cols() == init.classes(),
          "teacher probabilities have the wrong shape");
  Require(static_cast<Eigen::Index>(y.size()) == x.rows(), "label count does not match rows");
  const Matrix targets = MixedTargets(teacher, y, cfg.rho);
  const double clamp = cfg.gd.prob_clamp;
  models::Objective objective = [&](const Vector& p, Vector& grad) {
    const Model m = init.WithParams(p);
    const Matrix q = models::PredictProba(m, x);
    grad = models::ScoreGradToParams(m, x, models::SoftCrossEntropyScoreGrad(m, q, targets, clamp));
    return KdLoss(q, teacher, y, cfg.rho, clamp);
  };
  return init.WithParams(
      models::GradientDescent(objective, init.params(), cfg.gd, "distill", info));
}

Model Distill(const TeacherFn& teacher, const mvd::MultimodalDataset& data, const KdConfig& cfg,
              const Model& init, models::TrainInfo* info) {
  const Matrix probs = teacher(Slice(data, cfg.teacher_input));
  Require(probs.allFinite(), "teacher produced non-finite probabilities");
  return DistillFromProbs(probs, Slice(data, cfg.student_input), data.y, cfg, init, info);
}

Model Distill(const Model& teacher, const mvd::MultimodalDataset& data, const KdConfig& cfg,
              const Model& init, models::TrainInfo* info) {
  const Matrix tx = Slice(data, cfg.teacher_input);
  Require(tx.cols() == teacher.input_dim(),
          fmt::format("teacher expects {} channels, got {}", teacher.input_dim(), tx.cols()));
  return DistillFromProbs(models::PredictProba(teacher, tx), Slice(data, cfg.student_input),
                          data.y, cfg, init, info);
}

double Accuracy(const Matrix& probs, const Labels& y) {
  Require(static_cast<Eigen::Index>(y.size()) == probs.rows(), "label count does not match rows");
  Require(probs.rows() > 0, "empty batch");
  int hits = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j)
      if (probs(i, j) > probs(i, best)) best = j;
    hits += best == y[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(probs.rows());
}

double Evaluate(const Model& model, const Matrix& x, const Labels& y) {
  return Accuracy(models::PredictProba(model, x), y);
}

}  // namespace mfhlab::kd
