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

// Small differentiable classifiers and the losses every other module trains
// against. All parameters of a model live in one flat vector so that the
// optimizer and the finite-difference checks treat every variant alike.

#include <functional>
#include <iosfwd>
#include <string>

#include "mfhlab/common.hpp"
#include "mfhlab/rng.hpp"

namespace mfhlab::models {

enum class ModelKind { kLogisticBinary, kSoftmaxLinear, kMlp1 };

const char* KindName(ModelKind kind);
ModelKind ParseKind(const std::string& name);

struct GdOptions {
  double learning_rate = 0.1;
  int max_iters = 5000;
  double grad_tol = 1e-6;     // stop once the gradient inf-norm is below this
  double prob_clamp = 1e-12;  // probabilities are clamped before every log

  void Validate() const;
  friend bool operator==(const GdOptions&, const GdOptions&) = default;
};

class Model {
 public:
  // theta (d) followed by an optional scalar bias.
  static Model LogisticBinary(int input_dim, bool bias = true);
  // W (classes x d, row-major) followed by an optional bias vector.
  static Model SoftmaxLinear(int input_dim, int classes, bool bias = true);
  // W1 (hidden x d), b1, W2 (classes x hidden), b2; ReLU between layers.
  // Weights ~ N(0, init_std^2), biases zero.
  static Model Mlp1(int input_dim, int hidden, int classes, Rng& rng,
                    double init_std = 0.1);

  ModelKind kind() const { return kind_; }
  int input_dim() const { return input_dim_; }
  int classes() const { return classes_; }
  int hidden() const { return hidden_; }
  bool has_bias() const { return bias_; }

  // Width of the score matrix: 1 for the binary model (its single logit),
  // `classes()` otherwise.
  int score_dim() const { return kind_ == ModelKind::kLogisticBinary ? 1 : classes_; }

  const Vector& params() const { return params_; }
  Model WithParams(Vector params) const;

  // Binary model only.
  Eigen::Map<const Vector> theta() const;
  double bias() const;

  friend bool operator==(const Model& a, const Model& b);

 private:
  friend Matrix Scores(const Model&, const Matrix&);
  friend Vector ScoreGradToParams(const Model&, const Matrix&, const Matrix&);
  friend void SaveModelCsv(std::ostream&, const Model&);
  friend Model LoadModelCsv(std::istream&);

  Model() = default;

  ModelKind kind_ = ModelKind::kLogisticBinary;
  int input_dim_ = 0;
  int classes_ = 2;
  int hidden_ = 0;
  bool bias_ = true;
  Vector params_;
};

// Raw scores, n x score_dim().
Matrix Scores(const Model& model, const Matrix& x);
// Class probabilities, n x classes(). The binary model returns
// (1 - sigma(z), sigma(z)) per row.
Matrix PredictProba(const Model& model, const Matrix& x);
Vector PredictProba(const Model& model, const Vector& x);

// Chain rule from d(loss)/d(scores) to d(loss)/d(params).
Vector ScoreGradToParams(const Model& model, const Matrix& x, const Matrix& score_grad);
// Chain rule from d(loss)/d(probabilities) to d(loss)/d(scores).
Matrix ProbaGradToScores(const Model& model, const Matrix& proba, const Matrix& proba_grad);

// Mean over rows of -sum_k t_k ln clamp(q_k), and its gradient with respect
// to the scores. `targets` rows are probability vectors (one-hot for CE).
double SoftCrossEntropy(const Matrix& proba, const Matrix& targets, double clamp);
Matrix SoftCrossEntropyScoreGrad(const Model& model, const Matrix& proba,
                                 const Matrix& targets, double clamp);

Matrix OneHot(const Labels& y, int classes);

// Mean over samples of -ln p(y_i).
double CeLoss(const Model& model, const Matrix& x, const Labels& y,
              double clamp = 1e-12);
Vector GradCe(const Model& model, const Matrix& x, const Labels& y,
              double clamp = 1e-12);

// sum_i p_i ln(p_i / q_i) with q clamped; zero entries of p contribute 0.
double KlDiv(const Vector& p, const Vector& q, double clamp = 1e-12);
// Row-wise mean of KlDiv(teacher_i, student_i).
double MeanKl(const Matrix& teacher, const Matrix& student, double clamp = 1e-12);

struct TrainInfo {
  int iterations = 0;
  bool converged = false;  // gradient tolerance reached
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int halvings = 0;
};

// Returns the loss at `params` and writes the gradient into `grad`.
using Objective = std::function<double(const Vector& params, Vector& grad)>;

// Full-batch gradient descent. A step that increases the loss is retried at
// half the learning rate (at most 30 times per iteration); the reduced rate
// is kept afterwards. Non-finite loss or gradient throws NumericalError
// tagged with `stage`.
Vector GradientDescent(const Objective& objective, Vector init, const GdOptions& opts,
                       const std::string& stage, TrainInfo* info = nullptr);

Model TrainCe(const Model& init, const Matrix& x, const Labels& y,
              const GdOptions& opts, TrainInfo* info = nullptr);

// Rows: tensor_name,index,value. Shape metadata is stored as meta.* tensors.
void SaveModelCsv(std::ostream& os, const Model& model);
Model LoadModelCsv(std::istream& is);

}  // namespace mfhlab::models
