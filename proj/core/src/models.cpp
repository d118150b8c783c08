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

#include "mfhlab/models.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "mfhlab/csv.hpp"

namespace mfhlab::models {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstTensor = Eigen::Map<const RowMajor>;
using Tensor = Eigen::Map<RowMajor>;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Offsets of each tensor inside the flat parameter vector.
struct Layout {
  int w1 = 0, b1 = 0, w2 = 0, b2 = 0, total = 0;
};

Layout LayoutOf(ModelKind kind, int d, int classes, int hidden, bool bias) {
  Layout l;
  switch (kind) {
    case ModelKind::kLogisticBinary:
      l.w1 = 0;
      l.b1 = d;
      l.total = d + (bias ? 1 : 0);
      break;
    case ModelKind::kSoftmaxLinear:
      l.w1 = 0;
      l.b1 = classes * d;
      l.total = classes * d + (bias ? classes : 0);
      break;
    case ModelKind::kMlp1:
      l.w1 = 0;
      l.b1 = hidden * d;
      l.w2 = l.b1 + hidden;
      l.b2 = l.w2 + classes * hidden;
      l.total = l.b2 + classes;
      break;
  }
  return l;
}

void CheckInput(const Model& model, const Matrix& x) {
  Require(x.cols() == model.input_dim(),
          fmt::format("input has {} columns, model expects {}", x.cols(), model.input_dim()));
}

double Clamp(double q, double c) { return std::clamp(q, c, 1.0 - c); }

}  // namespace

const char* KindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLogisticBinary: return "logistic";
    case ModelKind::kSoftmaxLinear: return "softmax";
    case ModelKind::kMlp1: return "mlp1";
  }
  return "logistic";
}

ModelKind ParseKind(const std::string& name) {
  if (name == "logistic") return ModelKind::kLogisticBinary;
  if (name == "softmax") return ModelKind::kSoftmaxLinear;
  if (name == "mlp1") return ModelKind::kMlp1;
  throw InvalidArgument("unknown model kind '" + name + "' (logistic|softmax|mlp1)");
}

void GdOptions::Validate() const {
  Require(learning_rate > 0 && std::isfinite(learning_rate), "learning_rate must be positive");
  Require(max_iters >= 0, "max_iters must be non-negative");
  Require(grad_tol >= 0, "grad_tol must be non-negative");
  Require(prob_clamp > 0 && prob_clamp <= 1e-3, "prob_clamp must lie in (0, 1e-3]");
}

Model Model::LogisticBinary(int input_dim, bool bias) {
  Require(input_dim >= 1, "input dimension must be positive");
  Model m;
  m.kind_ = ModelKind::kLogisticBinary;
  m.input_dim_ = input_dim;
  m.classes_ = 2;
  m.bias_ = bias;
  m.params_ = Vector::Zero(LayoutOf(m.kind_, input_dim, 2, 0, bias).total);
  return m;
}

Model Model::SoftmaxLinear(int input_dim, int classes, bool bias) {
  Require(input_dim >= 1 && classes >= 2, "softmax model needs d >= 1 and K >= 2");
  Model m;
  m.kind_ = ModelKind::kSoftmaxLinear;
  m.input_dim_ = input_dim;
  m.classes_ = classes;
  m.bias_ = bias;
  m.params_ = Vector::Zero(LayoutOf(m.kind_, input_dim, classes, 0, bias).total);
  return m;
}

Model Model::Mlp1(int input_dim, int hidden, int classes, Rng& rng, double init_std) {
  Require(input_dim >= 1 && hidden >= 1 && classes >= 2, "mlp1 needs d, h >= 1 and K >= 2");
  Model m;
  m.kind_ = ModelKind::kMlp1;
  m.input_dim_ = input_dim;
  m.hidden_ = hidden;
  m.classes_ = classes;
  m.bias_ = true;
  const Layout l = LayoutOf(m.kind_, input_dim, classes, hidden, true);
  m.params_ = Vector::Zero(l.total);
  std::normal_distribution<double> normal(0.0, init_std);
  for (int i = l.w1; i < l.b1; ++i) m.params_[i] = normal(rng);
  for (int i = l.w2; i < l.b2; ++i) m.params_[i] = normal(rng);
  return m;
}

Model Model::WithParams(Vector params) const {
  Require(params.size() == params_.size(), "parameter vector has the wrong length");
  Require(params.allFinite(), "parameters must be finite");
  Model m = *this;
  m.params_ = std::move(params);
  return m;
}

Eigen::Map<const Vector> Model::theta() const {
  Require(kind_ == ModelKind::kLogisticBinary, "theta() is defined for the binary model only");
  return Eigen::Map<const Vector>(params_.data(), input_dim_);
}

double Model::bias() const {
  Require(kind_ == ModelKind::kLogisticBinary, "bias() is defined for the binary model only");
  return bias_ ? params_[input_dim_] : 0.0;
}

bool operator==(const Model& a, const Model& b) {
  return a.kind_ == b.kind_ && a.input_dim_ == b.input_dim_ && a.classes_ == b.classes_ &&
         a.hidden_ == b.hidden_ && a.bias_ == b.bias_ && a.params_ == b.params_;
}

Matrix Scores(const Model& model, const Matrix& x) {
  CheckInput(model, x);
  const int d = model.input_dim_;
  const int k = model.classes_;
  const Layout l = LayoutOf(model.kind_, d, k, model.hidden_, model.bias_);
  const double* p = model.params_.data();
  switch (model.kind_) {
    case ModelKind::kLogisticBinary: {
      Matrix z = x * Eigen::Map<const Vector>(p, d);
      if (model.bias_) z.array() += p[l.b1];
      return z;
    }
    case ModelKind::kSoftmaxLinear: {
      Matrix z = x * ConstTensor(p, k, d).transpose();
      if (model.bias_) z.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p + l.b1, k);
      return z;
    }
    case ModelKind::kMlp1: {
      const int h = model.hidden_;
      Matrix a = x * ConstTensor(p + l.w1, h, d).transpose();
      a.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p + l.b1, h);
      a = a.cwiseMax(0.0);
      Matrix z = a * ConstTensor(p + l.w2, k, h).transpose();
      z.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p + l.b2, k);
      return z;
    }
  }
  return {};
}

Matrix PredictProba(const Model& model, const Matrix& x) {
  const Matrix s = Scores(model, x);
  Matrix out(s.rows(), model.classes());
  if (model.kind() == ModelKind::kLogisticBinary) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      out(i, 1) = Sigmoid(s(i, 0));
      out(i, 0) = Sigmoid(-s(i, 0));
    }
    return out;
  }
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    double total = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) total += out(i, j) = std::exp(s(i, j) - m);
    out.row(i) /= total;
  }
  return out;
}

Vector PredictProba(const Model& model, const Vector& x) {
  Require(x.size() == model.input_dim(),
          fmt::format("input has length {}, model expects {}", x.size(), model.input_dim()));
  return PredictProba(model, Matrix(x.transpose())).row(0).transpose();
}

Vector ScoreGradToParams(const Model& model, const Matrix& x, const Matrix& g) {
  CheckInput(model, x);
  Require(g.rows() == x.rows() && g.cols() == model.score_dim(), "score gradient has the wrong shape");
  const int d = model.input_dim_;
  const int k = model.classes_;
  const Layout l = LayoutOf(model.kind_, d, k, model.hidden_, model.bias_);
  Vector out = Vector::Zero(l.total);
  double* o = out.data();
  switch (model.kind_) {
    case ModelKind::kLogisticBinary:
      Eigen::Map<Vector>(o, d) = x.transpose() * g.col(0);
      if (model.bias_) o[l.b1] = g.sum();
      break;
    case ModelKind::kSoftmaxLinear:
      Tensor(o, k, d) = g.transpose() * x;
      if (model.bias_) Eigen::Map<Eigen::RowVectorXd>(o + l.b1, k) = g.colwise().sum();
      break;
    case ModelKind::kMlp1: {
      const int h = model.hidden_;
      const double* p = model.params_.data();
      Matrix pre = x * ConstTensor(p + l.w1, h, d).transpose();
      pre.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(p + l.b1, h);
      const Matrix act = pre.cwiseMax(0.0);
      Tensor(o + l.w2, k, h) = g.transpose() * act;
      Eigen::Map<Eigen::RowVectorXd>(o + l.b2, k) = g.colwise().sum();
      Matrix dpre = g * ConstTensor(p + l.w2, k, h);
      dpre = dpre.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
      Tensor(o + l.w1, h, d) = dpre.transpose() * x;
      Eigen::Map<Eigen::RowVectorXd>(o + l.b1, h) = dpre.colwise().sum();
      break;
    }
  }
  return out;
}

Matrix ProbaGradToScores(const Model& model, const Matrix& proba, const Matrix& pg) {
  Require(proba.rows() == pg.rows() && proba.cols() == pg.cols(), "probability gradient shape mismatch");
  if (model.kind() == ModelKind::kLogisticBinary) {
    Matrix out(proba.rows(), 1);
    for (Eigen::Index i = 0; i < proba.rows(); ++i)
      out(i, 0) = (pg(i, 1) - pg(i, 0)) * proba(i, 0) * proba(i, 1);
    return out;
  }
  Matrix out(proba.rows(), proba.cols());
  for (Eigen::Index i = 0; i < proba.rows(); ++i) {
    const double dot = proba.row(i).dot(pg.row(i));
    for (Eigen::Index j = 0; j < proba.cols(); ++j) out(i, j) = proba(i, j) * (pg(i, j) - dot);
  }
  return out;
}

double SoftCrossEntropy(const Matrix& q, const Matrix& t, double c) {
  Require(q.rows() == t.rows() && q.cols() == t.cols(), "target/probability shape mismatch");
  Require(q.rows() > 0, "empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j)
      if (t(i, j) != 0.0) total -= t(i, j) * std::log(Clamp(q(i, j), c));
  return total / static_cast<double>(q.rows());
}

Matrix SoftCrossEntropyScoreGrad(const Model& model, const Matrix& q, const Matrix& t, double c) {
  Require(q.rows() == t.rows() && q.cols() == t.cols(), "target/probability shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(q.rows());
  // d/dz_j of -sum_k t_k ln clamp(q_k) = q_j * S - t_j * [q_j unclamped],
  // with S = sum of targets over unclamped classes.
  Matrix g(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const bool live = q(i, j) >= c && q(i, j) <= 1.0 - c;
      g(i, j) = live ? t(i, j) : 0.0;
      s += g(i, j);
    }
    for (Eigen::Index j = 0; j < q.cols(); ++j) g(i, j) = (q(i, j) * s - g(i, j)) * inv_n;
  }
  if (model.kind() == ModelKind::kLogisticBinary) return g.col(1);
  return g;
}

Matrix OneHot(const Labels& y, int classes) {
  Matrix t = Matrix::Zero(static_cast<Eigen::Index>(y.size()), classes);
  for (std::size_t i = 0; i < y.size(); ++i) {
    Require(y[i] >= 0 && y[i] < classes, fmt::format("label {} outside [0, {})", y[i], classes));
    t(static_cast<Eigen::Index>(i), y[i]) = 1.0;
  }
  return t;
}

double CeLoss(const Model& model, const Matrix& x, const Labels& y, double clamp) {
  Require(static_cast<Eigen::Index>(y.size()) == x.rows(), "label count does not match rows");
  return SoftCrossEntropy(PredictProba(model, x), OneHot(y, model.classes()), clamp);
}

Vector GradCe(const Model& model, const Matrix& x, const Labels& y, double clamp) {
  Require(static_cast<Eigen::Index>(y.size()) == x.rows(), "label count does not match rows");
  const Matrix q = PredictProba(model, x);
  return ScoreGradToParams(model, x,
                           SoftCrossEntropyScoreGrad(model, q, OneHot(y, model.classes()), clamp));
}

double KlDiv(const Vector& p, const Vector& q, double clamp) {
  Require(p.size() == q.size(), "KL arguments must have equal length");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) total += p[i] * (std::log(p[i]) - std::log(Clamp(q[i], clamp)));
  return std::max(total, 0.0);
}

double MeanKl(const Matrix& teacher, const Matrix& student, double clamp) {
  Require(teacher.rows() == student.rows() && teacher.cols() == student.cols(),
          "teacher/student probability shape mismatch");
  Require(teacher.rows() > 0, "empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < teacher.rows(); ++i)
    total += KlDiv(teacher.row(i).transpose(), student.row(i).transpose(), clamp);
  return total / static_cast<double>(teacher.rows());
}

Vector GradientDescent(const Objective& objective, Vector params, const GdOptions& opts,
                       const std::string& stage, TrainInfo* info) {
  opts.Validate();
  auto check = [&](double loss, const Vector& grad) {
    if (!std::isfinite(loss) || !grad.allFinite())
      throw NumericalError(stage, "non-finite loss or gradient");
  };
  TrainInfo local;
  Vector grad(params.size());
  double loss = objective(params, grad);
  check(loss, grad);
  local.initial_loss = loss;
  double lr = opts.learning_rate;
  Vector trial_grad(params.size());
  for (int it = 0; it < opts.max_iters; ++it) {
    if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) break;
    bool accepted = false;
    for (int halving = 0; halving <= 30; ++halving) {
      Vector trial = params - lr * grad;
      const double trial_loss = objective(trial, trial_grad);
      check(trial_loss, trial_grad);
      // Rounding noise in the loss sum is not an increase.
      if (trial_loss <= loss + 1e-14 * std::max(1.0, std::abs(loss))) {
        params = std::move(trial);
        grad.swap(trial_grad);
        loss = trial_loss;
        accepted = true;
        break;
      }
      lr *= 0.5;
      ++local.halvings;
    }
    if (!accepted) break;
    ++local.iterations;
  }
  local.converged = grad.lpNorm<Eigen::Infinity>() < opts.grad_tol;
  local.final_loss = loss;
  if (info != nullptr) *info = local;
  return params;
}

Model TrainCe(const Model& init, const Matrix& x, const Labels& y, const GdOptions& opts,
              TrainInfo* info) {
  CheckInput(init, x);
  Require(static_cast<Eigen::Index>(y.size()) == x.rows(), "label count does not match rows");
  const Matrix targets = OneHot(y, init.classes());
  Objective objective = [&](const Vector& p, Vector& grad) {
    const Model m = init.WithParams(p);
    const Matrix q = PredictProba(m, x);
    grad = ScoreGradToParams(m, x, SoftCrossEntropyScoreGrad(m, q, targets, opts.prob_clamp));
    return SoftCrossEntropy(q, targets, opts.prob_clamp);
  };
  return init.WithParams(GradientDescent(objective, init.params(), opts, "train_ce", info));
}

void SaveModelCsv(std::ostream& os, const Model& model) {
  const Layout l = LayoutOf(model.kind_, model.input_dim_, model.classes_, model.hidden_, model.bias_);
  os << "tensor_name,index,value\n";
  os << "meta.kind,0," << static_cast<int>(model.kind_) << '\n';
  os << "meta.input_dim,0," << model.input_dim_ << '\n';
  os << "meta.classes,0," << model.classes_ << '\n';
  os << "meta.hidden,0," << model.hidden_ << '\n';
  os << "meta.bias,0," << (model.bias_ ? 1 : 0) << '\n';
  auto emit = [&](const char* name, int begin, int end) {
    for (int i = begin; i < end; ++i)
      os << name << ',' << (i - begin) << ',' << csv::Num(model.params_[i]) << '\n';
  };
  switch (model.kind_) {
    case ModelKind::kLogisticBinary:
      emit("theta", 0, l.b1);
      if (model.bias_) emit("bias", l.b1, l.total);
      break;
    case ModelKind::kSoftmaxLinear:
      emit("W", 0, l.b1);
      if (model.bias_) emit("b", l.b1, l.total);
      break;
    case ModelKind::kMlp1:
      emit("W1", l.w1, l.b1);
      emit("b1", l.b1, l.w2);
      emit("W2", l.w2, l.b2);
      emit("b2", l.b2, l.total);
      break;
  }
}

Model LoadModelCsv(std::istream& is) {
  std::vector<std::string> row;
  int line = 0;
  Require(csv::NextRow(is, row, line) && row.size() == 3 && row[0] == "tensor_name",
          "model CSV header must be tensor_name,index,value");
  std::map<std::string, std::map<long long, double>> tensors;
  while (csv::NextRow(is, row, line)) {
    Require(row.size() == 3, fmt::format("model CSV line {}: expected 3 fields", line));
    auto& slot = tensors[row[0]];
    const long long idx = csv::ParseInt(row[1], line);
    Require(!slot.contains(idx), fmt::format("model CSV line {}: duplicate entry", line));
    slot[idx] = csv::ParseDouble(row[2], line);
  }
  auto meta = [&](const char* name) {
    auto it = tensors.find(name);
    Require(it != tensors.end() && it->second.size() == 1, std::string("model CSV lacks ") + name);
    return static_cast<int>(it->second.begin()->second);
  };
  Model m;
  const int kind = meta("meta.kind");
  Require(kind >= 0 && kind <= 2, "model CSV has an unknown kind");
  m.kind_ = static_cast<ModelKind>(kind);
  m.input_dim_ = meta("meta.input_dim");
  m.classes_ = meta("meta.classes");
  m.hidden_ = meta("meta.hidden");
  m.bias_ = meta("meta.bias") != 0;
  const Layout l = LayoutOf(m.kind_, m.input_dim_, m.classes_, m.hidden_, m.bias_);
  m.params_ = Vector::Zero(l.total);
  auto fill = [&](const char* name, int begin, int end) {
    auto it = tensors.find(name);
    Require(it != tensors.end() && static_cast<int>(it->second.size()) == end - begin,
            fmt::format("model CSV tensor '{}' missing or wrong size", name));
    for (const auto& [idx, v] : it->second) {
      Require(idx >= 0 && idx < end - begin, fmt::format("model CSV tensor '{}' index out of range", name));
      m.params_[begin + idx] = v;
    }
  };
  switch (m.kind_) {
    case ModelKind::kLogisticBinary:
      fill("theta", 0, l.b1);
      if (m.bias_) fill("bias", l.b1, l.total);
      break;
    case ModelKind::kSoftmaxLinear:
      fill("W", 0, l.b1);
      if (m.bias_) fill("b", l.b1, l.total);
      break;
    case ModelKind::kMlp1:
      fill("W1", l.w1, l.b1);
      fill("b1", l.b1, l.w2);
      fill("W2", l.w2, l.b2);
      fill("b2", l.b2, l.total);
      break;
  }
  Require(m.params_.allFinite(), "model CSV contains non-finite parameters");
  return m;
}

}  // namespace mfhlab::models
