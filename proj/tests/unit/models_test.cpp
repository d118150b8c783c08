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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mfhlab/models.hpp"

namespace mfhlab::models {
namespace {

Matrix Col(std::initializer_list<double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  int i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

TEST(PredictProba, ZeroLogitIsHalf) {
  const Model m = Model::LogisticBinary(3);
  const Vector p = PredictProba(m, Vector(Vector::Constant(3, 4.0)));
  EXPECT_EQ(p[0], 0.5);
  EXPECT_EQ(p[1], 0.5);
}

TEST(PredictProba, SigmoidOfLogThree) {
  Vector params(2);
  params << std::log(3.0), 0.0;
  const Model m = Model::LogisticBinary(1).WithParams(params);
  EXPECT_NEAR(PredictProba(m, Col({1.0}))(0, 1), 0.75, 1e-15);
}

TEST(PredictProba, IdenticalSoftmaxRowsAreUniform) {
  Vector params(3 * 2 + 3);
  params << 1, -2, 1, -2, 1, -2, 0.5, 0.5, 0.5;
  const Model m = Model::SoftmaxLinear(2, 3).WithParams(params);
  Matrix x(2, 2);
  x << 1, 2, -3, 0.5;
  const Matrix p = PredictProba(m, x);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(p(i, k), 1.0 / 3, 1e-15);
}

TEST(PredictProba, HugeLogitsStayFinite) {
  Vector params(2);
  params << 1.0, 0.0;
  const Model m = Model::LogisticBinary(1).WithParams(params);
  const Matrix p = PredictProba(m, Col({1e4, -1e4}));
  EXPECT_TRUE(p.allFinite());
  EXPECT_EQ(p(0, 1), 1.0);
  EXPECT_EQ(p(1, 1), 0.0);
}

TEST(CeLoss, HandEvaluatedValues) {
  const Model zero = Model::LogisticBinary(1);
  EXPECT_NEAR(CeLoss(zero, Col({1, -1, 2}), {0, 1, 1}), std::log(2.0), 1e-15);
  Vector params(2);
  params << std::log(3.0), 0.0;
  const Model m = Model::LogisticBinary(1).WithParams(params);
  // p(y_i) = 0.75 for every row.
  EXPECT_NEAR(CeLoss(m, Col({1, -1}), {1, 0}), 0.2876820724517809, 1e-12);
}

TEST(CeLoss, PerfectPredictionIsClampLimited) {
  const Matrix onehot = OneHot({0, 1}, 2);
  EXPECT_NEAR(SoftCrossEntropy(onehot, onehot, 1e-12), -std::log(1 - 1e-12), 1e-15);
  EXPECT_LT(SoftCrossEntropy(onehot, onehot, 1e-12), 1e-11);
}

TEST(KlDiv, HandEvaluatedValues) {
  Vector p(2), q(2), one(2);
  p << 0.8, 0.2;
  q << 0.5, 0.5;
  one << 1.0, 0.0;
  EXPECT_NEAR(KlDiv(p, q), 0.8 * std::log(1.6) + 0.2 * std::log(0.4), 1e-15);
  EXPECT_NEAR(KlDiv(p, q), 0.19274475702175742, 1e-12);
  EXPECT_EQ(KlDiv(p, p), 0.0);
  EXPECT_NEAR(KlDiv(one, q), std::log(2.0), 1e-15);
}

TEST(GradCe, SymmetricPairsAtZero) {
  Matrix x(4, 2);
  x << 1, 2, -1, -2, 3, -1, -3, 1;
  const Model m = Model::LogisticBinary(2, false);
  // Each +-x pair shares a label: the contributions cancel.
  EXPECT_LT(GradCe(m, x, {1, 1, 0, 0}).norm(), 1e-15);
  // Balanced labels: gradient is minus a quarter of the class-mean difference.
  const Vector pos = (x.row(0) + x.row(2)).transpose() / 2;
  const Vector neg = (x.row(1) + x.row(3)).transpose() / 2;
  EXPECT_LT((GradCe(m, x, {1, 0, 1, 0}) + (pos - neg) / 4).norm(), 1e-15);
}

TEST(GradCe, RandomInstanceMatchesFiniteDifferences) {
  Rng rng(5);
  std::normal_distribution<double> normal;
  Matrix x(5, 3);
  for (int i = 0; i < 15; ++i) x.data()[i] = normal(rng);
  const Labels y = {0, 1, 1, 0, 1};
  Vector params(4);
  for (int i = 0; i < 4; ++i) params[i] = normal(rng);
  const Model m = Model::LogisticBinary(3).WithParams(params);
  const Vector g = GradCe(m, x, y);
  Vector fd(4);
  for (int i = 0; i < 4; ++i) {
    Vector a = params, b = params;
    a[i] += 1e-5;
    b[i] -= 1e-5;
    fd[i] = (CeLoss(m.WithParams(a), x, y) - CeLoss(m.WithParams(b), x, y)) / 2e-5;
  }
  EXPECT_LT((g - fd).norm() / fd.norm(), 1e-4);
}

TEST(GradCe, DuplicatedDataGivesTheSameMeanGradient) {
  Matrix x(3, 2);
  x << 0.3, -1, 2, 0.5, -0.7, 1.1;
  Matrix xx(6, 2);
  xx << x, x;
  Vector params(3);
  params << 0.2, -0.4, 0.1;
  const Model m = Model::SoftmaxLinear(2, 2).WithParams(Vector::LinSpaced(6, -1, 1));
  EXPECT_LT((GradCe(m, x, {0, 1, 1}) - GradCe(m, xx, {0, 1, 1, 0, 1, 1})).norm(), 1e-15);
}

TEST(TrainCe, SeparatesOneDimensionalData) {
  const Matrix x = Col({-2, -1, -0.5, 0.5, 1, 2});
  const Labels y = {0, 0, 0, 1, 1, 1};
  TrainInfo info;
  const Model m = TrainCe(Model::LogisticBinary(1), x, y, GdOptions{}, &info);
  const Matrix p = PredictProba(m, x);
  for (int i = 0; i < 6; ++i) EXPECT_EQ(p(i, 1) > 0.5 ? 1 : 0, y[i]);
  EXPECT_LT(info.final_loss, info.initial_loss);
}

TEST(TrainCe, ZeroIterationsReturnsInit) {
  GdOptions gd;
  gd.max_iters = 0;
  const Model init = Model::LogisticBinary(1).WithParams(Vector::Constant(2, 0.3));
  EXPECT_EQ(TrainCe(init, Col({1, -1}), {1, 0}, gd), init);
}

TEST(GradientDescent, NonFiniteObjectiveRaisesWithStage) {
  Objective bad = [](const Vector& p, Vector& g) {
    g = Vector::Ones(p.size());
    return std::nan("");
  };
  try {
    GradientDescent(bad, Vector::Zero(2), GdOptions{}, "unit_stage");
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.stage(), "unit_stage");
  }
}

TEST(GradientDescent, MinimizesQuadratic) {
  Objective quad = [](const Vector& p, Vector& g) {
    g = 2 * (p.array() - 3.0).matrix();
    return (p.array() - 3.0).square().sum();
  };
  GdOptions gd;
  gd.learning_rate = 0.25;
  TrainInfo info;
  const Vector x = GradientDescent(quad, Vector::Zero(3), gd, "quad", &info);
  EXPECT_TRUE(info.converged);
  EXPECT_LT((x.array() - 3.0).abs().maxCoeff(), 1e-6);
}

TEST(GdOptions, RejectsBadValues) {
  GdOptions gd;
  gd.learning_rate = 0;
  EXPECT_THROW(gd.Validate(), InvalidArgument);
  gd = {};
  gd.prob_clamp = 0.6;
  EXPECT_THROW(gd.Validate(), InvalidArgument);
}

TEST(ModelCsv, RoundTripsEveryKind) {
  Rng rng(3);
  std::vector<Model> models = {
      Model::LogisticBinary(3).WithParams(Vector::LinSpaced(4, -1, 1.0 / 3)),
      Model::SoftmaxLinear(2, 3, false).WithParams(Vector::LinSpaced(6, 0.1, 0.7)),
      Model::Mlp1(4, 5, 2, rng, 0.3)};
  for (const Model& m : models) {
    std::stringstream ss;
    SaveModelCsv(ss, m);
    EXPECT_EQ(LoadModelCsv(ss), m) << KindName(m.kind());
  }
  std::stringstream bad("tensor_name,index,value\nmeta.kind,0,9\n");
  EXPECT_THROW(LoadModelCsv(bad), InvalidArgument);
}

TEST(ModelKind, NamesRoundTrip) {
  for (auto k : {ModelKind::kLogisticBinary, ModelKind::kSoftmaxLinear, ModelKind::kMlp1})
    EXPECT_EQ(ParseKind(KindName(k)), k);
  EXPECT_THROW(ParseKind("svm"), InvalidArgument);
}

}  // namespace
}  // namespace mfhlab::models
