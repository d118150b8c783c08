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

// Teacher to student distillation: rho * CE(y, student) + (1 - rho) * KL(teacher || student).

#include <functional>
#include <string>

#include "mfhlab/models.hpp"
#include "mfhlab/mvd.hpp"

namespace mfhlab::kd {

enum class Input { kA, kB, kConcat };

const char* InputName(Input input);
Input ParseInput(const std::string& name);

// The matrix a model with the given input reads; kConcat is [xa | xb].
Matrix Slice(const mvd::MultimodalDataset& data, Input input);

struct KdConfig {
  double rho = 0.5;
  Input teacher_input = Input::kA;
  Input student_input = Input::kB;
  models::GdOptions gd;

  void Validate() const;
};

// A frozen predictor: input matrix to n x K probabilities.
using TeacherFn = std::function<Matrix(const Matrix&)>;

TeacherFn Frozen(const models::Model& teacher);

double KdLoss(const Matrix& student_probs, const Matrix& teacher_probs, const Labels& y,
              double rho, double clamp = 1e-12);

// Gradient of KdLoss with respect to the student's parameters.
Vector GradKd(const models::Model& student, const Matrix& x, const Matrix& teacher_probs,
              const Labels& y, double rho, double clamp = 1e-12);

// Trains `student_init` on fixed teacher probabilities.
models::Model DistillFromProbs(const Matrix& teacher_probs, const Matrix& x_student,
                               const Labels& y, const KdConfig& cfg,
                               const models::Model& student_init,
                               models::TrainInfo* info = nullptr);

models::Model Distill(const TeacherFn& teacher, const mvd::MultimodalDataset& data,
                      const KdConfig& cfg, const models::Model& student_init,
                      models::TrainInfo* info = nullptr);
models::Model Distill(const models::Model& teacher, const mvd::MultimodalDataset& data,
                      const KdConfig& cfg, const models::Model& student_init,
                      models::TrainInfo* info = nullptr);

// Fraction of rows whose argmax (lowest index on ties) equals the label.
double Evaluate(const models::Model& model, const Matrix& x, const Labels& y);
double Accuracy(const Matrix& probs, const Labels& y);

}  // namespace mfhlab::kd
