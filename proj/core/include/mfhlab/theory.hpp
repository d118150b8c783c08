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

// Quantities behind the crossmodal distillation bound for bias-free linear
// binary classifiers, and an empirical check of the bound on a dataset.
//
// Z^u denotes the d_u x n matrix whose columns are the samples of modality u;
// functions taking Za/Zb use that orientation, functions taking Xa/Xb use the
// library's samples-as-rows convention.

#include <iosfwd>
#include <string>

#include "mfhlab/models.hpp"
#include "mfhlab/mvd.hpp"

namespace mfhlab::theory {

// Binary KL between Bernoulli(sigma(a)) and Bernoulli(sigma(b)).
double LemmaL(double b, double a);
// max of LemmaL over |a - b| <= eps: r - 1 - ln r with r = eps / (1 - e^-eps).
double LemmaLMax(double eps);
double BoundValue(long long n, double eps_star);
double EpsilonStar(double lambda, double gamma, double epsilon);

// Largest eigenvalue of a symmetric positive semi-definite operator given as
// a mat-vec, by power iteration.
double PowerIterationMax(const std::function<Vector(const Vector&)>& apply, int dim,
                         double rel_tol = 1e-10, int max_iters = 100000);

// Spectral norm of a (possibly indefinite) symmetric or rectangular matrix.
double SpectralNorm(const Matrix& m);

// max over u of max(||Z^u Z^u^T||, ||(Z^u Z^u^T)^-1||).
double EstimateLambda(const Matrix& za, const Matrix& zb);
// ||Za^T Za - Zb^T Zb|| / (1 - gamma).
double EstimateEpsilon(const Matrix& za, const Matrix& zb, double gamma);
// (Zb Zb^T)^-1 Zb Za^T theta_t.
Vector ClosedFormStudent(const Matrix& za, const Matrix& zb, const Vector& theta_t);
// ||Zb^T (Zb Zb^T)^-1 Zb Za^T - Za^T||.
double MatrixLemmaLhs(const Matrix& za, const Matrix& zb);

// Sum (not mean) over samples of LemmaL(theta_s . xb_i, theta_t . xa_i).
double EmpiricalDisRisk(const Vector& theta_s, const Vector& theta_t, const Matrix& xa,
                        const Matrix& xb);
Vector GradDisRisk(const Vector& theta_s, const Vector& theta_t, const Matrix& xa,
                   const Matrix& xb);

struct TheoremCertificate {
  std::uint64_t seed = 0;
  int n = 0;
  double gamma = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double epsilon_star = 0.0;
  double bound = 0.0;
  double risk_closed_form = 0.0;
  double risk_trained = 0.0;
  double matrix_lemma_lhs = 0.0;
  bool converged = false;
  int iterations = 0;
  bool holds = false;
};

// Step size is min(gd.learning_rate, 4 / ||Zb Zb^T||), the inverse smoothness
// constant of the risk.
models::GdOptions TheoryGdDefaults();

// theta_t is normalized to unit length first. The student starts at zero and
// runs until gd.grad_tol; if it does not get there, `holds` is false.
TheoremCertificate VerifyBound(const mvd::MultimodalDataset& data, double gamma,
                               const Vector& theta_t,
                               const models::GdOptions& gd = TheoryGdDefaults());

// holds column is true, false, or false:not_converged.
void WriteCertificateHeader(std::ostream& os);
void WriteCertificateRow(std::ostream& os, const TheoremCertificate& c);

}  // namespace mfhlab::theory
