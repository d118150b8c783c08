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

#include "mfhlab/theory.hpp"

#include <fmt/format.h>

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "mfhlab/csv.hpp"

namespace mfhlab::theory {

namespace {

double Softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector StartVector(int dim) {
  // Deterministic, and not orthogonal to any coordinate axis.
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + i);
  return v.normalized();
}

Matrix Gram(const Matrix& z) { return z * z.transpose(); }

Eigen::LLT<Matrix> Factor(const Matrix& gram, const char* stage) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError(stage, "Gram matrix is not positive definite");
  return llt;
}

}  // namespace

double LemmaL(double b, double a) {
  // KL(Ber(s(a)) || Ber(s(b))) = softplus(-b) - softplus(-a) + (1 - s(a)) (b - a)
  const double v = Softplus(-b) - Softplus(-a) + Sigmoid(-a) * (b - a);
  return std::max(v, 0.0);
}

double LemmaLMax(double eps) {
  Require(eps >= 0.0 && std::isfinite(eps), "eps must be finite and non-negative");
  if (eps < 1e-6) return eps * eps / 8.0;
  const double r = eps / -std::expm1(-eps);
  return std::max(r - 1.0 - std::log(r), 0.0);
}

double BoundValue(long long n, double eps_star) {
  Require(n >= 0, "n must be non-negative");
  return static_cast<double>(n) * LemmaLMax(eps_star);
}

double EpsilonStar(double lambda, double gamma, double epsilon) {
  Require(gamma >= 0.0 && gamma <= 1.0, "gamma out of [0,1]");
  return std::pow(lambda, 1.5) * (lambda * lambda + 1.0) * (1.0 - gamma) * epsilon;
}

double PowerIterationMax(const std::function<Vector(const Vector&)>& apply, int dim,
                         double rel_tol, int max_iters) {
  Require(dim >= 1, "operator dimension must be positive");
  Vector v = StartVector(dim);
  double rho = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    const Vector w = apply(v);
    const double next = v.dot(w);
    const double wn = w.norm();
    if (!std::isfinite(wn)) throw NumericalError("power_iteration", "non-finite iterate");
    if (wn == 0.0) return 0.0;
    const double residual = (w - next * v).norm();
    v = w / wn;
    if (residual <= rel_tol * std::abs(next) ||
        (it > 0 && std::abs(next - rho) <= 1e-15 * std::abs(next))) {
      return next;
    }
    rho = next;
  }
  return rho;
}

double SpectralNorm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const bool tall = m.rows() >= m.cols();
  const Matrix g = tall ? Matrix(m.transpose() * m) : Matrix(m * m.transpose());
  const double top = PowerIterationMax([&](const Vector& v) { return Vector(g * v); },
                                       static_cast<int>(g.rows()));
  return std::sqrt(std::max(top, 0.0));
}

double EstimateLambda(const Matrix& za, const Matrix& zb) {
  Require(za.cols() == zb.cols(), "Za and Zb must have the same sample count");
  double lambda = 0.0;
  for (const Matrix* z : {&za, &zb}) {
    Require(z->cols() >= z->rows(), "Gram matrix needs n >= d");
    const Matrix g = Gram(*z);
    const int d = static_cast<int>(g.rows());
    const double top = PowerIterationMax([&](const Vector& v) { return Vector(g * v); }, d);
    const Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success) throw NumericalError("estimate_lambda", "rank-deficient Gram matrix");
    const double inv_top =
        PowerIterationMax([&](const Vector& v) { return Vector(llt.solve(v)); }, d);
    const double bottom = 1.0 / inv_top;
    if (!(bottom >= 1e-12 * top)) throw NumericalError("estimate_lambda", "rank-deficient Gram matrix");
    lambda = std::max({lambda, top, inv_top});
  }
  return lambda;
}

double EstimateEpsilon(const Matrix& za, const Matrix& zb, double gamma) {
  Require(za.cols() == zb.cols(), "Za and Zb must have the same sample count");
  Require(gamma >= 0.0 && gamma <= 1.0, "gamma out of [0,1]");
  const int n = static_cast<int>(za.cols());
  // (Za^T Za - Zb^T Zb)^2 applied matrix-free.
  auto diff = [&](const Vector& v) {
    return Vector(za.transpose() * (za * v) - zb.transpose() * (zb * v));
  };
  const double norm = std::sqrt(std::max(
      PowerIterationMax([&](const Vector& v) { return diff(diff(v)); }, n), 0.0));
  if (gamma == 1.0) {
    Require(norm <= 1e-9, "gamma = 1 requires identical Gram structure (difference norm > 1e-9)");
    return 0.0;
  }
  return norm / (1.0 - gamma);
}

Vector ClosedFormStudent(const Matrix& za, const Matrix& zb, const Vector& theta_t) {
  Require(za.cols() == zb.cols(), "Za and Zb must have the same sample count");
  Require(theta_t.size() == za.rows(), "theta_t must match the teacher modality");
  return Factor(Gram(zb), "closed_form_student").solve(zb * (za.transpose() * theta_t));
}

double MatrixLemmaLhs(const Matrix& za, const Matrix& zb) {
  Require(za.cols() == zb.cols(), "Za and Zb must have the same sample count");
  const Matrix proj = Factor(Gram(zb), "matrix_lemma").solve(zb * za.transpose());
  return SpectralNorm(zb.transpose() * proj - za.transpose());
}

double EmpiricalDisRisk(const Vector& theta_s, const Vector& theta_t, const Matrix& xa,
                        const Matrix& xb) {
  Require(xa.rows() == xb.rows(), "modalities have different sample counts");
  Require(theta_t.size() == xa.cols() && theta_s.size() == xb.cols(), "parameter length mismatch");
  const Vector a = xa * theta_t;
  const Vector b = xb * theta_s;
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) total += LemmaL(b[i], a[i]);
  return total;
}

Vector GradDisRisk(const Vector& theta_s, const Vector& theta_t, const Matrix& xa,
                   const Matrix& xb) {
  Require(xa.rows() == xb.rows(), "modalities have different sample counts");
  const Vector a = xa * theta_t;
  const Vector b = xb * theta_s;
  Vector r(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = Sigmoid(b[i]) - Sigmoid(a[i]);
  return xb.transpose() * r;
}

models::GdOptions TheoryGdDefaults() {
  models::GdOptions gd;
  gd.learning_rate = 1e6;  // capped by the smoothness step
  gd.max_iters = 200000;
  gd.grad_tol = 1e-8;
  return gd;
}

TheoremCertificate VerifyBound(const mvd::MultimodalDataset& data, double gamma,
                               const Vector& theta_t_raw, const models::GdOptions& gd) {
  gd.Validate();
  const Matrix& xa = data.xa;
  const Matrix& xb = data.xb;
  Require(data.n() >= std::max(xa.cols(), xb.cols()), "verify_bound needs n >= max(d1, d2)");
  Require(theta_t_raw.size() == xa.cols(), "theta_t must match modality a");
  const double tn = theta_t_raw.norm();
  Require(tn > 0.0 && std::isfinite(tn), "theta_t must be finite and nonzero");
  const Vector theta_t = theta_t_raw / tn;
  const Matrix za = xa.transpose();
  const Matrix zb = xb.transpose();

  TheoremCertificate c;
  c.n = data.n();
  c.gamma = gamma;
  c.lambda = EstimateLambda(za, zb);
  c.epsilon = EstimateEpsilon(za, zb, gamma);
  c.epsilon_star = EpsilonStar(c.lambda, gamma, c.epsilon);
  c.bound = BoundValue(c.n, c.epsilon_star);
  c.matrix_lemma_lhs = MatrixLemmaLhs(za, zb);
  c.risk_closed_form = EmpiricalDisRisk(ClosedFormStudent(za, zb, theta_t), theta_t, xa, xb);

  const Matrix gb = Gram(zb);
  const double smooth = 0.25 * PowerIterationMax([&](const Vector& v) { return Vector(gb * v); },
                                                 static_cast<int>(gb.rows()));
  models::GdOptions opts = gd;
  if (smooth > 0.0) opts.learning_rate = std::min(gd.learning_rate, 1.0 / smooth);
  models::Objective objective = [&](const Vector& p, Vector& grad) {
    grad = GradDisRisk(p, theta_t, xa, xb);
    return EmpiricalDisRisk(p, theta_t, xa, xb);
  };
  models::TrainInfo info;
  const Vector theta_s =
      models::GradientDescent(objective, Vector::Zero(xb.cols()), opts, "verify_bound", &info);
  c.risk_trained = EmpiricalDisRisk(theta_s, theta_t, xa, xb);
  c.converged = info.converged;
  c.iterations = info.iterations;
  constexpr double kSlack = 1e-9;
  c.holds = c.converged && c.risk_trained <= c.bound + kSlack &&
            c.risk_closed_form <= c.bound + kSlack && c.matrix_lemma_lhs <= c.epsilon_star + kSlack;
  return c;
}

void WriteCertificateHeader(std::ostream& os) {
  os << "seed,n,gamma,lambda,epsilon,epsilon_star,bound,risk_closed_form,risk_trained,"
        "matrix_lemma_lhs,holds\n";
}

void WriteCertificateRow(std::ostream& os, const TheoremCertificate& c) {
  os << c.seed << ',' << c.n << ',' << csv::Num(c.gamma) << ',' << csv::Num(c.lambda) << ','
     << csv::Num(c.epsilon) << ',' << csv::Num(c.epsilon_star) << ',' << csv::Num(c.bound) << ','
     << csv::Num(c.risk_closed_form) << ',' << csv::Num(c.risk_trained) << ','
     << csv::Num(c.matrix_lemma_lhs) << ','
     << (c.holds ? "true" : (c.converged ? "false" : "false:not_converged")) << '\n';
}

}  // namespace mfhlab::theory
