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

#include "properties.hpp"

#include <fmt/format.h>

#include <cmath>
#include <map>
#include <sstream>

#include "mfhlab/experiments.hpp"
#include "mfhlab/kd.hpp"
#include "mfhlab/models.hpp"
#include "mfhlab/mvd.hpp"
#include "mfhlab/ranking.hpp"
#include "mfhlab/theory.hpp"

namespace mfhlab::props {

using models::Model;
using Fail = std::optional<std::string>;

PropertyResult ForAll(const std::string& name, int cases, std::uint64_t seed, const Check& check) {
  PropertyResult r;
  r.name = name;
  for (int i = 0; i < cases; ++i) {
    Rng rng = MakeRng(seed, {0x9e3779b9u, static_cast<std::uint64_t>(i)});
    Fail f;
    try {
      f = check(rng, i);
    } catch (const std::exception& e) {
      f = std::string("exception: ") + e.what();
    }
    ++r.cases;
    if (f) {
      if (r.failures++ == 0) r.first_failure = fmt::format("case {}: {}", i, *f);
    }
  }
  return r;
}

namespace {

int UniformInt(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
double Uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Matrix Gaussian(Rng& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

Vector GaussianVec(Rng& rng, int n, double scale = 1.0) { return Gaussian(rng, n, 1, scale).col(0); }

Labels RandomLabels(Rng& rng, int n, int k) {
  Labels y(n);
  for (int& v : y) v = UniformInt(rng, 0, k - 1);
  return y;
}

Matrix RandomProbs(Rng& rng, int n, int k) {
  Matrix p = Gaussian(rng, n, k, 1.5).array().exp();
  for (int i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();
  return p;
}

// Central differences with step 1e-5.
Vector NumGrad(const std::function<double(const Vector&)>& f, const Vector& p) {
  constexpr double h = 1e-5;
  Vector g(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    Vector a = p, b = p;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

Fail CompareGrad(const Vector& analytic, const Vector& numeric) {
  const double err = (analytic - numeric).norm() / std::max(numeric.norm(), 1e-6);
  if (err <= 1e-4) return std::nullopt;
  return fmt::format("relative gradient error {:.3g}", err);
}

Model RandomLinear(Rng& rng, int d, bool softmax, int k) {
  const bool bias = UniformInt(rng, 0, 1) == 1;
  Model m = softmax ? Model::SoftmaxLinear(d, k, bias) : Model::LogisticBinary(d, bias);
  return m.WithParams(GaussianVec(rng, static_cast<int>(m.params().size())));
}

// mlp1 with every hidden pre-activation away from the ReLU kink, so central
// differences see a smooth function.
Model RandomMlp(Rng& rng, const Matrix& x, int k) {
  for (int attempt = 0;; ++attempt) {
    Model m = Model::Mlp1(static_cast<int>(x.cols()), UniformInt(rng, 1, 4), k, rng, 0.7);
    m = m.WithParams(GaussianVec(rng, static_cast<int>(m.params().size()), 0.7));
    // Hidden pre-activations: W1 x + b1.
    const int h = m.hidden(), d = m.input_dim();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w1(
        m.params().data(), h, d);
    Eigen::Map<const Eigen::RowVectorXd> b1(m.params().data() + h * d, h);
    Matrix pre = x * w1.transpose();
    pre.rowwise() += b1;
    if (pre.cwiseAbs().minCoeff() > 1e-3 || attempt > 50) return m;
  }
}

mvd::MvdSpec RandomSpec(Rng& rng) {
  const int d = UniformInt(rng, 1, 8);
  const int d1 = d + UniformInt(rng, 0, 4);
  const int d2 = d + UniformInt(rng, 0, 4);
  std::vector<int> j1, j2;
  for (int j = 0; j < d; ++j) {
    if (UniformInt(rng, 0, 1)) j1.push_back(j);
    if (UniformInt(rng, 0, 1)) j2.push_back(j);
  }
  if (j1.empty() && j2.empty()) j1.push_back(0);
  Vector delta = GaussianVec(rng, d);
  delta[0] = 1.0;
  return mvd::MvdSpec::Make(d1, d2, d, j1, j2, delta);
}

template <typename Fn>
std::string Capture(Fn fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

using Table = std::map<std::string, std::function<PropertyResult(int, std::uint64_t)>>;

const Table& Properties() {
  static const Table table = [] {
    Table t;
    t["grad_ce_logistic"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_ce_logistic", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 2, 12), d = UniformInt(rng, 1, 6);
        const Matrix x = Gaussian(rng, n, d);
        const Labels y = RandomLabels(rng, n, 2);
        const Model m = RandomLinear(rng, d, false, 2);
        return CompareGrad(models::GradCe(m, x, y),
                           NumGrad([&](const Vector& p) { return models::CeLoss(m.WithParams(p), x, y); },
                                   m.params()));
      });
    };
    t["grad_ce_softmax"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_ce_softmax", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 2, 12), d = UniformInt(rng, 1, 6), k = UniformInt(rng, 2, 4);
        const Matrix x = Gaussian(rng, n, d);
        const Labels y = RandomLabels(rng, n, k);
        const Model m = RandomLinear(rng, d, true, k);
        return CompareGrad(models::GradCe(m, x, y),
                           NumGrad([&](const Vector& p) { return models::CeLoss(m.WithParams(p), x, y); },
                                   m.params()));
      });
    };
    t["grad_ce_mlp1"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_ce_mlp1", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 2, 8), d = UniformInt(rng, 1, 5), k = UniformInt(rng, 2, 3);
        const Matrix x = Gaussian(rng, n, d);
        const Labels y = RandomLabels(rng, n, k);
        const Model m = RandomMlp(rng, x, k);
        return CompareGrad(models::GradCe(m, x, y),
                           NumGrad([&](const Vector& p) { return models::CeLoss(m.WithParams(p), x, y); },
                                   m.params()));
      });
    };
    t["grad_kd"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_kd", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 2, 10), d = UniformInt(rng, 1, 5);
        const bool softmax = UniformInt(rng, 0, 1) == 1;
        const int k = softmax ? UniformInt(rng, 2, 4) : 2;
        const Matrix x = Gaussian(rng, n, d);
        const Labels y = RandomLabels(rng, n, k);
        const Matrix teacher = RandomProbs(rng, n, k);
        const double rho = Uniform(rng, 0, 1);
        const Model m = RandomLinear(rng, d, softmax, k);
        auto loss = [&](const Vector& p) {
          return kd::KdLoss(models::PredictProba(m.WithParams(p), x), teacher, y, rho);
        };
        return CompareGrad(kd::GradKd(m, x, teacher, y, rho), NumGrad(loss, m.params()));
      });
    };
    t["grad_joint"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_joint", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 2, 10), d1 = UniformInt(rng, 1, 5), d2 = UniformInt(rng, 1, 5);
        const bool softmax = UniformInt(rng, 0, 1) == 1;
        const auto space = UniformInt(rng, 0, 1) ? ranking::DistSpace::kScores
                                                 : ranking::DistSpace::kProbabilities;
        const Matrix xa = Gaussian(rng, n, d1), xb = Gaussian(rng, n, d2);
        const Labels y = RandomLabels(rng, n, 2);
        const Model f1 = RandomLinear(rng, d1, softmax, 2), f2 = RandomLinear(rng, d2, softmax, 2);
        const auto n1 = f1.params().size(), n2 = f2.params().size();
        Vector p(n1 + n2);
        p << f1.params(), f2.params();
        Vector g;
        ranking::JointLoss(f1, f2, xa, xb, y, space, 1e-12, &g);
        auto loss = [&](const Vector& q) {
          return ranking::JointLoss(f1.WithParams(q.head(n1)), f2.WithParams(q.tail(n2)), xa, xb, y,
                                    space, 1e-12);
        };
        return CompareGrad(g, NumGrad(loss, p));
      });
    };
    t["grad_dis_risk"] = [](int cases, std::uint64_t seed) {
      return ForAll("grad_dis_risk", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 1, 10), da = UniformInt(rng, 1, 5), db = UniformInt(rng, 1, 5);
        const Matrix xa = Gaussian(rng, n, da), xb = Gaussian(rng, n, db);
        const Vector tt = GaussianVec(rng, da), ts = GaussianVec(rng, db);
        return CompareGrad(
            theory::GradDisRisk(ts, tt, xa, xb),
            NumGrad([&](const Vector& p) { return theory::EmpiricalDisRisk(p, tt, xa, xb); }, ts));
      });
    };
    t["kd_loss_affine_in_rho"] = [](int cases, std::uint64_t seed) {
      return ForAll("kd_loss_affine_in_rho", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 1, 10), k = UniformInt(rng, 2, 4);
        const Matrix s = RandomProbs(rng, n, k), te = RandomProbs(rng, n, k);
        const Labels y = RandomLabels(rng, n, k);
        const double rho = Uniform(rng, 0, 1);
        const double lhs = kd::KdLoss(s, te, y, rho);
        const double rhs = rho * kd::KdLoss(s, te, y, 1.0) + (1 - rho) * kd::KdLoss(s, te, y, 0.0);
        if (lhs != rhs) return fmt::format("{} != {}", lhs, rhs);
        if (lhs < 0) return std::string("negative loss");
        return std::nullopt;
      });
    };
    t["kl_nonnegative"] = [](int cases, std::uint64_t seed) {
      return ForAll("kl_nonnegative", cases, seed, [](Rng& rng, int) -> Fail {
        const int k = UniformInt(rng, 2, 6);
        const Vector p = RandomProbs(rng, 1, k).row(0).transpose();
        const Vector q = RandomProbs(rng, 1, k).row(0).transpose();
        if (models::KlDiv(p, q) < 0) return std::string("KL(p,q) < 0");
        if (std::abs(models::KlDiv(p, p)) > 1e-15) return std::string("KL(p,p) != 0");
        return std::nullopt;
      });
    };
    t["nullify_idempotent"] = [](int cases, std::uint64_t seed) {
      return ForAll("nullify_idempotent", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 1, 20), d = UniformInt(rng, 1, 12);
        const Matrix x = Gaussian(rng, n, d);
        ranking::SaliencyVector s;
        s.p = Gaussian(rng, d, 1).col(0).cwiseAbs();
        s.p /= s.p.maxCoeff();
        const auto mode = static_cast<ranking::NullifyMode>(UniformInt(rng, 0, 2));
        const auto plan = ranking::MakeNullifyPlan(s, mode, Uniform(rng, 0, 1), x, rng);
        const Matrix once = ranking::ApplyNullify(plan, x);
        if (ranking::ApplyNullify(plan, once) != once) return std::string("second application changed X");
        if (static_cast<long>(plan.nullified.size()) != std::lround(plan.ratio * d))
          return std::string("plan size is not round(r d)");
        for (int j : plan.nullified)
          if ((once.col(j).array() != plan.replacement[j]).any()) return std::string("column not constant");
        return std::nullopt;
      });
    };
    t["softmax_shift_invariance"] = [](int cases, std::uint64_t seed) {
      return ForAll("softmax_shift_invariance", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 1, 8), d = UniformInt(rng, 1, 5), k = UniformInt(rng, 2, 5);
        const Matrix x = Gaussian(rng, n, d);
        const Model m = Model::SoftmaxLinear(d, k).WithParams(
            GaussianVec(rng, static_cast<int>(Model::SoftmaxLinear(d, k).params().size()), 2.0));
        Vector shifted = m.params();
        shifted.tail(k).array() += Uniform(rng, -50, 50);
        const Matrix a = models::PredictProba(m, x);
        const Matrix b = models::PredictProba(m.WithParams(shifted), x);
        const double diff = (a - b).cwiseAbs().maxCoeff();
        if (diff > 1e-12) return fmt::format("shift changed probabilities by {:.3g}", diff);
        const double sum_err = (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
        if (sum_err > 1e-12) return fmt::format("rows sum to 1 +- {:.3g}", sum_err);
        return std::nullopt;
      });
    };
    t["epsilon_star_homogeneity"] = [](int cases, std::uint64_t seed) {
      return ForAll("epsilon_star_homogeneity", cases, seed, [](Rng& rng, int) -> Fail {
        const double lambda = Uniform(rng, 1, 50), gamma = Uniform(rng, 0, 1);
        const double eps = Uniform(rng, 0, 10), c = Uniform(rng, 0.01, 100);
        const double a = theory::EpsilonStar(lambda, gamma, c * eps);
        const double b = c * theory::EpsilonStar(lambda, gamma, eps);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(b))) return fmt::format("{} vs {}", a, b);
        if (theory::EpsilonStar(lambda, 1.0, eps) != 0.0) return std::string("nonzero at gamma = 1");
        return std::nullopt;
      });
    };
    t["lemma_l_bounded"] = [](int cases, std::uint64_t seed) {
      return ForAll("lemma_l_bounded", cases, seed, [](Rng& rng, int) -> Fail {
        const double eps = Uniform(rng, 0, 5), a = Uniform(rng, -10, 10), t = Uniform(rng, -eps, eps);
        const double l = theory::LemmaL(a + t, a), m = theory::LemmaLMax(eps);
        if (l > m + 1e-12) return fmt::format("l={} > max={}", l, m);
        if (theory::LemmaL(a + t, a) != theory::LemmaL(-(a + t), -a) &&
            std::abs(theory::LemmaL(a + t, a) - theory::LemmaL(-(a + t), -a)) > 1e-12)
          return std::string("label-flip symmetry violated");
        return std::nullopt;
      });
    };
    t["dis_risk_label_flip"] = [](int cases, std::uint64_t seed) {
      return ForAll("dis_risk_label_flip", cases, seed, [](Rng& rng, int) -> Fail {
        const int n = UniformInt(rng, 1, 20), da = UniformInt(rng, 1, 5), db = UniformInt(rng, 1, 5);
        const Matrix xa = Gaussian(rng, n, da), xb = Gaussian(rng, n, db);
        const Vector tt = GaussianVec(rng, da), ts = GaussianVec(rng, db);
        const double a = theory::EmpiricalDisRisk(ts, tt, xa, xb);
        const double b = theory::EmpiricalDisRisk(-ts, -tt, xa, xb);
        if (std::abs(a - b) > 1e-12 * std::max(1.0, a)) return fmt::format("{} vs {}", a, b);
        return std::nullopt;
      });
    };
    t["ratios_sum_to_one"] = [](int cases, std::uint64_t seed) {
      return ForAll("ratios_sum_to_one", cases, seed, [](Rng& rng, int) -> Fail {
        const auto spec = RandomSpec(rng);
        const auto sum = mvd::GammaOf(spec) + mvd::AlphaOf(spec) + mvd::BetaOf(spec);
        if (!(sum == mvd::Ratio::Of(1, 1))) return fmt::format("sum = {}/{}", sum.num, sum.den);
        return std::nullopt;
      });
    };
    t["determinism_byte_equal"] = [](int cases, std::uint64_t seed) {
      return ForAll("determinism_byte_equal", cases, seed, [](Rng& rng, int i) -> Fail {
        const auto spec = RandomSpec(rng);
        const std::uint64_t s = static_cast<std::uint64_t>(i) * 7919u + 1;
        auto pipeline = [&] {
          Rng r(s);
          const auto data = mvd::Sample(spec, 12, r);
          models::GdOptions gd;
          gd.max_iters = 20;
          const Model m = models::TrainCe(Model::LogisticBinary(spec.d1()), data.xa, data.y, gd);
          const auto [f1, f2] = ranking::JointTrain(data, {.gd = gd});
          const auto sal = ranking::RankFeatures(f1, f2, data, Modality::kA, 2, s);
          return Capture([&](std::ostream& os) {
            mvd::WriteDatasetCsv(os, data);
            models::SaveModelCsv(os, m);
            ranking::WriteSaliencyCsv(os, sal);
          });
        };
        if (pipeline() != pipeline()) return std::string("repeated pipeline output differs");
        return std::nullopt;
      });
    };
    t["sweep_determinism"] = [](int cases, std::uint64_t seed) {
      return ForAll("sweep_determinism", cases, seed, [](Rng& rng, int i) -> Fail {
        experiments::SweepConfig cfg;
        cfg.kind = static_cast<experiments::SweepKind>(UniformInt(rng, 0, 1));
        cfg.points = {cfg.kind == experiments::SweepKind::kGamma ? 2.0 * UniformInt(rng, 0, 5)
                                                                 : 10.0 * UniformInt(rng, 1, 5)};
        cfg.master_seed = static_cast<std::uint64_t>(i);
        cfg.seeds = 2;
        cfg.n_train = 16;
        cfg.n_test = 16;
        cfg.gd.max_iters = 10;
        cfg.jobs = UniformInt(rng, 1, 3);
        const std::string a = Capture([&](std::ostream& os) { WriteResultCsv(os, experiments::Run(cfg)); });
        cfg.jobs = 1;
        const std::string b = Capture([&](std::ostream& os) { WriteResultCsv(os, experiments::Run(cfg)); });
        if (a != b) return std::string("sweep CSV differs between runs");
        return std::nullopt;
      });
    };
    t["saliency_normalized"] = [](int cases, std::uint64_t seed) {
      return ForAll("saliency_normalized", cases, seed, [](Rng& rng, int i) -> Fail {
        const auto spec = RandomSpec(rng);
        const auto data = mvd::Sample(spec, 20, rng);
        models::GdOptions gd;
        gd.max_iters = 30;
        const auto [f1, f2] = ranking::JointTrain(data, {.gd = gd});
        const auto s = ranking::RankFeatures(f1, f2, data, Modality::kA, UniformInt(rng, 1, 3), i);
        if ((s.p.array() < 0).any() || (s.p.array() > 1).any()) return std::string("entry outside [0,1]");
        if (!s.all_zero && s.p.maxCoeff() != 1.0) return std::string("max entry is not 1");
        return std::nullopt;
      });
    };
    t["aggregate_identical_runs"] = [](int cases, std::uint64_t seed) {
      return ForAll("aggregate_identical_runs", cases, seed, [](Rng& rng, int) -> Fail {
        const double v = Uniform(rng, 0, 1);
        const auto st = experiments::Aggregate(std::vector<double>(UniformInt(rng, 1, 20), v));
        if (st.mean != v || st.std != 0.0) return fmt::format("mean {} std {}", st.mean, st.std);
        return std::nullopt;
      });
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> PropertyNames() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : Properties()) names.push_back(name);
  return names;
}

PropertyResult RunProperty(const std::string& name, int cases, std::uint64_t seed) {
  auto it = Properties().find(name);
  if (it == Properties().end()) throw InvalidArgument("unknown property '" + name + "'");
  return it->second(cases, seed);
}

}  // namespace mfhlab::props
