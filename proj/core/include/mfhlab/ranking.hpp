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

// Permutation-based ranking of channels by modality-general salience, and
// teachers built by nullifying ranked channels.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "mfhlab/kd.hpp"
#include "mfhlab/models.hpp"
#include "mfhlab/mvd.hpp"

namespace mfhlab::ranking {

// Where the Dist term compares the two unimodal networks. kScores is the
// default: probabilities saturate and wash out the ranking signal.
enum class DistSpace { kScores, kProbabilities };

const char* DistSpaceName(DistSpace s);
DistSpace ParseDistSpace(const std::string& name);

struct JointOptions {
  models::ModelKind kind = models::ModelKind::kLogisticBinary;
  int hidden = 16;          // mlp1 only
  std::uint64_t seed = 0;   // mlp1 initialization
  DistSpace dist = DistSpace::kScores;
  models::GdOptions gd;
};

// Network outputs compared by Dist.
Matrix Outputs(const models::Model& model, const Matrix& x, DistSpace space);
// Mean over all entries of the squared difference.
double Dist(const Matrix& out1, const Matrix& out2);

// Gradient of Dist(f1(xa), f2(xb)) + CE(y, f1(xa)) + CE(y, f2(xb)) with
// respect to the concatenated parameters [f1; f2].
double JointLoss(const models::Model& f1, const models::Model& f2, const Matrix& xa,
                 const Matrix& xb, const Labels& y, DistSpace space, double clamp,
                 Vector* grad = nullptr);

std::pair<models::Model, models::Model> JointTrain(const mvd::MultimodalDataset& data,
                                                   const JointOptions& opts,
                                                   models::TrainInfo* info = nullptr);

struct SaliencyVector {
  Vector p;
  int permutations_used = 0;
  bool all_zero = false;  // every raw score was zero; p is left at zero
};

// p_i = mean over M row-permutations of column i (of the target modality) of
// Dist between the two networks, normalized by the maximum. Repeat m of
// channel i draws from the substream (seed, ranking, target, i, m).
SaliencyVector RankFeatures(const models::Model& f1, const models::Model& f2,
                            const mvd::MultimodalDataset& data, Modality target, int m,
                            std::uint64_t seed, DistSpace space = DistSpace::kScores);

enum class NullifyMode { kGeneral, kSpecific, kRandom };

const char* NullifyModeName(NullifyMode mode);

struct NullifyPlan {
  NullifyMode mode = NullifyMode::kGeneral;
  double ratio = 0.0;
  std::vector<int> nullified;  // sorted
  Vector replacement;          // training mean of every channel

  int channels() const { return static_cast<int>(replacement.size()); }
  bool IsNullified(int channel) const;
};

// kGeneral drops the round(ratio * d) least salient channels, kSpecific the
// most salient ones; ties go to the lower index first. kRandom draws from rng.
NullifyPlan MakeNullifyPlan(const SaliencyVector& saliency, NullifyMode mode, double ratio,
                            const Matrix& x_train, Rng& rng);

// Keeps the general-decisive channels of `roles`, nullifies the rest.
NullifyPlan GroundTruthGeneralPlan(const std::vector<mvd::ChannelRole>& roles,
                                   const Matrix& x_train);

Matrix ApplyNullify(const NullifyPlan& plan, const Matrix& x);

// Teacher evaluated on nullified inputs.
kd::TeacherFn MaskedTeacher(const models::Model& teacher, const NullifyPlan& plan);
// Retrains from `init` on the nullified training matrix.
models::Model RetrainedTeacher(const models::Model& init, const NullifyPlan& plan,
                               const Matrix& x_train, const Labels& y,
                               const models::GdOptions& gd);

// Fraction of channels whose top-k membership (k = number of general channels)
// matches the ground-truth general/non-general split.
double FsAccuracy(const SaliencyVector& saliency, const std::vector<mvd::ChannelRole>& roles);

void WriteSaliencyCsv(std::ostream& os, const SaliencyVector& s);
void WritePlanCsv(std::ostream& os, const NullifyPlan& plan);

}  // namespace mfhlab::ranking
