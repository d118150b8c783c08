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

// Synthetic multimodal Gaussian data with controllable overlap between the
// decisive channels of two modalities.
//
// A latent decisive vector x* ~ N(0, I_d) determines the label through a
// fixed hyperplane delta: y = 1 iff <delta, x*> > 0. Each modality is an
// isotropic Gaussian whose channels at the index set J (J1 for modality a,
// J2 for modality b) are overwritten by the same-index entries of x*.
// Channels in J1 ∩ J2 are modality-general decisive, channels in only one
// set are modality-specific decisive, everything else is noise.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mfhlab/common.hpp"
#include "mfhlab/rng.hpp"

namespace mfhlab::mvd {

// Exact non-negative rational, always stored in lowest terms.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio Of(std::int64_t num, std::int64_t den);
  double value() const { return static_cast<double>(num) / den; }
  friend Ratio operator+(Ratio a, Ratio b);
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

class MvdSpec {
 public:
  // Validates every invariant; throws InvalidArgument on violation.
  static MvdSpec Make(int d1, int d2, int d, std::vector<int> j1,
                      std::vector<int> j2, Vector delta);

  int d1() const { return d1_; }
  int d2() const { return d2_; }
  int d() const { return d_; }
  const std::vector<int>& j1() const { return j1_; }
  const std::vector<int>& j2() const { return j2_; }
  const Vector& delta() const { return delta_; }

  std::vector<int> Intersection() const;
  std::vector<int> Union() const;

 private:
  MvdSpec() = default;

  int d1_ = 0;
  int d2_ = 0;
  int d_ = 0;
  std::vector<int> j1_;  // sorted, unique
  std::vector<int> j2_;
  Vector delta_;
};

// Proportion of decisive features shared by both modalities.
Ratio GammaOf(const MvdSpec& spec);
// Proportion of decisive features present only in modality a.
Ratio AlphaOf(const MvdSpec& spec);
// Proportion of decisive features present only in modality b.
Ratio BetaOf(const MvdSpec& spec);

// d1=25, d2=50, d=20, |J1|=|J2|=10, |J1 ∩ J2| = overlap in {0,2,...,10}.
// J1 = {0..9}, J2 = {10-overlap .. 19-overlap}. delta ~ N(0, I_20) from rng.
MvdSpec BuildGammaPoint(int overlap, Rng& rng);

// d1=d2=50, d=d_total in {10,20,...,50}, J1={0..d_total-1}, J2={0..9}.
MvdSpec BuildAlphaPoint(int d_total, Rng& rng);

// Nested recipe: modality a carries every decisive feature, modality b a
// prefix of them. J1={0..d_total-1}, J2={0..general-1}; so beta = 0 and
// gamma = general / d_total.
MvdSpec BuildSubsetPoint(int d1, int d2, int d_total, int general, Rng& rng);

enum class ChannelRole { kGeneralDecisive, kSpecificDecisive, kNoise };

const char* RoleName(ChannelRole role);
ChannelRole ParseRole(const std::string& name);

struct MultimodalDataset {
  Matrix xa;  // n x d1
  Matrix xb;  // n x d2
  Labels y;
  std::vector<ChannelRole> roles_a;
  std::vector<ChannelRole> roles_b;

  int n() const { return static_cast<int>(y.size()); }
  const Matrix& x(Modality m) const { return m == Modality::kA ? xa : xb; }
  const std::vector<ChannelRole>& roles(Modality m) const {
    return m == Modality::kA ? roles_a : roles_b;
  }
  int CountRole(Modality m, ChannelRole role) const;
};

std::vector<ChannelRole> RolesFor(const MvdSpec& spec, Modality m);

// Draws n samples. Per sample, in order: x* (d normals), the modality-a
// vector (d1 normals), the modality-b vector (d2 normals). Ties on the
// hyperplane are labelled 0.
MultimodalDataset Sample(const MvdSpec& spec, int n, Rng& rng);

// CSV header: sample_id,y,a_0..a_{d1-1},b_0..b_{d2-1}
void WriteDatasetCsv(std::ostream& os, const MultimodalDataset& data);
// Sidecar CSV: modality,channel,role
void WriteRolesCsv(std::ostream& os, const MultimodalDataset& data);
// Reads both files back. Roles may be omitted (pass nullptr); every channel
// is then tagged as noise.
MultimodalDataset ReadDatasetCsv(std::istream& data, std::istream* roles);

}  // namespace mfhlab::mvd
