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

#include "mfhlab/mvd.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "mfhlab/csv.hpp"

namespace mfhlab::mvd {

Ratio Ratio::Of(std::int64_t num, std::int64_t den) {
  Require(den > 0 && num >= 0, "ratio must be non-negative with positive denominator");
  std::int64_t g = std::gcd(num, den);
  if (g == 0) g = 1;
  return Ratio{num / g, den / g};
}

Ratio operator+(Ratio a, Ratio b) {
  return Ratio::Of(a.num * b.den + b.num * a.den, a.den * b.den);
}

namespace {

std::vector<int> Normalize(std::vector<int> idx, int d, const char* name) {
  std::sort(idx.begin(), idx.end());
  Require(std::adjacent_find(idx.begin(), idx.end()) == idx.end(),
          fmt::format("{} contains duplicate indices", name));
  for (int j : idx)
    Require(j >= 0 && j < d, fmt::format("{} index {} outside [0, {})", name, j, d));
  return idx;
}

std::vector<int> Range(int begin, int end) {
  std::vector<int> out(std::max(0, end - begin));
  std::iota(out.begin(), out.end(), begin);
  return out;
}

Vector StandardNormal(int d, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(d);
  for (int i = 0; i < d; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

MvdSpec MvdSpec::Make(int d1, int d2, int d, std::vector<int> j1,
                      std::vector<int> j2, Vector delta) {
  Require(d >= 1, "d must be positive");
  Require(d <= d1 && d <= d2, "decisive dimension d must not exceed d1 or d2");
  Require(delta.size() == d, "delta must have length d");
  Require(delta.allFinite(), "delta must be finite");
  Require((delta.array() != 0.0).any(), "delta must have a nonzero entry");
  MvdSpec spec;
  spec.d1_ = d1;
  spec.d2_ = d2;
  spec.d_ = d;
  spec.j1_ = Normalize(std::move(j1), d, "J1");
  spec.j2_ = Normalize(std::move(j2), d, "J2");
  spec.delta_ = std::move(delta);
  return spec;
}

std::vector<int> MvdSpec::Intersection() const {
  std::vector<int> out;
  std::set_intersection(j1_.begin(), j1_.end(), j2_.begin(), j2_.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<int> MvdSpec::Union() const {
  std::vector<int> out;
  std::set_union(j1_.begin(), j1_.end(), j2_.begin(), j2_.end(),
                 std::back_inserter(out));
  return out;
}

namespace {

std::int64_t UnionSize(const MvdSpec& spec) {
  auto u = static_cast<std::int64_t>(spec.Union().size());
  Require(u > 0, "no decisive features in either modality (|J1 ∪ J2| = 0)");
  return u;
}

}  // namespace

Ratio GammaOf(const MvdSpec& spec) {
  const std::int64_t u = UnionSize(spec);
  return Ratio::Of(static_cast<std::int64_t>(spec.Intersection().size()), u);
}

Ratio AlphaOf(const MvdSpec& spec) {
  const std::int64_t u = UnionSize(spec);
  return Ratio::Of(u - static_cast<std::int64_t>(spec.j2().size()), u);
}

Ratio BetaOf(const MvdSpec& spec) {
  const std::int64_t u = UnionSize(spec);
  return Ratio::Of(u - static_cast<std::int64_t>(spec.j1().size()), u);
}

MvdSpec BuildGammaPoint(int overlap, Rng& rng) {
  Require(overlap >= 0 && overlap <= 10 && overlap % 2 == 0,
          fmt::format("gamma-sweep overlap must be one of 0,2,...,10 (got {})", overlap));
  return MvdSpec::Make(25, 50, 20, Range(0, 10), Range(10 - overlap, 20 - overlap),
                       StandardNormal(20, rng));
}

MvdSpec BuildAlphaPoint(int d_total, Rng& rng) {
  Require(d_total >= 10 && d_total <= 50 && d_total % 10 == 0,
          fmt::format("alpha-sweep d_total must be one of 10,20,...,50 (got {})", d_total));
  return MvdSpec::Make(50, 50, d_total, Range(0, d_total), Range(0, 10),
                       StandardNormal(d_total, rng));
}

MvdSpec BuildSubsetPoint(int d1, int d2, int d_total, int general, Rng& rng) {
  Require(general >= 1 && general <= d_total,
          "subset recipe needs 1 <= general <= d_total");
  return MvdSpec::Make(d1, d2, d_total, Range(0, d_total), Range(0, general),
                       StandardNormal(d_total, rng));
}

const char* RoleName(ChannelRole role) {
  switch (role) {
    case ChannelRole::kGeneralDecisive: return "general-decisive";
    case ChannelRole::kSpecificDecisive: return "specific-decisive";
    case ChannelRole::kNoise: return "noise";
  }
  return "noise";
}

ChannelRole ParseRole(const std::string& name) {
  if (name == "general-decisive") return ChannelRole::kGeneralDecisive;
  if (name == "specific-decisive") return ChannelRole::kSpecificDecisive;
  if (name == "noise") return ChannelRole::kNoise;
  throw InvalidArgument("unknown channel role '" + name + "'");
}

int MultimodalDataset::CountRole(Modality m, ChannelRole role) const {
  const auto& r = roles(m);
  return static_cast<int>(std::count(r.begin(), r.end(), role));
}

std::vector<ChannelRole> RolesFor(const MvdSpec& spec, Modality m) {
  const int width = m == Modality::kA ? spec.d1() : spec.d2();
  const auto& own = m == Modality::kA ? spec.j1() : spec.j2();
  const auto& other = m == Modality::kA ? spec.j2() : spec.j1();
  std::vector<ChannelRole> roles(width, ChannelRole::kNoise);
  for (int j : own) {
    const bool shared = std::binary_search(other.begin(), other.end(), j);
    roles[j] = shared ? ChannelRole::kGeneralDecisive : ChannelRole::kSpecificDecisive;
  }
  return roles;
}

MultimodalDataset Sample(const MvdSpec& spec, int n, Rng& rng) {
  Require(n >= 1, "sample size must be positive");
  std::normal_distribution<double> normal;
  MultimodalDataset data;
  data.xa.resize(n, spec.d1());
  data.xb.resize(n, spec.d2());
  data.y.resize(n);
  Vector xstar(spec.d());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < spec.d(); ++k) xstar[k] = normal(rng);
    for (int k = 0; k < spec.d1(); ++k) data.xa(i, k) = normal(rng);
    for (int k = 0; k < spec.d2(); ++k) data.xb(i, k) = normal(rng);
    for (int j : spec.j1()) data.xa(i, j) = xstar[j];
    for (int j : spec.j2()) data.xb(i, j) = xstar[j];
    data.y[i] = spec.delta().dot(xstar) > 0.0 ? 1 : 0;
  }
  data.roles_a = RolesFor(spec, Modality::kA);
  data.roles_b = RolesFor(spec, Modality::kB);
  return data;
}

void WriteDatasetCsv(std::ostream& os, const MultimodalDataset& data) {
  os << "sample_id,y";
  for (int k = 0; k < data.xa.cols(); ++k) os << ",a_" << k;
  for (int k = 0; k < data.xb.cols(); ++k) os << ",b_" << k;
  os << '\n';
  for (int i = 0; i < data.n(); ++i) {
    os << i << ',' << data.y[i];
    for (int k = 0; k < data.xa.cols(); ++k) os << ',' << csv::Num(data.xa(i, k));
    for (int k = 0; k < data.xb.cols(); ++k) os << ',' << csv::Num(data.xb(i, k));
    os << '\n';
  }
}

void WriteRolesCsv(std::ostream& os, const MultimodalDataset& data) {
  os << "modality,channel,role\n";
  for (std::size_t k = 0; k < data.roles_a.size(); ++k)
    os << "a," << k << ',' << RoleName(data.roles_a[k]) << '\n';
  for (std::size_t k = 0; k < data.roles_b.size(); ++k)
    os << "b," << k << ',' << RoleName(data.roles_b[k]) << '\n';
}

MultimodalDataset ReadDatasetCsv(std::istream& data_in, std::istream* roles_in) {
  std::vector<std::string> row;
  int line = 0;
  Require(csv::NextRow(data_in, row, line), "dataset CSV is empty");
  Require(row.size() >= 2 && row[0] == "sample_id" && row[1] == "y",
          "dataset CSV header must start with sample_id,y");
  int d1 = 0, d2 = 0;
  for (std::size_t c = 2; c < row.size(); ++c) {
    const std::string& h = row[c];
    if (h == fmt::format("a_{}", d1) && d2 == 0) {
      ++d1;
    } else if (h == fmt::format("b_{}", d2)) {
      ++d2;
    } else {
      throw InvalidArgument(fmt::format("line 1: unexpected column '{}'", h));
    }
  }
  std::vector<std::vector<double>> a_rows, b_rows;
  Labels y;
  while (csv::NextRow(data_in, row, line)) {
    Require(row.size() == static_cast<std::size_t>(2 + d1 + d2),
            fmt::format("line {}: expected {} fields", line, 2 + d1 + d2));
    const long long label = csv::ParseInt(row[1], line);
    Require(label == 0 || label == 1, fmt::format("line {}: label must be 0 or 1", line));
    y.push_back(static_cast<int>(label));
    std::vector<double> a(d1), b(d2);
    for (int k = 0; k < d1; ++k) a[k] = csv::ParseDouble(row[2 + k], line);
    for (int k = 0; k < d2; ++k) b[k] = csv::ParseDouble(row[2 + d1 + k], line);
    a_rows.push_back(std::move(a));
    b_rows.push_back(std::move(b));
  }
  MultimodalDataset out;
  const int n = static_cast<int>(y.size());
  out.y = std::move(y);
  out.xa.resize(n, d1);
  out.xb.resize(n, d2);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d1; ++k) out.xa(i, k) = a_rows[i][k];
    for (int k = 0; k < d2; ++k) out.xb(i, k) = b_rows[i][k];
  }
  out.roles_a.assign(d1, ChannelRole::kNoise);
  out.roles_b.assign(d2, ChannelRole::kNoise);
  if (roles_in != nullptr) {
    line = 0;
    Require(csv::NextRow(*roles_in, row, line) && row.size() == 3 &&
                row[0] == "modality",
            "roles CSV header must be modality,channel,role");
    while (csv::NextRow(*roles_in, row, line)) {
      Require(row.size() == 3, fmt::format("roles line {}: expected 3 fields", line));
      const long long ch = csv::ParseInt(row[1], line);
      auto& target = row[0] == "a" ? out.roles_a : out.roles_b;
      Require(row[0] == "a" || row[0] == "b",
              fmt::format("roles line {}: modality must be a or b", line));
      Require(ch >= 0 && ch < static_cast<long long>(target.size()),
              fmt::format("roles line {}: channel out of range", line));
      target[ch] = ParseRole(row[2]);
    }
  }
  return out;
}

}  // namespace mfhlab::mvd
