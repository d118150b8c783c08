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

#include "report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>

#include "config.hpp"
#include "mfhlab/csv.hpp"

namespace mfhlab::cli {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

struct Axis {
  double lo, hi;
  double Map(double v, double a, double b) const {
    return hi == lo ? (a + b) / 2 : a + (v - lo) / (hi - lo) * (b - a);
  }
};

Axis Padded(double lo, double hi) {
  if (hi == lo) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string F(double v) { return fmt::format("{:.2f}", v); }

}  // namespace

std::vector<Series> ReadSeries(std::istream& in) {
  std::vector<std::string> row;
  int line = 0;
  if (!csv::NextRow(in, row, line) || row.size() != 6 || row[0] != "sweep_kind")
    throw ConfigError("result CSV header must be sweep_kind,point,metric,mean,std,n_seeds");
  std::map<std::pair<std::string, std::string>, std::vector<std::array<double, 3>>> groups;
  while (csv::NextRow(in, row, line)) {
    if (row.size() != 6) throw ConfigError(fmt::format("result CSV line {}: expected 6 fields", line));
    try {
      groups[{row[0], row[2]}].push_back(
          {csv::ParseDouble(row[1], line), csv::ParseDouble(row[3], line), csv::ParseDouble(row[4], line)});
    } catch (const InvalidArgument& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<Series> out;
  for (auto& [key, pts] : groups) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[0] < b[0]; });
    Series s;
    s.sweep_kind = key.first;
    s.metric = key.second;
    for (const auto& p : pts) {
      s.x.push_back(p[0]);
      s.mean.push_back(p[1]);
      s.std.push_back(p[2]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string RenderSvg(const Series& s) {
  double xlo = s.x.empty() ? 0 : *std::min_element(s.x.begin(), s.x.end());
  double xhi = s.x.empty() ? 1 : *std::max_element(s.x.begin(), s.x.end());
  double ylo = 0, yhi = 1;
  if (!s.mean.empty()) {
    ylo = s.mean[0] - s.std[0];
    yhi = s.mean[0] + s.std[0];
    for (std::size_t i = 0; i < s.mean.size(); ++i) {
      ylo = std::min(ylo, s.mean[i] - s.std[i]);
      yhi = std::max(yhi, s.mean[i] + s.std[i]);
    }
  }
  const Axis ax = Padded(xlo, xhi), ay = Padded(ylo, yhi);
  auto px = [&](double v) { return ax.Map(v, kLeft, kWidth - kRight); };
  auto py = [&](double v) { return ay.Map(v, kHeight - kBottom, kTop); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{3}: {4}</text>\n",
      kWidth, kHeight, F(kWidth / 2), s.sweep_kind, s.metric);
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", F(kLeft),
                     F(kHeight - kBottom), F(kWidth - kRight));
  svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", F(kLeft), F(kTop),
                     F(kHeight - kBottom));
  for (int t = 0; t <= 4; ++t) {
    const double xv = ax.lo + (ax.hi - ax.lo) * t / 4;
    const double yv = ay.lo + (ay.hi - ay.lo) * t / 4;
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{:.3g}</text>\n",
        F(px(xv)), F(kHeight - kBottom + 18), xv);
    svg += fmt::format(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n",
        F(kLeft - 6), F(py(yv) + 4), yv);
    svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#dddddd\"/>\n", F(kLeft),
                       F(py(yv)), F(kWidth - kRight));
  }
  svg += fmt::format(
      "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">point</text>\n",
      F(kWidth / 2), F(kHeight - 10));
  if (!s.x.empty()) {
    std::string band, line;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      band += fmt::format("{},{} ", F(px(s.x[i])), F(py(s.mean[i] + s.std[i])));
    for (std::size_t i = s.x.size(); i-- > 0;)
      band += fmt::format("{},{} ", F(px(s.x[i])), F(py(s.mean[i] - s.std[i])));
    for (std::size_t i = 0; i < s.x.size(); ++i)
      line += fmt::format("{},{} ", F(px(s.x[i])), F(py(s.mean[i])));
    band.pop_back();
    line.pop_back();
    svg += fmt::format("<polygon points=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\"/>\n", band);
    svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n", line);
    for (std::size_t i = 0; i < s.x.size(); ++i)
      svg += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#1f77b4\"/>\n", F(px(s.x[i])),
                         F(py(s.mean[i])));
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<std::string> WriteReport(const std::vector<std::string>& csv_paths, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> written;
  for (const auto& path : csv_paths) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read result CSV '" + path + "'");
    for (const auto& s : ReadSeries(in)) {
      const auto file = (std::filesystem::path(out_dir) / (s.sweep_kind + "_" + s.metric + ".svg")).string();
      std::ofstream out(file, std::ios::binary);
      out << RenderSvg(s);
      if (!out) throw ConfigError("cannot write '" + file + "'");
      written.push_back(file);
    }
  }
  return written;
}

}  // namespace mfhlab::cli
