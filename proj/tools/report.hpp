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

// SVG line charts (mean with a +-1 std band) rendered from result CSVs.

#include <iosfwd>
#include <string>
#include <vector>

namespace mfhlab::cli {

struct Series {
  std::string sweep_kind;
  std::string metric;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

// Groups rows of a sweep_kind,point,metric,mean,std,n_seeds CSV by
// (sweep_kind, metric), sorted by point.
std::vector<Series> ReadSeries(std::istream& in);

std::string RenderSvg(const Series& series);

// One chart per series of every input; returns the written paths.
std::vector<std::string> WriteReport(const std::vector<std::string>& csv_paths,
                                     const std::string& out_dir);

}  // namespace mfhlab::cli
