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

#include "mfhlab/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <istream>

#include "mfhlab/common.hpp"

namespace mfhlab::csv {

std::string Num(double v) { return fmt::format("{}", v); }

std::vector<std::string> SplitRow(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
      field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' ||
                              field.back() == '\r'))
      field.remove_suffix(1);
    out.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool NextRow(std::istream& is, std::vector<std::string>& fields, int& line_no) {
  std::string line;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    fields = SplitRow(line);
    return true;
  }
  return false;
}

double ParseDouble(const std::string& field, int line_no) {
  // std::from_chars for double is available in libstdc++ 11.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw InvalidArgument(fmt::format("line {}: bad number '{}'", line_no, field));
  return v;
}

long long ParseInt(const std::string& field, int line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw InvalidArgument(fmt::format("line {}: bad integer '{}'", line_no, field));
  return v;
}

}  // namespace mfhlab::csv
