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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mfhlab::csv {

// Round-trip exact formatting for doubles.
std::string Num(double v);

std::vector<std::string> SplitRow(std::string_view line);

// Reads the next non-empty line; returns false at end of stream.
bool NextRow(std::istream& is, std::vector<std::string>& fields, int& line_no);

double ParseDouble(const std::string& field, int line_no);
long long ParseInt(const std::string& field, int line_no);

}  // namespace mfhlab::csv
