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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mfhlab::cli {

struct CommandOptions {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<int> jobs;
  bool plot = false;
  std::optional<int> instances;
  std::vector<std::string> inputs;  // report only
};

std::vector<std::string> CommandNames();

// Throws ConfigError / InvalidArgument for bad input and NumericalError for
// failed computations; the caller maps them to exit codes.
void Execute(const CommandOptions& options, std::ostream& log);

}  // namespace mfhlab::cli
