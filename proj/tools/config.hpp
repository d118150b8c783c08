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

// YAML run configuration. Keys are flat dotted paths ("gd.max_iters"); nested
// maps are flattened to the same paths. Unknown keys are errors.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfhlab/experiments.hpp"

namespace mfhlab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Spec for the `gen` command.
struct GenConfig {
  int d1 = 25;
  int d2 = 50;
  int d = 20;
  std::vector<int> j1 = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> j2 = {6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
  std::vector<double> delta;  // empty: drawn from the seed
  int n = 200;

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

struct AppConfig {
  std::optional<std::uint64_t> seed;  // unset: MFHLAB_SEED, then 7
  experiments::SweepConfig sweep;
  experiments::TheoremBatchConfig theorem;
  GenConfig gen;

  friend bool operator==(const AppConfig&, const AppConfig&) = default;
};

inline constexpr std::uint64_t kDefaultSeed = 7;

AppConfig ParseConfig(const std::string& text);
AppConfig LoadConfig(const std::string& path);
// Every key with its effective value; ParseConfig(DumpConfig(c)) == c.
std::string DumpConfig(const AppConfig& config);
std::vector<std::string> ConfigKeys();

// --seed, then the config file, then MFHLAB_SEED, then kDefaultSeed.
std::uint64_t ResolveSeed(std::optional<std::uint64_t> flag, const AppConfig& config);
std::uint64_t ParseSeed(const std::string& text);

}  // namespace mfhlab::cli
