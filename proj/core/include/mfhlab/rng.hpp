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
#include <initializer_list>
#include <random>

namespace mfhlab {

using Rng = std::mt19937_64;

// Pipeline stages used as substream keys. Adding a stage never perturbs the
// streams of existing ones.
enum class Stage : std::uint64_t {
  kDelta = 1,
  kTrainData = 2,
  kTestData = 3,
  kStudentInit = 4,
  kTeacherInit = 5,
  kJointInit = 6,
  kRanking = 7,
  kRandomNullify = 8,
  kRerun = 9,
  kTheoryData = 10,
};

// splitmix64 finalizer.
std::uint64_t Mix(std::uint64_t x);

// Derives an independent 64-bit seed from a master seed and a key path.
std::uint64_t DeriveSeed(std::uint64_t master,
                         std::initializer_list<std::uint64_t> keys);

inline std::uint64_t Key(Stage s) { return static_cast<std::uint64_t>(s); }

inline Rng MakeRng(std::uint64_t master,
                   std::initializer_list<std::uint64_t> keys) {
  return Rng(DeriveSeed(master, keys));
}

}  // namespace mfhlab
