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

#include <gtest/gtest.h>

#include "mfhlab/common.hpp"
#include "properties.hpp"

namespace {

class PropertyTest : public ::testing::TestWithParam<std::string> {};

TEST_P(PropertyTest, HoldsOnHundredCases) {
  const auto r = mfhlab::props::RunProperty(GetParam(), 100, 11);
  EXPECT_EQ(r.cases, 100);
  EXPECT_TRUE(r.ok()) << r.failures << " failures; " << r.first_failure;
}

INSTANTIATE_TEST_SUITE_P(All, PropertyTest, ::testing::ValuesIn(mfhlab::props::PropertyNames()),
                         [](const auto& info) { return info.param; });

TEST(PropertyHarness, UnknownNameThrows) {
  EXPECT_THROW(mfhlab::props::RunProperty("no_such_property"), mfhlab::InvalidArgument);
}

TEST(PropertyHarness, ReportsFirstFailure) {
  const auto r = mfhlab::props::ForAll("odd", 10, 1, [](mfhlab::Rng&, int i) -> std::optional<std::string> {
    if (i % 2) return "odd case";
    return std::nullopt;
  });
  EXPECT_EQ(r.failures, 5);
  EXPECT_EQ(r.first_failure, "case 1: odd case");
}

}  // namespace
