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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "report.hpp"

namespace mfhlab::cli {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mfhlab_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string(MFHLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Config, EmptyIsDefault) {
  const AppConfig c = ParseConfig("");
  EXPECT_EQ(c, AppConfig{});
  EXPECT_FALSE(c.seed.has_value());
}

TEST(Config, RangeErrorsAreReported) {
  try {
    ParseConfig("rho: 1.5\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rho out of [0,1]"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ParseConfig("rhoo: 0.5\n"), ConfigError);
  EXPECT_THROW(ParseConfig("seeds: many\n"), ConfigError);
  EXPECT_THROW(ParseConfig("gd:\n  learning_rate: -1\n"), ConfigError);
}

TEST(Config, DumpLoadRoundTrip) {
  const AppConfig defaults;
  EXPECT_EQ(ParseConfig(DumpConfig(defaults)), defaults);
  AppConfig custom = ParseConfig(
      "seed: 42\nrho: 0.25\nseeds: 3\nteacher_flavor: ranked-general\n"
      "ranking:\n  specs: [\"30:10\", \"20:5\"]\n  dist: probabilities\n"
      "gen:\n  j1: [0, 2]\n  delta: [1.5, -2, 0.25]\n  d: 3\n  d1: 4\n  d2: 4\n  j2: [1]\n");
  EXPECT_EQ(ParseConfig(DumpConfig(custom)), custom);
  EXPECT_EQ(custom.sweep.ranking_specs.size(), 2u);
}

TEST(Config, SeedPrecedence) {
  AppConfig c;
  ::unsetenv("MFHLAB_SEED");
  EXPECT_EQ(ResolveSeed(std::nullopt, c), kDefaultSeed);
  ::setenv("MFHLAB_SEED", "11", 1);
  EXPECT_EQ(ResolveSeed(std::nullopt, c), 11u);
  c.seed = 12;
  EXPECT_EQ(ResolveSeed(std::nullopt, c), 12u);
  EXPECT_EQ(ResolveSeed(13, c), 13u);
  ::unsetenv("MFHLAB_SEED");
  EXPECT_THROW(ParseSeed("-3"), ConfigError);
}

TEST(Report, DeterministicSvg) {
  std::istringstream in(
      "sweep_kind,point,metric,mean,std,n_seeds\n"
      "gamma,0,teacher_acc,0.9,0.01,10\ngamma,1,teacher_acc,0.91,0.02,10\n"
      "gamma,0,student_kd_acc,0.6,0.03,10\ngamma,1,student_kd_acc,0.7,0.01,10\n");
  const auto series = ReadSeries(in);
  ASSERT_EQ(series.size(), 2u);
  const std::string svg = RenderSvg(series[0]);
  EXPECT_EQ(svg, RenderSvg(series[0]));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST(Cli, ExitCodes) {
  const fs::path dir = TempDir("exit");
  EXPECT_EQ(RunCli("--help"), 0);
  EXPECT_EQ(RunCli("no-such-command"), 2);
  EXPECT_EQ(RunCli("sweep-gamma --bogus"), 2);
  WriteFile(dir / "bad.yaml", "rho: 1.5\n");
  EXPECT_EQ(RunCli("sweep-gamma --config " + (dir / "bad.yaml").string() + " --out " + dir.string()),
            2);
  EXPECT_EQ(RunCli("defaults"), 0);
}

TEST(Cli, VerifyBoundWritesCertificates) {
  const fs::path dir = TempDir("verify");
  ASSERT_EQ(RunCli("verify-bound --instances 4 --seed 7 --out " + dir.string()), 0);
  std::ifstream in(dir / "certificates.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",true"), std::string::npos) << line;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_TRUE(fs::exists(dir / "verify_bound.meta.json"));
  EXPECT_TRUE(fs::exists(dir / "verify_bound.config.yaml"));
}

TEST(Cli, SweepIsByteIdenticalAcrossRuns) {
  const fs::path a = TempDir("sweep_a"), b = TempDir("sweep_b");
  const fs::path cfg = a / "small.yaml";
  WriteFile(cfg, "seeds: 2\nn_train: 50\nn_test: 80\npoints: [0, 10]\ngd:\n  max_iters: 100\n");
  ASSERT_EQ(RunCli("sweep-gamma --seed 7 --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(RunCli("sweep-gamma --seed 7 --jobs 2 --config " + cfg.string() + " --out " +
                   b.string() + " --plot"),
            0);
  const std::string csv = ReadFile(a / "sweep_gamma.csv");
  EXPECT_FALSE(csv.empty());
  EXPECT_EQ(csv, ReadFile(b / "sweep_gamma.csv"));
  EXPECT_TRUE(fs::exists(b / "gamma_student_kd_acc.svg"));
  ASSERT_EQ(RunCli("report " + (a / "sweep_gamma.csv").string() + " --out " + a.string()), 0);
  EXPECT_EQ(ReadFile(a / "gamma_student_kd_acc.svg"), ReadFile(b / "gamma_student_kd_acc.svg"));
}

TEST(Cli, GenRoundTrip) {
  const fs::path dir = TempDir("gen");
  ASSERT_EQ(RunCli("gen --seed 3 --out " + dir.string()), 0);
  const std::string first = ReadFile(dir / "dataset.csv");
  ASSERT_EQ(RunCli("gen --seed 3 --out " + dir.string()), 0);
  EXPECT_EQ(first, ReadFile(dir / "dataset.csv"));
  EXPECT_NE(ReadFile(dir / "roles.csv").find("general-decisive"), std::string::npos);
}

}  // namespace
}  // namespace mfhlab::cli
