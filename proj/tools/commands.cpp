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

#include "commands.hpp"

#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "mfhlab/csv.hpp"
#include "mfhlab/experiments.hpp"
#include "mfhlab/mvd.hpp"
#include "mfhlab/theory.hpp"
#include "report.hpp"

#ifndef MFHLAB_VERSION
#define MFHLAB_VERSION "unknown"
#endif

namespace mfhlab::cli {

namespace fs = std::filesystem;
using experiments::SweepKind;

namespace {

const std::map<std::string, SweepKind>& SweepCommands() {
  static const std::map<std::string, SweepKind> m = {
      {"sweep-gamma", SweepKind::kGamma},
      {"sweep-alpha", SweepKind::kAlpha},
      {"table2", SweepKind::kTable2},
      {"sweep-nullify", SweepKind::kNullifyRatio},
      {"rank-eval", SweepKind::kRankingEval},
      {"ablate-m", SweepKind::kPermutationCount},
  };
  return m;
}

std::string Stem(const std::string& command) {
  std::string s = command;
  for (char& c : s)
    if (c == '-') c = '_';
  return s;
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

template <typename Fn>
void WriteStream(const fs::path& path, Fn fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  fn(out);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

struct Run {
  AppConfig config;
  std::uint64_t seed = 0;
  fs::path out;
  std::string stem;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

// Resolves the effective config and records it before anything is computed.
Run Prepare(const CommandOptions& o) {
  Run r;
  r.config = o.config_path.empty() ? ParseConfig("") : LoadConfig(o.config_path);
  r.seed = ResolveSeed(o.seed, r.config);
  r.config.seed = r.seed;
  if (o.jobs) {
    if (*o.jobs < 0) throw ConfigError("--jobs must be non-negative");
    r.config.sweep.jobs = r.config.theorem.jobs = *o.jobs;
  }
  if (o.instances) {
    if (*o.instances < 1) throw ConfigError("--instances must be at least 1");
    r.config.theorem.instances = *o.instances;
  }
  r.config.sweep.master_seed = r.config.theorem.master_seed = r.seed;
  r.out = o.out_dir;
  r.stem = Stem(o.command);
  fs::create_directories(r.out);
  WriteFile(r.out / (r.stem + ".config.yaml"), DumpConfig(r.config));
  return r;
}

void WriteMeta(const Run& r, const std::string& command, const std::string& recipe,
               const std::vector<std::string>& outputs) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - r.start).count();
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["master_seed"] = r.seed;
  meta["library_version"] = MFHLAB_VERSION;
  meta["wall_time_seconds"] = wall;
  if (!recipe.empty()) meta["recipe"] = recipe;
  meta["outputs"] = outputs;
  nlohmann::ordered_json cfg;
  std::istringstream dump(DumpConfig(r.config));
  for (std::string line; std::getline(dump, line);) {
    const auto colon = line.find(": ");
    cfg[line.substr(0, colon)] = line.substr(colon + 2);
  }
  meta["config"] = cfg;
  WriteFile(r.out / (r.stem + ".meta.json"), meta.dump(2) + "\n");
}

void Gen(const CommandOptions& o, std::ostream& log) {
  Run r = Prepare(o);
  const GenConfig& g = r.config.gen;
  Vector delta(g.d);
  if (g.delta.empty()) {
    Rng rng = MakeRng(r.seed, {0, Key(Stage::kDelta)});
    std::normal_distribution<double> normal;
    for (int i = 0; i < g.d; ++i) delta[i] = normal(rng);
  } else {
    if (static_cast<int>(g.delta.size()) != g.d) throw ConfigError("gen.delta must have length gen.d");
    for (int i = 0; i < g.d; ++i) delta[i] = g.delta[i];
  }
  const auto spec = mvd::MvdSpec::Make(g.d1, g.d2, g.d, g.j1, g.j2, delta);
  Rng rng = MakeRng(r.seed, {0, Key(Stage::kTrainData)});
  const auto data = mvd::Sample(spec, g.n, rng);
  WriteStream(r.out / "dataset.csv", [&](std::ostream& os) { mvd::WriteDatasetCsv(os, data); });
  WriteStream(r.out / "roles.csv", [&](std::ostream& os) { mvd::WriteRolesCsv(os, data); });
  const auto gm = mvd::GammaOf(spec), al = mvd::AlphaOf(spec), be = mvd::BetaOf(spec);
  log << fmt::format("gamma={}/{} alpha={}/{} beta={}/{} n={}\n", gm.num, gm.den, al.num, al.den,
                     be.num, be.den, g.n);
  WriteMeta(r, o.command, "", {"dataset.csv", "roles.csv"});
}

void Sweep(const CommandOptions& o, SweepKind kind, std::ostream& log) {
  Run r = Prepare(o);
  experiments::SweepConfig cfg = r.config.sweep;
  cfg.kind = kind;
  const auto result = experiments::Run(cfg);
  const std::string csv_name = r.stem + ".csv";
  WriteStream(r.out / csv_name, [&](std::ostream& os) { experiments::WriteResultCsv(os, result); });
  std::vector<std::string> outputs = {csv_name};
  if (o.plot)
    for (const auto& f : WriteReport({(r.out / csv_name).string()}, r.out.string()))
      outputs.push_back(fs::path(f).filename().string());
  for (const auto& row : result.rows) {
    log << fmt::format("point {:.4g}:", row.point);
    for (const auto& [name, st] : row.metrics) log << fmt::format(" {}={:.4f}", name, st.mean);
    log << '\n';
  }
  WriteMeta(r, o.command, result.recipe, outputs);
}

void VerifyBoundCommand(const CommandOptions& o, std::ostream& log) {
  Run r = Prepare(o);
  const auto certs = experiments::RunTheoremBatch(r.config.theorem);
  WriteStream(r.out / "certificates.csv", [&](std::ostream& os) {
    theory::WriteCertificateHeader(os);
    for (const auto& c : certs) theory::WriteCertificateRow(os, c);
  });
  int holds = 0;
  for (const auto& c : certs) holds += c.holds ? 1 : 0;
  log << fmt::format("bound holds in {}/{} instances\n", holds, certs.size());
  WriteMeta(r, o.command, "gamma-sweep specs, overlap cycling 0,2,4,6,8", {"certificates.csv"});
}

void ReportCommand(const CommandOptions& o, std::ostream& log) {
  if (o.inputs.empty()) throw ConfigError("report needs at least one result CSV");
  for (const auto& f : WriteReport(o.inputs, o.out_dir)) log << f << '\n';
}

}  // namespace

std::vector<std::string> CommandNames() {
  std::vector<std::string> names = {"gen", "verify-bound", "report", "defaults"};
  for (const auto& [name, kind] : SweepCommands()) names.push_back(name);
  return names;
}

void Execute(const CommandOptions& o, std::ostream& log) {
  if (o.command == "gen") return Gen(o, log);
  if (o.command == "verify-bound") return VerifyBoundCommand(o, log);
  if (o.command == "report") return ReportCommand(o, log);
  if (o.command == "defaults") {
    log << DumpConfig(AppConfig{});
    return;
  }
  auto it = SweepCommands().find(o.command);
  if (it == SweepCommands().end()) throw ConfigError("unknown command '" + o.command + "'");
  Sweep(o, it->second, log);
}

}  // namespace mfhlab::cli
