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

#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "config.hpp"
#include "mfhlab/common.hpp"

int main(int argc, char** argv) {
  using mfhlab::cli::CommandOptions;
  CLI::App app{"Synthetic crossmodal distillation laboratory"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.\n"
             "Seed precedence: --seed, config 'seed', MFHLAB_SEED, 7.\n"
             "Run 'mfhlab defaults' for every config key and its default.");

  CommandOptions opts;
  std::string seed_text;
  int jobs = 0;
  int instances = 0;
  struct Help {
    const char* name;
    const char* text;
  };
  const Help commands[] = {
      {"gen", "write a dataset CSV and role sidecar from the gen.* keys"},
      {"sweep-gamma", "teacher/student accuracy over the modality-general ratio"},
      {"sweep-alpha", "teacher/student accuracy over the modality-a-specific ratio"},
      {"table2", "regular vs modality-general teachers at gamma 0.25/0.5/0.75"},
      {"sweep-nullify", "ranked teacher flavors over the nullified-channel ratio"},
      {"rank-eval", "feature-ranking accuracy against ground-truth roles"},
      {"ablate-m", "modality-general distillation over the permutation count M"},
      {"verify-bound", "Monte-Carlo certificates for the distillation-loss bound"},
      {"report", "render result CSVs into SVG charts"},
      {"defaults", "print the default configuration"},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.text);
    sub->add_option("--config", opts.config_path, "YAML config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_text, "master seed (unsigned 64-bit)");
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--jobs", jobs, "worker threads (0: all cores)");
    sub->add_flag("--plot", opts.plot, "also render SVG charts");
    if (std::string(c.name) == "verify-bound")
      sub->add_option("--instances", instances, "number of certificate instances");
    if (std::string(c.name) == "report")
      sub->add_option("inputs", opts.inputs, "result CSV files")->required();
    sub->callback([&opts, sub] { opts.command = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      if (sub->count("--seed") > 0) opts.seed = mfhlab::cli::ParseSeed(seed_text);
      if (sub->count("--jobs") > 0) opts.jobs = jobs;
      if (sub->get_option_no_throw("--instances") != nullptr && sub->count("--instances") > 0)
        opts.instances = instances;
    }
    mfhlab::cli::Execute(opts, std::cout);
  } catch (const mfhlab::NumericalError& e) {
    std::cerr << "numerical failure in stage '" << e.stage() << "': " << e.what() << '\n';
    return 3;
  } catch (const mfhlab::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const mfhlab::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
