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

#include "config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mfhlab/csv.hpp"

namespace mfhlab::cli {

namespace {

using experiments::SweepConfig;

[[noreturn]] void Fail(const YAML::Node& node, const std::string& key, const std::string& what) {
  throw ConfigError(fmt::format("config line {}: {}: {}", node.Mark().line + 1, key, what));
}

template <typename T>
T Scalar(const YAML::Node& node, const std::string& key, const char* type) {
  if (!node.IsScalar()) Fail(node, key, fmt::format("expected a {}", type));
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    Fail(node, key, fmt::format("expected a {}, got '{}'", type, node.Scalar()));
  }
}

template <typename T>
std::vector<T> List(const YAML::Node& node, const std::string& key, const char* type) {
  if (node.IsNull()) return {};
  if (!node.IsSequence()) Fail(node, key, fmt::format("expected a list of {}", type));
  std::vector<T> out;
  for (const auto& item : node) out.push_back(Scalar<T>(item, key, type));
  return out;
}

std::string Join(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out + "]";
}

template <typename T>
std::string ListText(const std::vector<T>& v) {
  std::vector<std::string> items;
  for (const T& x : v) {
    if constexpr (std::is_floating_point_v<T>) {
      items.push_back(csv::Num(x));
    } else {
      items.push_back(fmt::format("{}", x));
    }
  }
  return Join(items);
}

struct Field {
  std::function<void(const YAML::Node&, const std::string&, AppConfig&)> set;
  std::function<std::string(const AppConfig&)> get;
};

// Field helpers over a member accessor.
template <typename Access>
Field IntField(Access access) {
  return {[access](const YAML::Node& n, const std::string& k, AppConfig& c) {
            access(c) = Scalar<int>(n, k, "integer");
          },
          [access](const AppConfig& c) {
            return fmt::format("{}", access(const_cast<AppConfig&>(c)));
          }};
}

template <typename Access>
Field DoubleField(Access access) {
  return {[access](const YAML::Node& n, const std::string& k, AppConfig& c) {
            access(c) = Scalar<double>(n, k, "number");
          },
          [access](const AppConfig& c) { return csv::Num(access(const_cast<AppConfig&>(c))); }};
}

template <typename T, typename Access>
Field ListField(Access access, const char* type) {
  return {[access, type](const YAML::Node& n, const std::string& k, AppConfig& c) {
            access(c) = List<T>(n, k, type);
          },
          [access](const AppConfig& c) { return ListText(access(const_cast<AppConfig&>(c))); }};
}

template <typename Parse, typename Name>
Field EnumField(Parse parse, Name name,
                std::function<decltype(parse(std::string()))&(AppConfig&)> access) {
  return {[parse, access](const YAML::Node& n, const std::string& k, AppConfig& c) {
            const auto text = Scalar<std::string>(n, k, "name");
            try {
              access(c) = parse(text);
            } catch (const InvalidArgument& e) {
              Fail(n, k, e.what());
            }
          },
          [name, access](const AppConfig& c) {
            return std::string(name(access(const_cast<AppConfig&>(c))));
          }};
}

std::pair<int, int> ParseSpecPair(const YAML::Node& n, const std::string& key) {
  const auto text = Scalar<std::string>(n, key, "d:k pair");
  const auto colon = text.find(':');
  int d = 0, k = 0;
  auto parse = [&](std::string_view s, int& v) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
  };
  const std::string_view sv(text);
  if (colon == std::string::npos || !parse(sv.substr(0, colon), d) || !parse(sv.substr(colon + 1), k))
    Fail(n, key, fmt::format("expected 'd:k', got '{}'", text));
  return {d, k};
}

const std::map<std::string, Field>& Fields() {
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    f["seed"] = {[](const YAML::Node& n, const std::string& k, AppConfig& c) {
                   if (n.IsNull()) {
                     c.seed.reset();
                     return;
                   }
                   try {
                     c.seed = ParseSeed(Scalar<std::string>(n, k, "seed"));
                   } catch (const ConfigError& e) {
                     Fail(n, k, e.what());
                   }
                 },
                 [](const AppConfig& c) {
                   return c.seed ? fmt::format("{}", *c.seed) : std::string("~");
                 }};
    f["jobs"] = IntField([](AppConfig& c) -> int& { return c.sweep.jobs; });
    f["points"] = ListField<double>([](AppConfig& c) -> auto& { return c.sweep.points; }, "numbers");
    f["n_train"] = IntField([](AppConfig& c) -> int& { return c.sweep.n_train; });
    f["n_test"] = IntField([](AppConfig& c) -> int& { return c.sweep.n_test; });
    f["rho"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.rho; });
    f["seeds"] = IntField([](AppConfig& c) -> int& { return c.sweep.seeds; });
    f["model"] = EnumField(models::ParseKind, models::KindName,
                           [](AppConfig& c) -> models::ModelKind& { return c.sweep.model; });
    f["hidden"] = IntField([](AppConfig& c) -> int& { return c.sweep.hidden; });
    f["teacher_flavor"] =
        EnumField(experiments::ParseFlavor, experiments::FlavorName,
                  [](AppConfig& c) -> experiments::TeacherFlavor& { return c.sweep.teacher_flavor; });
    f["flavor_ratio"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.flavor_ratio; });
    f["gd.learning_rate"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.gd.learning_rate; });
    f["gd.max_iters"] = IntField([](AppConfig& c) -> int& { return c.sweep.gd.max_iters; });
    f["gd.grad_tol"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.gd.grad_tol; });
    f["gd.prob_clamp"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.gd.prob_clamp; });
    f["subset.d1"] = IntField([](AppConfig& c) -> int& { return c.sweep.subset_d1; });
    f["subset.d2"] = IntField([](AppConfig& c) -> int& { return c.sweep.subset_d2; });
    f["subset.d"] = IntField([](AppConfig& c) -> int& { return c.sweep.subset_d; });
    f["subset.general"] = IntField([](AppConfig& c) -> int& { return c.sweep.subset_general; });
    f["ranking.permutations"] = IntField([](AppConfig& c) -> int& { return c.sweep.permutations; });
    f["ranking.dist"] = EnumField(ranking::ParseDistSpace, ranking::DistSpaceName,
                                  [](AppConfig& c) -> ranking::DistSpace& { return c.sweep.dist; });
    f["ranking.nullify_rho"] = DoubleField([](AppConfig& c) -> double& { return c.sweep.nullify_rho; });
    f["ranking.ablation_ratio"] =
        DoubleField([](AppConfig& c) -> double& { return c.sweep.ablation_ratio; });
    f["ranking.reruns"] = IntField([](AppConfig& c) -> int& { return c.sweep.reruns; });
    f["ranking.n"] = IntField([](AppConfig& c) -> int& { return c.sweep.ranking_n; });
    f["ranking.specs"] = {
        [](const YAML::Node& n, const std::string& k, AppConfig& c) {
          if (!n.IsSequence()) Fail(n, k, "expected a list of 'd:k' pairs");
          c.sweep.ranking_specs.clear();
          for (const auto& item : n) c.sweep.ranking_specs.push_back(ParseSpecPair(item, k));
        },
        [](const AppConfig& c) {
          std::vector<std::string> items;
          for (auto [d, k] : c.sweep.ranking_specs) items.push_back(fmt::format("\"{}:{}\"", d, k));
          return Join(items);
        }};
    f["theorem.instances"] = IntField([](AppConfig& c) -> int& { return c.theorem.instances; });
    f["theorem.n_factor"] = IntField([](AppConfig& c) -> int& { return c.theorem.n_factor; });
    f["theorem.learning_rate"] =
        DoubleField([](AppConfig& c) -> double& { return c.theorem.student_gd.learning_rate; });
    f["theorem.max_iters"] = IntField([](AppConfig& c) -> int& { return c.theorem.student_gd.max_iters; });
    f["theorem.grad_tol"] = DoubleField([](AppConfig& c) -> double& { return c.theorem.student_gd.grad_tol; });
    f["gen.d1"] = IntField([](AppConfig& c) -> int& { return c.gen.d1; });
    f["gen.d2"] = IntField([](AppConfig& c) -> int& { return c.gen.d2; });
    f["gen.d"] = IntField([](AppConfig& c) -> int& { return c.gen.d; });
    f["gen.j1"] = ListField<int>([](AppConfig& c) -> auto& { return c.gen.j1; }, "integers");
    f["gen.j2"] = ListField<int>([](AppConfig& c) -> auto& { return c.gen.j2; }, "integers");
    f["gen.delta"] = ListField<double>([](AppConfig& c) -> auto& { return c.gen.delta; }, "numbers");
    f["gen.n"] = IntField([](AppConfig& c) -> int& { return c.gen.n; });
    return f;
  }();
  return fields;
}

void Walk(const YAML::Node& node, const std::string& prefix, AppConfig& config) {
  for (const auto& entry : node) {
    const std::string name = entry.first.as<std::string>();
    const std::string key = prefix.empty() ? name : prefix + "." + name;
    const YAML::Node& value = entry.second;
    const auto& fields = Fields();
    auto it = fields.find(key);
    if (it == fields.end()) {
      if (value.IsMap()) {
        Walk(value, key, config);
        continue;
      }
      throw ConfigError(fmt::format("config line {}: unknown key '{}'", entry.first.Mark().line + 1, key));
    }
    it->second.set(value, key, config);
  }
}

// Links shared settings and checks ranges; messages name the offending key.
void Finish(AppConfig& c) {
  c.theorem.teacher_gd = c.sweep.gd;
  c.theorem.jobs = c.sweep.jobs;
  try {
    c.sweep.Validate();
    c.theorem.student_gd.Validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (c.theorem.instances < 1) throw ConfigError("theorem.instances must be at least 1");
  if (c.theorem.n_factor < 1) throw ConfigError("theorem.n_factor must be at least 1");
  if (c.gen.n < 1) throw ConfigError("gen.n must be positive");
}

}  // namespace

std::uint64_t ParseSeed(const std::string& text) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || p != text.data() + text.size())
    throw ConfigError(fmt::format("seed must be an unsigned 64-bit integer, got '{}'", text));
  return v;
}

AppConfig ParseConfig(const std::string& text) {
  AppConfig config;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.mark.line + 1, e.msg));
  }
  if (root.IsNull()) {
    Finish(config);
    return config;
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of keys to values");
  Walk(root, "", config);
  Finish(config);
  return config;
}

AppConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str());
}

std::string DumpConfig(const AppConfig& config) {
  std::string out;
  for (const auto& [key, field] : Fields()) out += key + ": " + field.get(config) + "\n";
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [key, field] : Fields()) keys.push_back(key);
  return keys;
}

std::uint64_t ResolveSeed(std::optional<std::uint64_t> flag, const AppConfig& config) {
  if (flag) return *flag;
  if (config.seed) return *config.seed;
  if (const char* env = std::getenv("MFHLAB_SEED"); env != nullptr && *env != '\0')
    return ParseSeed(env);
  return kDefaultSeed;
}

}  // namespace mfhlab::cli
