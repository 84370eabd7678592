// Copyright 2026 The ctm Authors.
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

// ctm: command-line runner for conformal test martingale experiments.
//
//   ctm simulate   --seed 1 --horizon 50 --reps 100 --alt changepoint --out run
//   ctm validate   --config null.json
//   ctm optimality --horizon 5 --alt markov --set p01=0.1 --set p10=0.1
//   ctm eprocess   --alt iid --set data="bits.txt"
//
// Flags override keys of the --config JSON object. Exit status: 0 all checks
// passed, 2 a statistical or exactness check failed, 1 usage/runtime error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctm/ctm.h"
#include "json.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> reps;
  std::optional<std::string> alt;
  std::optional<std::string> measure;
  std::optional<std::string> bettor;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Flat JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--horizon", o.horizon, "Number of steps N");
  cmd->add_option("--reps", o.reps, "Number of replicates R");
  cmd->add_option("--alt", o.alt, "Alternative: changepoint | markov | iid | point_mass | table");
  cmd->add_option("--measure", o.measure, "Conformity measure: identity | neg_distance_to_mean");
  cmd->add_option("--bettor", o.bettor, "Bettor: bayes_kelly | shrunk | constant");
  cmd->add_option("--out", o.out, "Output path prefix (writes <out>.csv / <out>.json)");
  cmd->add_option("--set", o.sets, "Any config key as key=value (value parsed as JSON if possible)");
  cmd->add_flag("--quiet", o.quiet, "Do not print the summary");
}

nlohmann::json build_config(const Overrides& o) {
  nlohmann::json config = nlohmann::json::object();
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    config = nlohmann::json::parse(in);
    if (!config.is_object()) throw std::runtime_error("config file must hold a JSON object");
  }
  for (const std::string& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw std::runtime_error("--set expects key=value, got '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    try {
      config[key] = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      config[key] = value;
    }
  }
  if (o.seed) config["seed"] = *o.seed;
  if (o.horizon) config["horizon"] = *o.horizon;
  if (o.reps) config["reps"] = *o.reps;
  if (o.alt) config["alt"] = *o.alt;
  if (o.measure) config["measure"] = *o.measure;
  if (o.bettor) config["bettor"] = *o.bettor;
  if (o.out) config["out"] = *o.out;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal test martingales: simulation, validity and optimality checks"};
  app.require_subcommand(1);
  Overrides overrides;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Run replicates and write per-step trajectories"},
      {"validate", "Check p-value uniformity and wealth calibration under the null"},
      {"optimality", "Certify Bayes-Kelly log-optimality by exact enumeration"},
      {"eprocess", "Binary maximum-likelihood e-process and the continuous-data failure case"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), overrides);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  nlohmann::json config;
  try {
    config = build_config(overrides);
  } catch (const std::exception& e) {
    std::cerr << "ctm: " << e.what() << "\n";
    return 1;
  }

  ctm_report* report = nullptr;
  if (ctm_run_command(command.c_str(), config.dump().c_str(), &report) != CTM_OK) {
    std::cerr << "ctm " << command << ": " << ctm_last_error() << "\n";
    return 1;
  }
  if (!overrides.quiet) std::cout << ctm_report_summary(report) << "\n";
  const int code = ctm_report_exit_code(report);
  ctm_report_free(report);
  if (code != 0) std::cerr << "ctm " << command << ": check failed (exit " << code << ")\n";
  return code;
}
