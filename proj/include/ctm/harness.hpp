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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "ctm/alternative.hpp"
#include "ctm/betting.hpp"
#include "ctm/conformal.hpp"

namespace ctm::harness {

// Process exit codes shared by the CLI and the C API.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitCheckFailed = 2;

inline constexpr const char* kTrajectoryHeader =
    "rep,n,z,tau,n_star,n_upper,p,factor,wealth,log10_wealth";

// Every knob of an experiment. Read from a flat JSON object; unknown keys are
// rejected so typos do not silently fall back to defaults.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::size_t reps = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  // 0 means real-valued observations.
  std::size_t alphabet = 2;

  // Where observations come from: "null", "alt" (sample from the
  // alternative) or a line-delimited file in `data`.
  std::string source = "null";
  std::string data;
  std::string null_law = "bernoulli";  // bernoulli | categorical | normal
  double null_theta = 0.3;
  std::vector<double> null_probs;
  double null_mean = 0.0;
  double null_sd = 1.0;

  std::string alt = "changepoint";  // changepoint | markov | iid | point_mass | table
  double pi0 = 0.5;
  double pi1 = 0.9;
  double rho = 0.2;
  double p01 = 0.1;
  double p10 = 0.1;
  double init1 = 0.5;
  double theta = 0.5;
  std::vector<double> alt_probs;
  std::vector<int> alt_sequence;
  std::vector<double> alt_initial;
  std::vector<std::vector<double>> alt_transition;

  std::string measure = "identity";
  std::string bettor = "bayes_kelly";  // bayes_kelly | shrunk | constant
  std::vector<std::vector<double>> density_table;
  bool collapsed = true;

  std::string tau = "uniform";  // uniform | constant (negative control only)
  double tau_value = 0.5;

  std::size_t rivals = 100;
  std::size_t evariable_max_n = 12;
  std::size_t example1_n = 5;
  std::string example1_data;

  std::string out;  // output path prefix; empty writes nothing

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Collects every field-level problem; throws InvalidArgument listing them.
  void validate() const;

  ModelPtr make_model() const;
  Alphabet make_alphabet() const;
  ConformityMeasure make_measure() const;
  std::unique_ptr<BettingMartingale> make_bettor() const;
};

struct Report {
  nlohmann::json summary;
  int exit_code = kExitOk;
};

Report run_simulate(const ExperimentConfig& config);
Report run_validate(const ExperimentConfig& config);
Report run_optimality(const ExperimentConfig& config);
Report run_eprocess(const ExperimentConfig& config);

// Dispatches on "simulate" | "validate" | "optimality" | "eprocess".
Report run_command(const std::string& command, const ExperimentConfig& config);

// Checks that every replicate's rows are contiguous, ordered by n, and that
// the wealth column is the running product of the factor column (1e-9
// relative). Returns an empty string on success, else the first problem.
std::string audit_trajectory(std::istream& csv);

// Formats a double so that it reads back to the same value.
std::string format_double(double x);

}  // namespace ctm::harness
