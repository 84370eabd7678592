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

#include "ctm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "ctm/bayes_kelly.hpp"
#include "ctm/eprocess.hpp"
#include "ctm/error.hpp"
#include "ctm/martingale.hpp"
#include "ctm/oracle.hpp"
#include "ctm/rng.hpp"
#include "ctm/stats.hpp"

namespace ctm::harness {

using nlohmann::json;

namespace {

constexpr double kKsThreshold = 0.001;
constexpr double kLag1Threshold = 0.02;
constexpr double kWealthSeThreshold = 4.0;
constexpr std::size_t kMinPooledPValues = 1000;
constexpr std::size_t kMaxOptimalityHorizon = 6;
constexpr double kEvariableSlack = 1e-12;
constexpr std::uint64_t kExample1Stream = 0xE1;

// JSON has no infinities; those travel as strings.
json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::size_t get_count(const json& v) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw InvalidArgument("expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

double get_real(const json& v) {
  if (!v.is_number()) throw InvalidArgument("expected a number");
  return v.get<double>();
}

std::string get_string(const json& v) {
  if (!v.is_string()) throw InvalidArgument("expected a string");
  return v.get<std::string>();
}

std::vector<double> get_reals(const json& v) {
  if (!v.is_array()) throw InvalidArgument("expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_real(x));
  return out;
}

std::vector<std::vector<double>> get_matrix(const json& v) {
  if (!v.is_array()) throw InvalidArgument("expected an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : v) out.push_back(get_reals(row));
  return out;
}

void assign(ExperimentConfig& c, const std::string& key, const json& v) {
  if (key == "seed") {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                   v.get<std::int64_t>() < 0)) {
      throw InvalidArgument("expected a nonnegative integer");
    }
    c.seed = v.get<std::uint64_t>();
  } else if (key == "horizon") {
    c.horizon = get_count(v);
  } else if (key == "reps") {
    c.reps = get_count(v);
  } else if (key == "threads") {
    c.threads = get_count(v);
  } else if (key == "alphabet") {
    c.alphabet = get_count(v);
  } else if (key == "source") {
    c.source = get_string(v);
  } else if (key == "data") {
    c.data = get_string(v);
  } else if (key == "null") {
    c.null_law = get_string(v);
  } else if (key == "null_theta") {
    c.null_theta = get_real(v);
  } else if (key == "null_probs") {
    c.null_probs = get_reals(v);
  } else if (key == "null_mean") {
    c.null_mean = get_real(v);
  } else if (key == "null_sd") {
    c.null_sd = get_real(v);
  } else if (key == "alt") {
    c.alt = get_string(v);
  } else if (key == "pi0") {
    c.pi0 = get_real(v);
  } else if (key == "pi1") {
    c.pi1 = get_real(v);
  } else if (key == "rho") {
    c.rho = get_real(v);
  } else if (key == "p01") {
    c.p01 = get_real(v);
  } else if (key == "p10") {
    c.p10 = get_real(v);
  } else if (key == "init1") {
    c.init1 = get_real(v);
  } else if (key == "theta") {
    c.theta = get_real(v);
  } else if (key == "alt_probs") {
    c.alt_probs = get_reals(v);
  } else if (key == "alt_sequence") {
    c.alt_sequence.clear();
    if (!v.is_array()) throw InvalidArgument("expected an array of symbols");
    for (const auto& x : v) c.alt_sequence.push_back(static_cast<int>(get_count(x)));
  } else if (key == "alt_initial") {
    c.alt_initial = get_reals(v);
  } else if (key == "alt_transition") {
    c.alt_transition = get_matrix(v);
  } else if (key == "measure") {
    c.measure = get_string(v);
  } else if (key == "bettor") {
    c.bettor = get_string(v);
  } else if (key == "density_table") {
    c.density_table = get_matrix(v);
  } else if (key == "collapsed") {
    if (!v.is_boolean()) throw InvalidArgument("expected true or false");
    c.collapsed = v.get<bool>();
  } else if (key == "tau") {
    c.tau = get_string(v);
  } else if (key == "tau_value") {
    c.tau_value = get_real(v);
  } else if (key == "rivals") {
    c.rivals = get_count(v);
  } else if (key == "evariable_max_n") {
    c.evariable_max_n = get_count(v);
  } else if (key == "example1_n") {
    c.example1_n = get_count(v);
  } else if (key == "example1_data") {
    c.example1_data = get_string(v);
  } else if (key == "out") {
    c.out = get_string(v);
  } else {
    throw InvalidArgument("unknown key");
  }
}

template <typename Result>
std::vector<Result> run_parallel(std::size_t count, std::size_t threads,
                                 const std::function<Result(std::size_t)>& task) {
  std::vector<Result> results(count);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        results[i] = task(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

struct Replicate {
  std::vector<TrajectoryStep> steps;
};

class Experiment {
 public:
  explicit Experiment(const ExperimentConfig& config) : config_(config) {
    config_.validate();
    measure_ = config_.make_measure();
    if (config_.alphabet > 0) {
      alphabet_.emplace(config_.make_alphabet());
      model_ = config_.make_model();
    }
    if (!config_.data.empty()) file_data_ = read_observations_file(config_.data);
  }

  const ExperimentConfig& config() const { return config_; }
  const ConformityMeasure& measure() const { return measure_; }
  const ModelPtr& model() const { return model_; }
  const Alphabet& alphabet() const { return *alphabet_; }

  std::vector<double> observations(std::size_t rep, std::size_t count) const {
    if (!config_.data.empty()) {
      if (alphabet_) {
        for (double x : file_data_) {
          if (x != std::floor(x)) throw InvalidArgument("data file has a non-integer symbol");
          alphabet_->check(static_cast<Symbol>(x));
        }
        return alphabet_->to_values(to_symbols(file_data_));
      }
      return file_data_;
    }
    RandomStream rng(config_.seed, Substream::kData, rep);
    std::vector<double> out;
    out.reserve(count);
    if (config_.source == "alt") {
      std::vector<Symbol> prefix;
      for (std::size_t n = 0; n < count; ++n) {
        const Symbol z = draw(model_->conditional(prefix), rng.uniform());
        prefix.push_back(z);
        out.push_back(alphabet_->value(z));
      }
      return out;
    }
    if (config_.null_law == "normal") {
      for (std::size_t n = 0; n < count; ++n) {
        const double u1 = 1.0 - rng.uniform();
        const double u2 = rng.uniform();
        const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
        out.push_back(config_.null_mean + config_.null_sd * g);
      }
      return out;
    }
    std::vector<double> probs = config_.null_law == "bernoulli"
                                    ? std::vector<double>{1.0 - config_.null_theta, config_.null_theta}
                                    : config_.null_probs;
    for (std::size_t n = 0; n < count; ++n) out.push_back(alphabet_->value(draw(probs, rng.uniform())));
    return out;
  }

  TauSource taus(std::size_t rep) const {
    if (config_.tau == "constant") return TauSource::constant(config_.tau_value);
    return TauSource(RandomStream(config_.seed, Substream::kTau, rep));
  }

  Replicate run_replicate(std::size_t rep) const {
    const std::vector<double> data = observations(rep, config_.horizon);
    auto bettor = config_.make_bettor();
    TauSource tau = taus(rep);
    return Replicate{ctm_run(data, measure_, *bettor, tau, config_.horizon)};
  }

  std::vector<Replicate> run_all() const {
    return run_parallel<Replicate>(config_.reps, config_.threads,
                                   [this](std::size_t rep) { return run_replicate(rep); });
  }

 private:
  static Symbol draw(const std::vector<double>& probs, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<Symbol>(i);
    }
    // u landed in the rounding gap at the top; take the last positive symbol.
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0.0) return static_cast<Symbol>(i);
    }
    return 0;
  }

  static std::vector<Symbol> to_symbols(const std::vector<double>& xs) {
    std::vector<Symbol> out;
    out.reserve(xs.size());
    for (double x : xs) out.push_back(static_cast<Symbol>(x));
    return out;
  }

  ExperimentConfig config_;
  ConformityMeasure measure_;
  std::optional<Alphabet> alphabet_;
  ModelPtr model_;
  std::vector<double> file_data_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  out.close();
  if (!out) throw Error("failed writing '" + path + "'");
}

void finish(Report& report, const ExperimentConfig& config, const std::string& csv) {
  if (config.out.empty()) return;
  json outputs;
  if (!csv.empty()) {
    write_text(config.out + ".csv", csv);
    outputs["csv"] = config.out + ".csv";
  }
  outputs["summary"] = config.out + ".json";
  report.summary["outputs"] = outputs;
  write_text(config.out + ".json", report.summary.dump(2) + "\n");
}

std::string trajectory_csv(const std::vector<Replicate>& reps) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (const TrajectoryStep& s : reps[r].steps) {
      out += std::to_string(r);
      out += ',' + std::to_string(s.record.n);
      out += ',' + format_double(s.observation);
      out += ',' + format_double(s.record.tau);
      out += ',' + std::to_string(s.record.n_star);
      out += ',' + std::to_string(s.record.n_upper);
      out += ',' + format_double(s.record.p);
      out += ',' + format_double(s.factor);
      out += ',' + format_double(s.wealth.linear());
      out += ',' + format_double(s.wealth.log10());
      out += '\n';
    }
  }
  return out;
}

double final_log_wealth(const Replicate& r) {
  return r.steps.empty() ? 0.0 : r.steps.back().wealth.log();
}

json header(const std::string& command, const ExperimentConfig& config) {
  json j;
  j["command"] = command;
  j["config"] = config.to_json();
  return j;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw InvalidArgument("bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("config must be a flat JSON object");
  ExperimentConfig c;
  std::vector<std::string> errors;
  for (const auto& [key, value] : j.items()) {
    try {
      assign(c, key, value);
    } catch (const InvalidArgument& e) {
      errors.push_back(key + ": " + e.what());
    } catch (const json::exception& e) {
      errors.push_back(key + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "invalid config";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidArgument(msg);
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["horizon"] = horizon;
  j["reps"] = reps;
  j["alphabet"] = alphabet;
  j["source"] = source;
  j["data"] = data;
  j["null"] = null_law;
  j["null_theta"] = null_theta;
  j["null_probs"] = null_probs;
  j["null_mean"] = null_mean;
  j["null_sd"] = null_sd;
  j["alt"] = alt;
  j["pi0"] = pi0;
  j["pi1"] = pi1;
  j["rho"] = rho;
  j["p01"] = p01;
  j["p10"] = p10;
  j["init1"] = init1;
  j["theta"] = theta;
  j["alt_probs"] = alt_probs;
  j["alt_sequence"] = alt_sequence;
  j["alt_initial"] = alt_initial;
  j["alt_transition"] = alt_transition;
  j["measure"] = measure;
  j["bettor"] = bettor;
  j["density_table"] = density_table;
  j["collapsed"] = collapsed;
  j["tau"] = tau;
  j["tau_value"] = tau_value;
  j["rivals"] = rivals;
  j["evariable_max_n"] = evariable_max_n;
  j["example1_n"] = example1_n;
  j["example1_data"] = example1_data;
  j["out"] = out;
  // threads is deliberately absent: it never changes results.
  return j;
}

void ExperimentConfig::validate() const {
  std::vector<std::string> errors;
  auto check = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) errors.push_back(field + ": " + msg);
  };
  auto attempt = [&](const std::string& field, const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      errors.push_back(field + ": " + e.what());
    }
  };

  check(reps >= 1, "reps", "must be at least 1");
  const bool finite_alphabet = alphabet > 0;
  check(alphabet != 1, "alphabet", "must be 0 (real-valued) or at least 2");
  check(source == "null" || source == "alt", "source", "must be 'null' or 'alt'");
  check(source != "alt" || finite_alphabet, "source", "'alt' needs a finite alphabet");

  if (null_law == "bernoulli") {
    check(alphabet == 2, "null", "bernoulli needs alphabet 2");
    check(null_theta >= 0.0 && null_theta <= 1.0, "null_theta", "must lie in [0,1]");
  } else if (null_law == "categorical") {
    check(finite_alphabet && null_probs.size() == alphabet, "null_probs",
          "needs one probability per symbol");
    attempt("null_probs", [&] { check_probability_vector(null_probs, "null_probs"); });
  } else if (null_law == "normal") {
    check(!finite_alphabet, "null", "normal needs alphabet 0 (real-valued)");
    check(std::isfinite(null_mean), "null_mean", "must be finite");
    check(std::isfinite(null_sd) && null_sd > 0.0, "null_sd", "must be positive");
  } else {
    errors.push_back("null: must be bernoulli, categorical or normal");
  }

  attempt("measure", [&] { (void)make_measure(); });

  if (finite_alphabet) {
    attempt("alt", [&] {
      const ModelPtr m = make_model();
      if (m->alphabet_size() != alphabet) {
        throw InvalidArgument("model alphabet size " + std::to_string(m->alphabet_size()) +
                              " differs from alphabet " + std::to_string(alphabet));
      }
    });
  }

  if (bettor == "bayes_kelly") {
    check(finite_alphabet, "bettor", "bayes_kelly needs a finite alphabet");
  } else if (bettor == "shrunk") {
    check(!density_table.empty(), "density_table", "shrunk bettor needs a density table");
    attempt("density_table", [&] {
      std::vector<PiecewiseDensity> table;
      for (const auto& row : density_table) table.emplace_back(row);
      ShrunkAlternativeBettor probe(std::move(table));
    });
  } else if (bettor != "constant") {
    errors.push_back("bettor: must be bayes_kelly, shrunk or constant");
  }

  check(tau == "uniform" || tau == "constant", "tau", "must be 'uniform' or 'constant'");
  check(tau_value >= 0.0 && tau_value <= 1.0, "tau_value", "must lie in [0,1]");
  check(evariable_max_n <= oracle::kMaxEvariableHorizon, "evariable_max_n",
        "must be at most " + std::to_string(oracle::kMaxEvariableHorizon));
  check(example1_n >= 1, "example1_n", "must be at least 1");

  if (!errors.empty()) {
    std::string msg = "invalid config";
    for (const auto& e : errors) msg += "\n  " + e;
    throw InvalidArgument(msg);
  }
}

ModelPtr ExperimentConfig::make_model() const {
  if (alt == "changepoint") return changepoint_model(pi0, pi1, rho);
  if (alt == "markov") return markov_model(p01, p10, init1);
  if (alt == "iid") {
    if (alt_probs.empty()) return bernoulli_model(theta);
    return iid_model(alt_probs);
  }
  if (alt == "point_mass") {
    return point_mass_model(std::vector<Symbol>(alt_sequence.begin(), alt_sequence.end()),
                            alphabet);
  }
  if (alt == "table") return markov_table_model(alt_initial, alt_transition);
  throw InvalidArgument("unknown alternative '" + alt +
                        "' (changepoint, markov, iid, point_mass, table)");
}

Alphabet ExperimentConfig::make_alphabet() const {
  if (alphabet == 0) throw InvalidArgument("real-valued observations have no finite alphabet");
  return Alphabet(alphabet);
}

ConformityMeasure ExperimentConfig::make_measure() const {
  return ConformityMeasure::parse(measure);
}

std::unique_ptr<BettingMartingale> ExperimentConfig::make_bettor() const {
  if (bettor == "bayes_kelly") {
    return bayes_kelly_bettor(make_model(), make_measure(), make_alphabet(), collapsed);
  }
  if (bettor == "shrunk") {
    std::vector<PiecewiseDensity> table;
    for (const auto& row : density_table) table.emplace_back(row);
    return shrunk_alternative_bettor(std::move(table));
  }
  if (bettor == "constant") return constant_bettor();
  throw InvalidArgument("unknown bettor '" + bettor + "'");
}

Report run_simulate(const ExperimentConfig& config) {
  const Experiment experiment(config);
  const std::vector<Replicate> reps = experiment.run_all();
  const std::string csv = trajectory_csv(reps);

  std::vector<double> final_wealth, final_log10, final_log;
  std::size_t zero = 0;
  for (const Replicate& r : reps) {
    const double lw = final_log_wealth(r);
    final_log.push_back(lw);
    final_log10.push_back(lw / std::numbers::ln10);
    final_wealth.push_back(std::exp(lw));
    if (std::isinf(lw)) ++zero;
  }
  const auto wealth = stats::mean_se(final_wealth);
  const auto log10w = stats::mean_se(final_log10);
  const auto logw = stats::mean_se(final_log);

  Report report;
  report.summary = header("simulate", config);
  json q;
  for (double level : {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0}) {
    char key[16];
    std::snprintf(key, sizeof key, "q%02d", static_cast<int>(std::lround(level * 100)));
    q[key] = num(stats::quantile(final_wealth, level));
  }
  report.summary["final_wealth"] = {{"mean", num(wealth.mean)}, {"se", num(wealth.se)},
                                    {"quantiles", q}};
  report.summary["final_log10_wealth"] = {{"mean", num(log10w.mean)}, {"se", num(log10w.se)}};
  report.summary["final_log_wealth"] = {{"mean", num(logw.mean)}, {"se", num(logw.se)}};
  report.summary["zero_wealth_reps"] = zero;

  std::istringstream in(csv);
  const std::string audit = audit_trajectory(in);
  report.summary["audit_ok"] = audit.empty();
  if (!audit.empty()) {
    report.summary["audit_error"] = audit;
    report.exit_code = kExitCheckFailed;
  }
  finish(report, config, csv);
  return report;
}

Report run_validate(const ExperimentConfig& config) {
  if (config.reps * config.horizon < kMinPooledPValues) {
    throw InvalidArgument("validate needs reps * horizon >= " + std::to_string(kMinPooledPValues) +
                          " pooled p-values (got " + std::to_string(config.reps * config.horizon) +
                          "); raise --reps or --horizon");
  }
  const Experiment experiment(config);
  const std::vector<Replicate> reps = experiment.run_all();

  std::vector<double> pooled;
  std::vector<std::pair<double, double>> lag1;
  std::vector<double> final_wealth;
  pooled.reserve(config.reps * config.horizon);
  for (const Replicate& r : reps) {
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      pooled.push_back(r.steps[i].record.p);
      if (i > 0) lag1.emplace_back(r.steps[i - 1].record.p, r.steps[i].record.p);
    }
    final_wealth.push_back(std::exp(final_log_wealth(r)));
  }
  const stats::KsResult ks = stats::ks_uniform(pooled);
  const double r1 = stats::pearson(lag1);
  const stats::MeanSe wealth = stats::mean_se(final_wealth);
  const double z = wealth.se > 0.0 ? (wealth.mean - 1.0) / wealth.se
                                   : (wealth.mean == 1.0 ? 0.0 : INFINITY);

  const bool ks_ok = ks.p_value > kKsThreshold;
  const bool lag_ok = std::fabs(r1) < kLag1Threshold;
  const bool wealth_ok = std::fabs(z) <= kWealthSeThreshold;

  Report report;
  report.summary = header("validate", config);
  report.summary["pooled_pvalues"] = pooled.size();
  report.summary["ks"] = {{"statistic", num(ks.statistic)},
                          {"p_value", num(ks.p_value)},
                          {"threshold", kKsThreshold},
                          {"pass", ks_ok}};
  report.summary["lag1_correlation"] = {
      {"r", num(r1)}, {"threshold", kLag1Threshold}, {"pass", lag_ok}};
  report.summary["final_wealth"] = {{"mean", num(wealth.mean)},
                                    {"se", num(wealth.se)},
                                    {"z", num(z)},
                                    {"threshold_se", kWealthSeThreshold},
                                    {"pass", wealth_ok}};
  const bool pass = ks_ok && lag_ok && wealth_ok;
  report.summary["pass"] = pass;
  if (!pass) report.exit_code = kExitCheckFailed;
  finish(report, config, "");
  return report;
}

Report run_optimality(const ExperimentConfig& config) {
  if (config.horizon > kMaxOptimalityHorizon) {
    throw CostGuard("optimality is exact enumeration; horizon must be at most " +
                    std::to_string(kMaxOptimalityHorizon));
  }
  if (config.alphabet == 0) throw InvalidArgument("optimality needs a finite alphabet");
  const Experiment experiment(config);
  const oracle::OptimalityCertificate cert =
      oracle::certify_optimality(*experiment.model(), experiment.measure(), experiment.alphabet(),
                                 config.horizon, config.rivals, config.seed);
  Report report;
  report.summary = header("optimality", config);
  report.summary["model"] = experiment.model()->describe();
  report.summary["expected_log_wealth"] = num(cert.expected_log_wealth);
  report.summary["expected_log10_wealth"] = num(cert.expected_log_wealth / std::numbers::ln10);
  report.summary["kl"] = num(cert.kl);
  report.summary["kl_log10"] = num(cert.kl / std::numbers::ln10);
  report.summary["abs_difference"] = num(cert.abs_difference);
  report.summary["identity_tolerance"] = oracle::kIdentityTolerance;
  report.summary["identity_pass"] = cert.identity_holds;
  report.summary["rivals"] = cert.rivals;
  report.summary["max_rival_expected_log_wealth"] = num(cert.max_rival);
  report.summary["dominance_margin"] = oracle::kDominanceMargin;
  report.summary["dominance_pass"] = cert.dominance_holds;
  report.summary["q_mass_total"] = num(cert.q_mass_total);
  if (!cert.identity_holds || !cert.dominance_holds) report.exit_code = kExitCheckFailed;
  finish(report, config, "");
  return report;
}

Report run_eprocess(const ExperimentConfig& config) {
  if (config.alphabet != 2) throw InvalidArgument("eprocess needs the binary alphabet");
  const Experiment experiment(config);
  const AlternativeModel& q = *experiment.model();

  const std::vector<double> values = experiment.observations(0, config.horizon);
  const std::size_t steps = config.data.empty() ? config.horizon : values.size();
  std::string csv = "n,z,log_q,log_ml_sup,e_value\n";
  EProcessState state;
  json trajectory = json::array();
  for (std::size_t n = 0; n < steps; ++n) {
    const Symbol z = static_cast<Symbol>(values[n]);
    state = eprocess_step(state, z, q);
    const double lml = log_ml_sup(state.n, state.ones);
    csv += std::to_string(state.n) + ',' + std::to_string(z) + ',' + format_double(state.log_q) +
           ',' + format_double(lml) + ',' + format_double(state.value()) + '\n';
    trajectory.push_back(num(state.value()));
  }

  json table = json::array();
  double worst = -INFINITY;
  for (int t = 0; t <= 10; ++t) {
    const double theta = t / 10.0;
    json row;
    row["theta"] = theta;
    json values_by_n = json::array();
    for (std::size_t n = 1; n <= config.evariable_max_n; ++n) {
      const double e = oracle::evariable_expectation(
          [&](std::span<const Symbol> bits) {
            EProcessState s;
            for (Symbol b : bits) s = eprocess_step(s, b, q);
            return s.value();
          },
          theta, n);
      worst = std::max(worst, e);
      values_by_n.push_back(num(e));
    }
    row["expectation_by_n"] = values_by_n;
    table.push_back(row);
  }
  const bool bound_ok = worst <= 1.0 + kEvariableSlack;

  std::vector<double> real_data;
  if (!config.example1_data.empty()) {
    real_data = read_observations_file(config.example1_data);
  } else {
    RandomStream rng(config.seed, Substream::kData, kExample1Stream);
    for (std::size_t i = 0; i < config.example1_n; ++i) {
      const double u1 = 1.0 - rng.uniform();
      const double u2 = rng.uniform();
      real_data.push_back(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
    }
  }
  const EmpiricalMl ml = empirical_ml(real_data);

  Report report;
  report.summary = header("eprocess", config);
  report.summary["model"] = q.describe();
  report.summary["e_values"] = trajectory;
  report.summary["final_e_value"] = num(state.value());
  report.summary["evariable_table"] = table;
  report.summary["evariable_max_expectation"] = num(worst);
  report.summary["evariable_bound_pass"] = bound_ok;
  report.summary["example1"] = {{"n", ml.n},
                                {"distinct", ml.distinct},
                                {"all_distinct", ml.distinct == ml.n},
                                {"empirical_ml", num(ml.value)},
                                {"log_empirical_ml", num(ml.log_value)},
                                {"lower_bound", num(std::exp(ml.log_lower_bound))},
                                {"log_lower_bound", num(ml.log_lower_bound)},
                                {"continuous_likelihood_ratio", num(ml.continuous_ratio)}};
  if (!bound_ok) report.exit_code = kExitCheckFailed;
  finish(report, config, csv);
  return report;
}

Report run_command(const std::string& command, const ExperimentConfig& config) {
  if (command == "simulate") return run_simulate(config);
  if (command == "validate") return run_validate(config);
  if (command == "optimality") return run_optimality(config);
  if (command == "eprocess") return run_eprocess(config);
  throw InvalidArgument("unknown command '" + command +
                        "' (simulate, validate, optimality, eprocess)");
}

std::string audit_trajectory(std::istream& csv) {
  std::string line;
  if (!std::getline(csv, line) || line != kTrajectoryHeader) return "missing or wrong header";
  std::size_t row = 1;
  long current_rep = -1;
  std::size_t expected_n = 0;
  double product = 1.0;
  std::vector<bool> seen;
  while (std::getline(csv, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 10) return "row " + std::to_string(row) + ": expected 10 columns";
    try {
      const long rep = std::stol(cells[0]);
      const std::size_t n = std::stoul(cells[1]);
      const double factor = parse_double(cells[7]);
      const double wealth = parse_double(cells[8]);
      if (rep != current_rep) {
        if (rep < 0) return "row " + std::to_string(row) + ": negative replicate id";
        if (static_cast<std::size_t>(rep) < seen.size() && seen[static_cast<std::size_t>(rep)]) {
          return "row " + std::to_string(row) + ": replicate " + std::to_string(rep) +
                 " is not contiguous";
        }
        if (seen.size() <= static_cast<std::size_t>(rep)) seen.resize(static_cast<std::size_t>(rep) + 1);
        seen[static_cast<std::size_t>(rep)] = true;
        current_rep = rep;
        expected_n = 1;
        product = 1.0;
      }
      if (n != expected_n) return "row " + std::to_string(row) + ": steps out of order";
      ++expected_n;
      product = wealth_update(product, factor);
      const double scale = std::max(std::fabs(product), std::fabs(wealth));
      if (std::fabs(product - wealth) > 1e-9 * scale) {
        return "row " + std::to_string(row) + ": wealth " + cells[8] +
               " is not the running product of factors (" + format_double(product) + ")";
      }
    } catch (const std::exception& e) {
      return "row " + std::to_string(row) + ": " + e.what();
    }
  }
  return "";
}

}  // namespace ctm::harness
