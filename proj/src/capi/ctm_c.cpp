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

#include "ctm/ctm.h"

#include <cmath>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <vector>

#include "ctm/alternative.hpp"
#include "ctm/bayes_kelly.hpp"
#include "ctm/betting.hpp"
#include "ctm/conformal.hpp"
#include "ctm/eprocess.hpp"
#include "ctm/error.hpp"
#include "ctm/harness.hpp"
#include "ctm/martingale.hpp"
#include "ctm/oracle.hpp"

struct ctm_model {
  ctm::ModelPtr model;
};

struct ctm_bettor {
  std::unique_ptr<ctm::BettingMartingale> bettor;
  ctm::Wealth wealth;
};

struct ctm_martingale {
  ctm::ConformalTestMartingale impl;
};

struct ctm_report {
  ctm::harness::Report report;
  std::string summary;
};

namespace {

thread_local std::string last_error;

// Runs f, translating exceptions into status codes and the thread's last
// error message.
template <typename F>
int guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return CTM_OK;
  } catch (const ctm::CostGuard& e) {
    last_error = e.what();
    return CTM_ERR_COST_GUARD;
  } catch (const ctm::InvalidArgument& e) {
    last_error = e.what();
    return CTM_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return CTM_ERR_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return CTM_ERR_RUNTIME;
  } catch (...) {
    last_error = "unknown error";
    return CTM_ERR_RUNTIME;
  }
}

int null_pointer(const char* what) {
  last_error = std::string(what) + " is NULL";
  return CTM_ERR_NULL_POINTER;
}

ctm::ConformityMeasure to_measure(ctm_measure m) {
  switch (m) {
    case CTM_MEASURE_IDENTITY:
      return ctm::ConformityMeasure::identity();
    case CTM_MEASURE_NEG_DISTANCE_TO_MEAN:
      return ctm::ConformityMeasure::neg_distance_to_mean();
  }
  throw ctm::InvalidArgument("unknown conformity measure code " + std::to_string(m));
}

int make_model(ctm::ModelPtr model, ctm_model** out) {
  *out = new ctm_model{std::move(model)};
  return CTM_OK;
}

}  // namespace

extern "C" {

const char* ctm_version(void) { return "1.0.0"; }

const char* ctm_last_error(void) { return last_error.c_str(); }

int ctm_score_window(ctm_measure measure, const double* window, size_t n, double* scores_out) {
  if (!window || !scores_out) return null_pointer("window or scores_out");
  return guarded([&] {
    const auto scores = ctm::score_window(to_measure(measure), std::span<const double>(window, n));
    std::copy(scores.begin(), scores.end(), scores_out);
  });
}

int ctm_pvalue(const double* scores, size_t n, double tau, ctm_pvalue_record* out) {
  if (!scores || !out) return null_pointer("scores or out");
  return guarded([&] {
    const ctm::PValueRecord r = ctm::pvalue_step(std::span<const double>(scores, n), tau);
    *out = ctm_pvalue_record{r.n, r.n_star, r.n_upper, r.tau, r.p};
  });
}

int ctm_model_changepoint(double pi0, double pi1, double rho, ctm_model** out) {
  if (!out) return null_pointer("out");
  return guarded([&] { make_model(ctm::changepoint_model(pi0, pi1, rho), out); });
}

int ctm_model_markov(double p01, double p10, double init1, ctm_model** out) {
  if (!out) return null_pointer("out");
  return guarded([&] { make_model(ctm::markov_model(p01, p10, init1), out); });
}

int ctm_model_iid(const double* probs, size_t alphabet_size, ctm_model** out) {
  if (!probs || !out) return null_pointer("probs or out");
  return guarded([&] {
    std::vector<double> p(probs, probs + alphabet_size);
    ctm::check_probability_vector(p, "iid law");
    // The binary case uses the latent-chain form so it can run collapsed.
    make_model(alphabet_size == 2 ? ctm::bernoulli_model(p[1]) : ctm::iid_model(p), out);
  });
}

int ctm_model_markov_table(const double* initial, const double* transition, size_t alphabet_size,
                           ctm_model** out) {
  if (!initial || !transition || !out) return null_pointer("initial, transition or out");
  return guarded([&] {
    std::vector<std::vector<double>> rows(alphabet_size);
    for (size_t i = 0; i < alphabet_size; ++i) {
      rows[i].assign(transition + i * alphabet_size, transition + (i + 1) * alphabet_size);
    }
    make_model(ctm::markov_table_model(std::vector<double>(initial, initial + alphabet_size),
                                       std::move(rows)),
               out);
  });
}

int ctm_model_point_mass(const int* sequence, size_t length, size_t alphabet_size,
                         ctm_model** out) {
  if ((!sequence && length > 0) || !out) return null_pointer("sequence or out");
  return guarded([&] {
    std::vector<ctm::Symbol> seq(sequence, sequence + length);
    make_model(ctm::point_mass_model(std::move(seq), alphabet_size), out);
  });
}

int ctm_model_alphabet_size(const ctm_model* model, size_t* out) {
  if (!model || !out) return null_pointer("model or out");
  *out = model->model->alphabet_size();
  return CTM_OK;
}

int ctm_model_conditional(const ctm_model* model, const int* prefix, size_t length,
                          double* probs_out, size_t capacity) {
  if (!model || (!prefix && length > 0) || !probs_out) return null_pointer("argument");
  const size_t m = model->model->alphabet_size();
  if (capacity < m) {
    last_error = "capacity below alphabet size";
    return CTM_ERR_BUFFER_TOO_SMALL;
  }
  return guarded([&] {
    for (size_t i = 0; i < length; ++i) {
      if (prefix[i] < 0 || static_cast<size_t>(prefix[i]) >= m) {
        throw ctm::InvalidArgument("prefix symbol outside the alphabet");
      }
    }
    const auto probs = model->model->conditional(std::span<const int>(prefix, length));
    std::copy(probs.begin(), probs.end(), probs_out);
  });
}

void ctm_model_free(ctm_model* model) { delete model; }

int ctm_bettor_bayes_kelly(const ctm_model* model, ctm_measure measure, int allow_collapsed,
                           ctm_bettor** out) {
  if (!model || !out) return null_pointer("model or out");
  return guarded([&] {
    auto bettor = ctm::bayes_kelly_bettor(model->model, to_measure(measure),
                                          ctm::Alphabet(model->model->alphabet_size()),
                                          allow_collapsed != 0);
    *out = new ctm_bettor{std::move(bettor), {}};
  });
}

int ctm_bettor_shrunk(const double* heights, const size_t* cells, size_t entries,
                      ctm_bettor** out) {
  if (!heights || !cells || !out) return null_pointer("heights, cells or out");
  return guarded([&] {
    std::vector<ctm::PiecewiseDensity> table;
    size_t offset = 0;
    for (size_t i = 0; i < entries; ++i) {
      table.emplace_back(std::vector<double>(heights + offset, heights + offset + cells[i]));
      offset += cells[i];
    }
    *out = new ctm_bettor{ctm::shrunk_alternative_bettor(std::move(table)), {}};
  });
}

int ctm_bettor_density(ctm_bettor* bettor, double* heights_out, size_t capacity, size_t* cells) {
  if (!bettor || !cells) return null_pointer("bettor or cells");
  int status = CTM_OK;
  const int rc = guarded([&] {
    const ctm::PiecewiseDensity& d = bettor->bettor->next_density();
    *cells = d.cells();
    if (heights_out == nullptr || capacity < d.cells()) {
      status = CTM_ERR_BUFFER_TOO_SMALL;
      return;
    }
    std::copy(d.heights().begin(), d.heights().end(), heights_out);
  });
  if (rc != CTM_OK) return rc;
  if (status != CTM_OK) last_error = "heights buffer too small";
  return status;
}

int ctm_bettor_observe(ctm_bettor* bettor, double p, double* factor_out) {
  if (!bettor) return null_pointer("bettor");
  return guarded([&] {
    const double factor = bettor->bettor->next_density().evaluate(p);
    bettor->bettor->observe(p);
    bettor->wealth.apply(factor);
    if (factor_out) *factor_out = factor;
  });
}

int ctm_bettor_log_wealth(const ctm_bettor* bettor, double* out) {
  if (!bettor || !out) return null_pointer("bettor or out");
  *out = bettor->wealth.log();
  return CTM_OK;
}

void ctm_bettor_free(ctm_bettor* bettor) { delete bettor; }

int ctm_martingale_create(ctm_measure measure, const ctm_bettor* bettor, ctm_martingale** out) {
  if (!bettor || !out) return null_pointer("bettor or out");
  return guarded([&] {
    *out = new ctm_martingale{
        ctm::ConformalTestMartingale(to_measure(measure), bettor->bettor->clone())};
  });
}

int ctm_martingale_step(ctm_martingale* m, double z, double tau, ctm_step_result* out) {
  if (!m || !out) return null_pointer("martingale or out");
  return guarded([&] {
    const ctm::TrajectoryStep s = m->impl.step(z, tau);
    out->record = ctm_pvalue_record{s.record.n, s.record.n_star, s.record.n_upper, s.record.tau,
                                    s.record.p};
    out->factor = s.factor;
    out->wealth = s.wealth.linear();
    out->log_wealth = s.wealth.log();
  });
}

void ctm_martingale_free(ctm_martingale* m) { delete m; }

int ctm_ml_sup(size_t n, size_t k, double* out) {
  if (!out) return null_pointer("out");
  return guarded([&] { *out = ctm::ml_sup(n, k); });
}

int ctm_eprocess_value(const ctm_model* model, const int* bits, size_t n, double* out) {
  if (!model || (!bits && n > 0) || !out) return null_pointer("argument");
  return guarded([&] {
    ctm::EProcessState state;
    for (size_t i = 0; i < n; ++i) state = ctm::eprocess_step(state, bits[i], *model->model);
    *out = state.value();
  });
}

int ctm_empirical_ml(const double* data, size_t n, double* value_out, double* log_value_out) {
  if (!data) return null_pointer("data");
  return guarded([&] {
    const ctm::EmpiricalMl ml = ctm::empirical_ml(std::span<const double>(data, n));
    if (value_out) *value_out = ml.value;
    if (log_value_out) *log_value_out = ml.log_value;
  });
}

int ctm_certify_optimality(const ctm_model* model, ctm_measure measure, size_t horizon,
                           size_t rivals, uint64_t seed, ctm_certificate* out) {
  if (!model || !out) return null_pointer("model or out");
  return guarded([&] {
    const auto c = ctm::oracle::certify_optimality(
        *model->model, to_measure(measure), ctm::Alphabet(model->model->alphabet_size()), horizon,
        rivals, seed);
    *out = ctm_certificate{c.horizon, c.expected_log_wealth, c.kl,
                           c.abs_difference, c.max_rival, c.rivals,
                           c.q_mass_total, c.identity_holds ? 1 : 0, c.dominance_holds ? 1 : 0};
  });
}

int ctm_run_command(const char* command, const char* config_json, ctm_report** out) {
  if (!command || !config_json || !out) return null_pointer("command, config_json or out");
  return guarded([&] {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::parse_error& e) {
      throw ctm::InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    const auto config = ctm::harness::ExperimentConfig::from_json(parsed);
    auto report = std::make_unique<ctm_report>();
    report->report = ctm::harness::run_command(command, config);
    report->summary = report->report.summary.dump(2);
    *out = report.release();
  });
}

int ctm_report_exit_code(const ctm_report* report) {
  return report ? report->report.exit_code : ctm::harness::kExitUsage;
}

const char* ctm_report_summary(const ctm_report* report) {
  return report ? report->summary.c_str() : "";
}

void ctm_report_free(ctm_report* report) { delete report; }

}  // extern "C"
