/* Copyright 2026 The ctm Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to the conformal test martingale library.
 *
 * Every function that can fail returns a ctm_status. On failure a message is
 * available from ctm_last_error() on the calling thread until the next call
 * into the library from that thread. Handles are opaque; each *_create has a
 * matching *_free that accepts NULL. A handle may be moved between threads
 * but must not be used from two threads at once. */

#ifndef CTM_CTM_H_
#define CTM_CTM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CTM_BUILDING_LIBRARY)
#    define CTM_API __declspec(dllexport)
#  else
#    define CTM_API __declspec(dllimport)
#  endif
#else
#  define CTM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ctm_status {
  CTM_OK = 0,
  CTM_ERR_INVALID_ARGUMENT = 1,
  CTM_ERR_COST_GUARD = 2,
  CTM_ERR_RUNTIME = 3,
  CTM_ERR_NULL_POINTER = 4,
  CTM_ERR_BUFFER_TOO_SMALL = 5
} ctm_status;

typedef enum ctm_measure {
  CTM_MEASURE_IDENTITY = 0,
  CTM_MEASURE_NEG_DISTANCE_TO_MEAN = 1
} ctm_measure;

typedef struct ctm_model ctm_model;
typedef struct ctm_bettor ctm_bettor;
typedef struct ctm_martingale ctm_martingale;
typedef struct ctm_report ctm_report;

typedef struct ctm_pvalue_record {
  size_t n;
  size_t n_star;
  size_t n_upper;
  double tau;
  double p;
} ctm_pvalue_record;

typedef struct ctm_step_result {
  ctm_pvalue_record record;
  double factor;
  double wealth;
  double log_wealth; /* natural log; -inf once wealth is zero */
} ctm_step_result;

typedef struct ctm_certificate {
  size_t horizon;
  double expected_log_wealth;
  double kl;
  double abs_difference;
  double max_rival;
  size_t rivals;
  double q_mass_total;
  int identity_holds;
  int dominance_holds;
} ctm_certificate;

CTM_API const char* ctm_version(void);
CTM_API const char* ctm_last_error(void);

/* ---- conformal p-values ---- */

CTM_API int ctm_score_window(ctm_measure measure, const double* window, size_t n,
                             double* scores_out);
CTM_API int ctm_pvalue(const double* scores, size_t n, double tau, ctm_pvalue_record* out);

/* ---- alternative models ---- */

CTM_API int ctm_model_changepoint(double pi0, double pi1, double rho, ctm_model** out);
CTM_API int ctm_model_markov(double p01, double p10, double init1, ctm_model** out);
CTM_API int ctm_model_iid(const double* probs, size_t alphabet_size, ctm_model** out);
/* transition is row-major, alphabet_size x alphabet_size. */
CTM_API int ctm_model_markov_table(const double* initial, const double* transition,
                                   size_t alphabet_size, ctm_model** out);
CTM_API int ctm_model_point_mass(const int* sequence, size_t length, size_t alphabet_size,
                                 ctm_model** out);
CTM_API int ctm_model_alphabet_size(const ctm_model* model, size_t* out);
/* Writes alphabet_size probabilities of the next symbol given the prefix. */
CTM_API int ctm_model_conditional(const ctm_model* model, const int* prefix, size_t length,
                                  double* probs_out, size_t capacity);
CTM_API void ctm_model_free(ctm_model* model);

/* ---- betting martingales on p-values ---- */

/* Bayes-Kelly bettor on the alphabet {0, ..., m-1} with symbol i scored as
 * the number i. allow_collapsed selects the polynomial-size path when the
 * model and measure permit it. */
CTM_API int ctm_bettor_bayes_kelly(const ctm_model* model, ctm_measure measure,
                                   int allow_collapsed, ctm_bettor** out);
/* Cyclic table of densities: entry i has cells[i] heights, stored back to
 * back in heights. Each entry must integrate to one. */
CTM_API int ctm_bettor_shrunk(const double* heights, const size_t* cells, size_t entries,
                              ctm_bettor** out);
/* Density for the next p-value. Writes its number of cells to *cells; the
 * heights are written when capacity suffices. */
CTM_API int ctm_bettor_density(ctm_bettor* bettor, double* heights_out, size_t capacity,
                               size_t* cells);
/* Bets on the realized p-value: returns the factor and updates the wealth. */
CTM_API int ctm_bettor_observe(ctm_bettor* bettor, double p, double* factor_out);
CTM_API int ctm_bettor_log_wealth(const ctm_bettor* bettor, double* out);
CTM_API void ctm_bettor_free(ctm_bettor* bettor);

/* ---- conformal test martingales ---- */

/* The martingale takes its own copy of the bettor's current state. */
CTM_API int ctm_martingale_create(ctm_measure measure, const ctm_bettor* bettor,
                                  ctm_martingale** out);
CTM_API int ctm_martingale_step(ctm_martingale* m, double z, double tau, ctm_step_result* out);
CTM_API void ctm_martingale_free(ctm_martingale* m);

/* ---- e-process and exact checks ---- */

CTM_API int ctm_ml_sup(size_t n, size_t k, double* out);
/* E*_n of a binary sequence under model. */
CTM_API int ctm_eprocess_value(const ctm_model* model, const int* bits, size_t n, double* out);
CTM_API int ctm_empirical_ml(const double* data, size_t n, double* value_out,
                             double* log_value_out);
CTM_API int ctm_certify_optimality(const ctm_model* model, ctm_measure measure, size_t horizon,
                                   size_t rivals, uint64_t seed, ctm_certificate* out);

/* ---- experiment runner ---- */

/* Runs "simulate", "validate", "optimality" or "eprocess" with a flat JSON
 * config. Statistical check failures still return CTM_OK; inspect the exit
 * code (0 pass, 2 check failed). */
CTM_API int ctm_run_command(const char* command, const char* config_json, ctm_report** out);
CTM_API int ctm_report_exit_code(const ctm_report* report);
/* JSON summary, valid until the report is freed. */
CTM_API const char* ctm_report_summary(const ctm_report* report);
CTM_API void ctm_report_free(ctm_report* report);

#ifdef __cplusplus
}
#endif

#endif /* CTM_CTM_H_ */
