/* Copyright 2026 The pdflow Authors
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

/* C interface to the pdflow runner.
 *
 * Every function returns a pdflow_status. On failure the message is
 * available from pdflow_last_error() on the same thread until the next call
 * into the library. Strings are copied into caller buffers: pass the buffer
 * and its capacity; *needed receives the length without the terminator. A
 * short buffer yields PDFLOW_E_INPUT and a truncated, terminated copy.
 * Handles are opaque and freed with the matching *_free function (NULL is
 * accepted). */

#ifndef PDFLOW_PDFLOW_H_
#define PDFLOW_PDFLOW_H_

#include <stddef.h>

#if defined(_WIN32)
#define PDFLOW_API __declspec(dllexport)
#else
#define PDFLOW_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdflow_status {
  PDFLOW_OK = 0,
  PDFLOW_E_INPUT = 1,      /* bad argument or shape */
  PDFLOW_E_DOMAIN = 2,     /* t or parameters outside the flow's domain */
  PDFLOW_E_SOLVER = 3,     /* saddle or Newton solve failed */
  PDFLOW_E_INFEASIBLE = 4, /* Ax = b has no solution */
  PDFLOW_E_DIVERGED = 5,
  PDFLOW_E_TRUNCATED = 6,
  PDFLOW_E_ESTIMATION = 7, /* too few samples for a rate fit */
  PDFLOW_E_CONFIG = 8,
  PDFLOW_E_IO = 9,
  PDFLOW_E_INTERNAL = 99
} pdflow_status;

typedef enum pdflow_run_status {
  PDFLOW_RUN_OK = 0,
  PDFLOW_RUN_DIVERGED = 1,
  PDFLOW_RUN_TRUNCATED = 2,
  PDFLOW_RUN_FAILED = 3,
  PDFLOW_RUN_NOT_RUN = 4
} pdflow_run_status;

typedef enum pdflow_verdict {
  PDFLOW_WITHIN_BOUND = 0,
  PDFLOW_FASTER_THAN_BOUND = 1,
  PDFLOW_VIOLATES_BOUND = 2,
  PDFLOW_NO_PREDICTION = 3
} pdflow_verdict;

typedef struct pdflow_experiment pdflow_experiment;
typedef struct pdflow_results pdflow_results;

PDFLOW_API const char* pdflow_version(void);
PDFLOW_API const char* pdflow_last_error(void);
PDFLOW_API const char* pdflow_status_name(int status);

/* Experiments. */
PDFLOW_API int pdflow_experiment_preset(const char* name, pdflow_experiment** out);
PDFLOW_API int pdflow_experiment_load(const char* path, pdflow_experiment** out);
PDFLOW_API int pdflow_experiment_parse(const char* text, pdflow_experiment** out);
PDFLOW_API void pdflow_experiment_free(pdflow_experiment* exp);

PDFLOW_API int pdflow_experiment_set_horizon(pdflow_experiment* exp, double horizon);
PDFLOW_API int pdflow_experiment_set_output_dir(pdflow_experiment* exp, const char* dir);
PDFLOW_API int pdflow_experiment_set_dump_state(pdflow_experiment* exp, int enabled);
PDFLOW_API int pdflow_experiment_set_threads(pdflow_experiment* exp, int threads);
PDFLOW_API int pdflow_experiment_member_count(const pdflow_experiment* exp, size_t* out);
/* Canonical config text. */
PDFLOW_API int pdflow_experiment_format(const pdflow_experiment* exp, char* buf, size_t cap,
                                        size_t* needed);

/* Classification only; no files written. */
PDFLOW_API int pdflow_check(const pdflow_experiment* exp, pdflow_results** out);
/* Integrates every member, writes CSVs and the summary file. Per-run
 * failures do not fail the call; inspect the member status. */
PDFLOW_API int pdflow_run(const pdflow_experiment* exp, pdflow_results** out);
PDFLOW_API void pdflow_results_free(pdflow_results* res);

PDFLOW_API int pdflow_results_count(const pdflow_results* res, size_t* out);
/* 1 when any member diverged or failed. */
PDFLOW_API int pdflow_results_any_failed(const pdflow_results* res, int* out);
/* Run summary lines (after pdflow_run) or the check report (after
 * pdflow_check), newline terminated. */
PDFLOW_API int pdflow_results_text(const pdflow_results* res, char* buf, size_t cap,
                                   size_t* needed);

PDFLOW_API int pdflow_results_label(const pdflow_results* res, size_t i, char* buf, size_t cap,
                                    size_t* needed);
PDFLOW_API int pdflow_results_status(const pdflow_results* res, size_t i, int* run_status);
PDFLOW_API int pdflow_results_regime(const pdflow_results* res, size_t i, char* buf, size_t cap,
                                     size_t* needed);
PDFLOW_API int pdflow_results_csv_path(const pdflow_results* res, size_t i, char* buf,
                                       size_t cap, size_t* needed);
/* Terminal value of a CSV metric column. */
PDFLOW_API int pdflow_results_terminal(const pdflow_results* res, size_t i, const char* metric,
                                       double* value);
/* Rate fit over [T/100, T]; PDFLOW_E_ESTIMATION when the fit had too few
 * samples. */
PDFLOW_API int pdflow_results_rate(const pdflow_results* res, size_t i, const char* metric,
                                   double* fitted_slope, double* predicted_slope, int* verdict);
/* component: "objective" or "x1", "x2", ... */
PDFLOW_API int pdflow_results_oscillation(const pdflow_results* res, size_t i,
                                          const char* component, int* sign_changes,
                                          double* total_variation);

#ifdef __cplusplus
}
#endif

#endif /* PDFLOW_PDFLOW_H_ */
