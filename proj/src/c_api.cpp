// Copyright 2026 The pdflow Authors
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

#include "pdflow/pdflow.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "pdflow/experiment.hpp"

struct pdflow_experiment {
  pdflow::ExperimentConfig config;
};

struct pdflow_results {
  std::vector<pdflow::RunSummary> summaries;
  bool checked_only = false;
};

namespace {

static_assert(static_cast<int>(pdflow::ErrorCode::kInput) == PDFLOW_E_INPUT);
static_assert(static_cast<int>(pdflow::ErrorCode::kDomain) == PDFLOW_E_DOMAIN);
static_assert(static_cast<int>(pdflow::ErrorCode::kSolver) == PDFLOW_E_SOLVER);
static_assert(static_cast<int>(pdflow::ErrorCode::kInfeasible) == PDFLOW_E_INFEASIBLE);
static_assert(static_cast<int>(pdflow::ErrorCode::kDiverged) == PDFLOW_E_DIVERGED);
static_assert(static_cast<int>(pdflow::ErrorCode::kTruncated) == PDFLOW_E_TRUNCATED);
static_assert(static_cast<int>(pdflow::ErrorCode::kEstimation) == PDFLOW_E_ESTIMATION);
static_assert(static_cast<int>(pdflow::ErrorCode::kConfig) == PDFLOW_E_CONFIG);
static_assert(static_cast<int>(pdflow::ErrorCode::kIo) == PDFLOW_E_IO);

thread_local std::string g_last_error;

int SetError(int status, std::string msg) {
  g_last_error = std::move(msg);
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <class F>
int Guard(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const pdflow::Error& e) {
    return SetError(static_cast<int>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return SetError(PDFLOW_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return SetError(PDFLOW_E_INTERNAL, e.what());
  } catch (...) {
    return SetError(PDFLOW_E_INTERNAL, "unknown exception");
  }
}

int CopyOut(const std::string& s, char* buf, size_t cap, size_t* needed) {
  if (needed) *needed = s.size();
  if (buf == nullptr && cap == 0) return PDFLOW_OK;  // size query
  if (buf == nullptr) return SetError(PDFLOW_E_INPUT, "null buffer");
  if (cap == 0) return SetError(PDFLOW_E_INPUT, "buffer too small");
  const size_t n = s.size() < cap ? s.size() : cap - 1;
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  if (n < s.size()) return SetError(PDFLOW_E_INPUT, "buffer too small");
  return PDFLOW_OK;
}

int Ok() {
  g_last_error.clear();
  return PDFLOW_OK;
}

int NullArg(const char* what) { return SetError(PDFLOW_E_INPUT, std::string("null ") + what); }

const pdflow::RunSummary* Member(const pdflow_results* res, size_t i) {
  if (res == nullptr) pdflow::Fail(pdflow::ErrorCode::kInput, "null results");
  if (i >= res->summaries.size()) {
    pdflow::Fail(pdflow::ErrorCode::kInput, "member index " + std::to_string(i) + " out of range");
  }
  return &res->summaries[i];
}

int RunStatusCode(pdflow::RunStatus s) {
  switch (s) {
    case pdflow::RunStatus::kOk: return PDFLOW_RUN_OK;
    case pdflow::RunStatus::kDiverged: return PDFLOW_RUN_DIVERGED;
    case pdflow::RunStatus::kTruncated: return PDFLOW_RUN_TRUNCATED;
    case pdflow::RunStatus::kFailed: return PDFLOW_RUN_FAILED;
    case pdflow::RunStatus::kNotRun: return PDFLOW_RUN_NOT_RUN;
  }
  return PDFLOW_RUN_FAILED;
}

int VerdictCode(pdflow::Verdict v) {
  switch (v) {
    case pdflow::Verdict::kWithinBound: return PDFLOW_WITHIN_BOUND;
    case pdflow::Verdict::kFasterThanBound: return PDFLOW_FASTER_THAN_BOUND;
    case pdflow::Verdict::kViolatesBound: return PDFLOW_VIOLATES_BOUND;
    case pdflow::Verdict::kNoPrediction: return PDFLOW_NO_PREDICTION;
  }
  return PDFLOW_NO_PREDICTION;
}

int NewExperiment(pdflow::ExperimentConfig cfg, pdflow_experiment** out) {
  *out = new pdflow_experiment{std::move(cfg)};
  return PDFLOW_OK;
}

}  // namespace

extern "C" {

const char* pdflow_version(void) { return "0.1.0"; }

const char* pdflow_last_error(void) { return g_last_error.c_str(); }

const char* pdflow_status_name(int status) {
  switch (status) {
    case PDFLOW_OK: return "ok";
    case PDFLOW_E_INPUT: return "input";
    case PDFLOW_E_DOMAIN: return "domain";
    case PDFLOW_E_SOLVER: return "solver";
    case PDFLOW_E_INFEASIBLE: return "infeasible";
    case PDFLOW_E_DIVERGED: return "diverged";
    case PDFLOW_E_TRUNCATED: return "truncated";
    case PDFLOW_E_ESTIMATION: return "estimation";
    case PDFLOW_E_CONFIG: return "config";
    case PDFLOW_E_IO: return "io";
    default: return "internal";
  }
}

int pdflow_experiment_preset(const char* name, pdflow_experiment** out) {
  if (!name) return NullArg("name");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&]() -> int { return NewExperiment(pdflow::Preset(name), out); });
}

int pdflow_experiment_load(const char* path, pdflow_experiment** out) {
  if (!path) return NullArg("path");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&]() -> int { return NewExperiment(pdflow::LoadConfigFile(path), out); });
}

int pdflow_experiment_parse(const char* text, pdflow_experiment** out) {
  if (!text) return NullArg("text");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&]() -> int { return NewExperiment(pdflow::ParseConfigString(text), out); });
}

void pdflow_experiment_free(pdflow_experiment* exp) { delete exp; }

int pdflow_experiment_set_horizon(pdflow_experiment* exp, double horizon) {
  if (!exp) return NullArg("experiment");
  return Guard([&]() -> int {
    pdflow::ExperimentConfig next = exp->config;
    next.horizon = horizon;
    pdflow::ValidateConfig(next);
    exp->config = std::move(next);
    return PDFLOW_OK;
  });
}

int pdflow_experiment_set_output_dir(pdflow_experiment* exp, const char* dir) {
  if (!exp) return NullArg("experiment");
  if (!dir) return NullArg("dir");
  return Guard([&]() -> int {
    pdflow::ExperimentConfig next = exp->config;
    next.output_dir = dir;
    pdflow::ValidateConfig(next);
    exp->config = std::move(next);
    return PDFLOW_OK;
  });
}

int pdflow_experiment_set_dump_state(pdflow_experiment* exp, int enabled) {
  if (!exp) return NullArg("experiment");
  exp->config.dump_state = enabled != 0;
  return Ok();
}

int pdflow_experiment_set_threads(pdflow_experiment* exp, int threads) {
  if (!exp) return NullArg("experiment");
  if (threads < 0) return SetError(PDFLOW_E_INPUT, "threads must be >= 0");
  exp->config.threads = threads;
  return Ok();
}

int pdflow_experiment_member_count(const pdflow_experiment* exp, size_t* out) {
  if (!exp) return NullArg("experiment");
  if (!out) return NullArg("out");
  return Guard([&]() -> int {
    *out = pdflow::ExpandSweep(exp->config).size();
    return PDFLOW_OK;
  });
}

int pdflow_experiment_format(const pdflow_experiment* exp, char* buf, size_t cap,
                             size_t* needed) {
  if (!exp) return NullArg("experiment");
  return Guard(
      [&]() -> int { return CopyOut(pdflow::FormatConfig(exp->config), buf, cap, needed); });
}

int pdflow_check(const pdflow_experiment* exp, pdflow_results** out) {
  if (!exp) return NullArg("experiment");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&]() -> int {
    *out = new pdflow_results{pdflow::CheckExperiment(exp->config), true};
    return PDFLOW_OK;
  });
}

int pdflow_run(const pdflow_experiment* exp, pdflow_results** out) {
  if (!exp) return NullArg("experiment");
  if (!out) return NullArg("out");
  *out = nullptr;
  return Guard([&]() -> int {
    *out = new pdflow_results{pdflow::RunExperiment(exp->config), false};
    return PDFLOW_OK;
  });
}

void pdflow_results_free(pdflow_results* res) { delete res; }

int pdflow_results_count(const pdflow_results* res, size_t* out) {
  if (!res) return NullArg("results");
  if (!out) return NullArg("out");
  *out = res->summaries.size();
  return Ok();
}

int pdflow_results_any_failed(const pdflow_results* res, int* out) {
  if (!res) return NullArg("results");
  if (!out) return NullArg("out");
  *out = pdflow::AnyFailed(res->summaries) ? 1 : 0;
  return Ok();
}

int pdflow_results_text(const pdflow_results* res, char* buf, size_t cap, size_t* needed) {
  if (!res) return NullArg("results");
  return Guard([&]() -> int {
    std::string text;
    for (const auto& s : res->summaries) {
      text += res->checked_only ? pdflow::FormatCheckReport(s)
                                : pdflow::FormatSummaryLine(s) + "\n";
    }
    return CopyOut(text, buf, cap, needed);
  });
}

int pdflow_results_label(const pdflow_results* res, size_t i, char* buf, size_t cap,
                         size_t* needed) {
  return Guard([&]() -> int { return CopyOut(Member(res, i)->label, buf, cap, needed); });
}

int pdflow_results_status(const pdflow_results* res, size_t i, int* run_status) {
  if (!run_status) return NullArg("run_status");
  return Guard([&]() -> int {
    *run_status = RunStatusCode(Member(res, i)->status);
    return PDFLOW_OK;
  });
}

int pdflow_results_regime(const pdflow_results* res, size_t i, char* buf, size_t cap,
                          size_t* needed) {
  return Guard([&]() -> int {
    return CopyOut(pdflow::RegimeName(Member(res, i)->regime.regime), buf, cap, needed);
  });
}

int pdflow_results_csv_path(const pdflow_results* res, size_t i, char* buf, size_t cap,
                            size_t* needed) {
  return Guard([&]() -> int { return CopyOut(Member(res, i)->csv_path, buf, cap, needed); });
}

int pdflow_results_terminal(const pdflow_results* res, size_t i, const char* metric,
                            double* value) {
  if (!metric) return NullArg("metric");
  if (!value) return NullArg("value");
  return Guard([&]() -> int {
    const pdflow::RunSummary* s = Member(res, i);
    if (!s->has_terminal) return SetError(PDFLOW_E_INPUT, "member has no terminal metrics");
    *value = pdflow::MetricValue(s->terminal, metric);
    return PDFLOW_OK;
  });
}

int pdflow_results_rate(const pdflow_results* res, size_t i, const char* metric,
                        double* fitted_slope, double* predicted_slope, int* verdict) {
  if (!metric) return NullArg("metric");
  return Guard([&]() -> int {
    for (const pdflow::RateResult& r : Member(res, i)->rates) {
      if (r.metric != metric) continue;
      if (!r.ok) return SetError(PDFLOW_E_ESTIMATION, r.error);
      if (fitted_slope) *fitted_slope = r.estimate.fitted_slope;
      if (predicted_slope) *predicted_slope = r.estimate.predicted_slope;
      if (verdict) *verdict = VerdictCode(r.estimate.verdict);
      return PDFLOW_OK;
    }
    return SetError(PDFLOW_E_INPUT, std::string("no rate for metric '") + metric + "'");
  });
}

int pdflow_results_oscillation(const pdflow_results* res, size_t i, const char* component,
                               int* sign_changes, double* total_variation) {
  if (!component) return NullArg("component");
  return Guard([&]() -> int {
    for (const pdflow::OscillationResult& o : Member(res, i)->oscillations) {
      if (o.component != component) continue;
      if (sign_changes) *sign_changes = o.measure.sign_changes;
      if (total_variation) *total_variation = o.measure.total_variation;
      return PDFLOW_OK;
    }
    return SetError(PDFLOW_E_INPUT, std::string("no oscillation measure for '") + component + "'");
  });
}

}  // extern "C"
