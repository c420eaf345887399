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

// Experiment configs, presets and the sweep runner.
//
// Config grammar (one statement per line, '#' starts a comment):
//
//   [section]
//   key = value
//
// Sections and keys:
//   [experiment]  name, horizon, output_dir, dump_state (true|false),
//                 threads (0 = one per core), oscillation_from
//   [problem]     kind (random_qp|toy|file), seed, dims (m n),
//                 coefficients (3 reals), path
//   [parameters]  alpha, q, s, gamma, c, p, t0
//   [mass]        kappa, sigma            m(t) = kappa t^-sigma
//   [initial]     x, v, lambda            "fill <value>" or a list of reals
//   [integrator]  rel_tol, abs_tol, max_step_factor, initial_step,
//                 max_steps, sample_count
//   [sweep]       axis (none|sigma|s|gamma), values (list of reals)
//
// Lists are whitespace separated. Unknown sections or keys, duplicate keys
// and malformed numbers raise kConfig with the line number.

#ifndef PDFLOW_EXPERIMENT_HPP_
#define PDFLOW_EXPERIMENT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pdflow/diagnostics.hpp"
#include "pdflow/dynamics.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/problem.hpp"

namespace pdflow {

struct ProblemSpec {
  enum class Kind { kRandomQp, kToy, kFile };
  Kind kind = Kind::kRandomQp;
  std::uint64_t seed = 42;
  int m = 5;
  int n = 10;
  std::vector<double> coefficients = {1.0, 2.0, 1.0};
  std::string path;

  bool operator==(const ProblemSpec&) const = default;
};

/// Either every entry equal to fill_value, or an explicit list.
struct VectorSpec {
  bool fill = true;
  double fill_value = 1.0;
  std::vector<double> values;

  Vec Resolve(Eigen::Index size, const char* what) const;
  bool operator==(const VectorSpec&) const = default;
};

enum class SweepAxis { kNone, kSigma, kS, kGamma };

std::string SweepAxisName(SweepAxis axis);

struct ExperimentConfig {
  std::string name = "experiment";
  double horizon = 1e3;
  std::string output_dir = "out";
  bool dump_state = false;
  int threads = 0;
  double oscillation_from = 10.0;

  ProblemSpec problem;

  double alpha = 3.0;
  double q = 0.1;
  double s = 0.1;
  double gamma = 1.0;
  double c = 1.0;
  double p = 0.5;
  double t0 = 1.0;

  double mass_kappa = 1.0;
  double mass_sigma = 0.0;

  VectorSpec x0;
  VectorSpec v0;
  VectorSpec lambda0;

  IntegratorConfig integrator;

  SweepAxis sweep = SweepAxis::kNone;
  std::vector<double> sweep_values;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws kConfig on grammar errors, kInput on out-of-range values.
ExperimentConfig ParseConfig(std::istream& in);
ExperimentConfig ParseConfigString(const std::string& text);
ExperimentConfig LoadConfigFile(const std::string& path);
/// Canonical text form; ParseConfigString(FormatConfig(c)) == c.
std::string FormatConfig(const ExperimentConfig& config);

/// Range checks that need no problem data (kInput / kConfig).
void ValidateConfig(const ExperimentConfig& config);

/// example51, example52, example52_hessian. kConfig for anything else.
ExperimentConfig Preset(const std::string& name);
std::vector<std::string> PresetNames();

/// One concrete run of a sweep: the config with the axis value applied.
struct SweepMember {
  std::string label;  // "<name>" or "<name>_<axis><value>"
  double value = 0.0;
  ExperimentConfig config;
};

std::vector<SweepMember> ExpandSweep(const ExperimentConfig& config);

Problem BuildProblem(const ProblemSpec& spec);
ParameterSet BuildParameters(const ExperimentConfig& config);
MassFunction BuildMass(const ExperimentConfig& config);
TrajectoryState BuildInitialState(const ExperimentConfig& config, const Problem& prob);

enum class RunStatus { kOk, kDiverged, kTruncated, kFailed, kNotRun };

std::string RunStatusName(RunStatus status);

struct RateResult {
  std::string metric;
  bool ok = false;
  RateEstimate estimate;
  std::string error;  // set when !ok
};

struct OscillationResult {
  std::string component;  // "objective" or "x<i>"
  OscillationMeasure measure;
};

struct RunSummary {
  std::string label;
  SweepAxis axis = SweepAxis::kNone;
  double sweep_value = 0.0;
  std::string csv_path;
  RunStatus status = RunStatus::kNotRun;
  std::string message;
  RegimeReport regime;
  bool has_terminal = false;
  MetricRow terminal;
  std::vector<RateResult> rates;
  std::vector<OscillationResult> oscillations;
  std::vector<std::string> warnings;
  long accepted_steps = 0;
  long rejected_steps = 0;
  double wall_seconds = 0.0;
};

/// Metrics fitted in every run summary, window [T/100, T].
inline constexpr std::array<std::string_view, 5> kRateMetrics = {
    "obj_residual", "feasibility", "lagrangian_gap", "dist_saddle_sq", "energy"};

/// Everything a run produced, kept in memory for callers that want more than
/// the summary.
struct RunOutput {
  RunSummary summary;
  Trajectory trajectory;
  std::vector<MetricRow> metrics;
};

/// Classification only, no integration.
std::vector<RunSummary> CheckExperiment(const ExperimentConfig& config);

/// Integrates one member, computes metrics, rates and oscillation measures.
/// Writes no files. Run-time failures are reported in the summary status.
RunOutput RunMember(const SweepMember& member);

/// Runs every sweep member (concurrently when threads != 1), writes one CSV
/// per member and <output_dir>/<name>_summary.txt. Results are in sweep
/// order regardless of scheduling.
std::vector<RunSummary> RunExperiment(const ExperimentConfig& config);

/// Header plus one %.17g row per metric row; with `state` non-null, x_i, v_i
/// and lambda_j columns (1-based) follow.
void WriteMetricsCsv(std::ostream& out, const std::vector<MetricRow>& rows,
                     const Trajectory* state);
std::vector<std::string> CsvHeader(Eigen::Index dim_x, Eigen::Index dim_y, bool with_state);

/// One line of space-separated key=value tokens.
std::string FormatSummaryLine(const RunSummary& summary);
/// Multi-line report for `check`.
std::string FormatCheckReport(const RunSummary& summary);

bool AnyFailed(const std::vector<RunSummary>& summaries);

}  // namespace pdflow

#endif  // PDFLOW_EXPERIMENT_HPP_
