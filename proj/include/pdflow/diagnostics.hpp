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

#ifndef PDFLOW_DIAGNOSTICS_HPP_
#define PDFLOW_DIAGNOSTICS_HPP_

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "pdflow/dynamics.hpp"
#include "pdflow/integrator.hpp"
#include "pdflow/lagrangian.hpp"

namespace pdflow {

/// a(t) = m t^(q+s) - 2 gamma q m t^(q-1) - gamma m' t^q + gamma
double EnergyCoefficientA(const ParameterSet& params, const MassFunction& mass, double t);
/// b(t) = -(alpha-1)(q m t^(q-1) + m' t^q - 1)
double EnergyCoefficientB(const ParameterSet& params, const MassFunction& mass, double t);

/// Lyapunov energy
///   E = a t^q (L_t(x, l_t) - L_t(x_t, l_t)) + |theta_term|^2/2
///       + b |x - x_t|^2/2 + |l - l_t|^2/2,
///   theta_term = (alpha-1)(x - x_t) + t^q (m v + gamma grad_x L_t(x, l)).
struct EnergyReport {
  double t = 0.0;
  double a_t = 0.0;
  double b_t = 0.0;
  Vec theta_term;
  double gap_term = 0.0;
  double theta_sq_term = 0.0;
  double primal_term = 0.0;
  double dual_term = 0.0;
  double energy = 0.0;
};

EnergyReport ComputeEnergy(const Problem& prob, const ParameterSet& params,
                           const MassFunction& mass, const TrajectoryState& state,
                           const SaddlePoint& saddle);

struct MetricRow {
  double t = 0.0;
  double obj_residual = 0.0;    // |f(x) - f(x*)|
  double feasibility = 0.0;     // |Ax - b|
  double lagrangian_gap = 0.0;  // L(x, l*) - L(x*, l*)
  double dist_saddle_sq = 0.0;  // |(x - x_t, l - l_t)|^2
  double dist_minnorm = 0.0;    // |(x, l) - (x*, l*)|
  double energy = 0.0;
  double a_t = 0.0;
  double b_t = 0.0;
  double theta = 0.0;
  double step_size = 0.0;
};

/// CSV column order, shared with the runner.
inline constexpr std::array<std::string_view, 11> kMetricColumns = {
    "t",          "obj_residual", "feasibility", "lagrangian_gap", "dist_saddle_sq", "dist_minnorm",
    "energy",     "a_t",          "b_t",         "theta",          "step_size"};

/// Throws kInput for an unknown column name.
double MetricValue(const MetricRow& row, std::string_view name);

std::vector<SaddlePoint> SaddlePath(const Problem& prob, const RegularizationSpec& reg,
                                    const std::vector<double>& times);

/// One row per trajectory sample; saddle_path[i].t must equal the i-th
/// sample time.
std::vector<MetricRow> ComputeMetrics(const Problem& prob, const ParameterSet& params,
                                      const MassFunction& mass, const Trajectory& trajectory,
                                      const std::vector<SaddlePoint>& saddle_path,
                                      const MinNormSolution& min_norm);

enum class Verdict { kWithinBound, kFasterThanBound, kViolatesBound, kNoPrediction };

std::string VerdictName(Verdict verdict);

struct RateEstimate {
  std::string metric;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double fitted_slope = 0.0;
  double intercept = 0.0;
  double predicted_slope = 0.0;
  double residual_r2 = 0.0;
  int samples_used = 0;
  int floored = 0;  // rows below kRateFloor, excluded from the fit
  Verdict verdict = Verdict::kNoPrediction;
};

inline constexpr double kRateFloor = 1e-14;
inline constexpr double kDefaultSlack = 0.1;

/// Least-squares line through (log t, log metric) for rows with t in
/// [t_lo, t_hi]. Needs >= 8 unfloored rows, else kEstimation.
/// Verdict: violates iff fitted > predicted + slack, faster iff
/// fitted < predicted - slack.
RateEstimate FitRate(const std::vector<MetricRow>& rows, std::string_view metric, double t_lo,
                     double t_hi, double predicted_slope, double slack = kDefaultSlack);

/// Predicted slope from the regime report: gap exponent for obj_residual,
/// feasibility and lagrangian_gap; distance exponent for dist_saddle_sq and
/// energy; NaN otherwise.
double PredictedSlope(const RegimeReport& report, std::string_view metric);

RateEstimate FitRate(const std::vector<MetricRow>& rows, std::string_view metric, double t_lo,
                     double t_hi, const RegimeReport& report, double slack = kDefaultSlack);

struct ComponentSelector {
  enum class Kind { kPrimal, kDual, kObjective };
  Kind kind = Kind::kPrimal;
  Eigen::Index index = 0;

  static ComponentSelector Primal(Eigen::Index i) { return {Kind::kPrimal, i}; }
  static ComponentSelector Dual(Eigen::Index i) { return {Kind::kDual, i}; }
  static ComponentSelector Objective() { return {Kind::kObjective, 0}; }
};

struct OscillationMeasure {
  int sign_changes = 0;
  double total_variation = 0.0;
};

/// Sign changes of the component's time derivative (v_i for primal entries,
/// <grad f(x), v> for the objective, divided differences for dual entries)
/// and the total variation sum |delta| over samples with t >= t_from.
/// `prob` is required for the objective selector.
OscillationMeasure MeasureOscillation(const Trajectory& trajectory, ComponentSelector selector,
                                      const Problem* prob = nullptr, double t_from = 0.0);

}  // namespace pdflow

#endif  // PDFLOW_DIAGNOSTICS_HPP_
