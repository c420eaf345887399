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

#include "pdflow/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "pdflow/error.hpp"
#include "text_util.hpp"

namespace pdflow {

double EnergyCoefficientA(const ParameterSet& params, const MassFunction& mass, double t) {
  const MassValues mv = mass.Eval(t);
  const double q = params.q, g = params.gamma;
  return mv.m * std::pow(t, q + params.s) - 2.0 * g * q * mv.m * std::pow(t, q - 1.0) -
         g * mv.mdot * std::pow(t, q) + g;
}

double EnergyCoefficientB(const ParameterSet& params, const MassFunction& mass, double t) {
  const MassValues mv = mass.Eval(t);
  const double q = params.q;
  return -(params.alpha - 1.0) * (q * mv.m * std::pow(t, q - 1.0) + mv.mdot * std::pow(t, q) - 1.0);
}

EnergyReport ComputeEnergy(const Problem& prob, const ParameterSet& params,
                           const MassFunction& mass, const TrajectoryState& state,
                           const SaddlePoint& saddle) {
  if (state.t != saddle.t) {
    Fail(ErrorCode::kInput, "energy: state time " + internal::FormatDouble(state.t) +
                                " differs from saddle time " + internal::FormatDouble(saddle.t));
  }
  const double t = state.t;
  const RegularizationSpec& reg = params.reg;
  const double tq = std::pow(t, params.q);
  const MassValues mv = mass.Eval(t);

  EnergyReport rep;
  rep.t = t;
  rep.a_t = EnergyCoefficientA(params, mass, t);
  rep.b_t = EnergyCoefficientB(params, mass, t);

  const Vec dx = state.x - saddle.x;
  const Vec dl = state.lambda - saddle.lambda;
  const double gap = LagrangianValue(prob, reg, t, state.x, saddle.lambda) -
                     LagrangianValue(prob, reg, t, saddle.x, saddle.lambda);
  rep.theta_term = (params.alpha - 1.0) * dx +
                   tq * (mv.m * state.v +
                         params.gamma * GradXLagrangian(prob, reg, t, state.x, state.lambda));
  rep.gap_term = rep.a_t * tq * gap;
  rep.theta_sq_term = 0.5 * rep.theta_term.squaredNorm();
  rep.primal_term = 0.5 * rep.b_t * dx.squaredNorm();
  rep.dual_term = 0.5 * dl.squaredNorm();
  rep.energy = rep.gap_term + rep.theta_sq_term + rep.primal_term + rep.dual_term;
  return rep;
}

double MetricValue(const MetricRow& row, std::string_view name) {
  if (name == "t") return row.t;
  if (name == "obj_residual") return row.obj_residual;
  if (name == "feasibility") return row.feasibility;
  if (name == "lagrangian_gap") return row.lagrangian_gap;
  if (name == "dist_saddle_sq") return row.dist_saddle_sq;
  if (name == "dist_minnorm") return row.dist_minnorm;
  if (name == "energy") return row.energy;
  if (name == "a_t") return row.a_t;
  if (name == "b_t") return row.b_t;
  if (name == "theta") return row.theta;
  if (name == "step_size") return row.step_size;
  Fail(ErrorCode::kInput, "unknown metric '" + std::string(name) + "'");
}

std::vector<SaddlePoint> SaddlePath(const Problem& prob, const RegularizationSpec& reg,
                                    const std::vector<double>& times) {
  std::vector<SaddlePoint> path;
  path.reserve(times.size());
  for (double t : times) path.push_back(ComputeSaddlePoint(prob, reg, t));
  return path;
}

std::vector<MetricRow> ComputeMetrics(const Problem& prob, const ParameterSet& params,
                                      const MassFunction& mass, const Trajectory& trajectory,
                                      const std::vector<SaddlePoint>& saddle_path,
                                      const MinNormSolution& min_norm) {
  if (saddle_path.size() != trajectory.samples.size()) {
    Fail(ErrorCode::kInput, "metrics: saddle path and trajectory have different lengths");
  }
  const double f_star = prob.objective().Value(min_norm.x);
  std::vector<MetricRow> rows;
  rows.reserve(trajectory.samples.size());
  for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
    const TrajectoryState& s = trajectory.samples[i];
    const SaddlePoint& sp = saddle_path[i];
    const EnergyReport er = ComputeEnergy(prob, params, mass, s, sp);
    const Vec residual = prob.A() * s.x - prob.b();
    const double fx = prob.objective().Value(s.x);

    MetricRow row;
    row.t = s.t;
    row.obj_residual = std::abs(fx - f_star);
    row.feasibility = residual.norm();
    row.lagrangian_gap = fx - f_star + min_norm.lambda.dot(residual);
    row.dist_saddle_sq = (s.x - sp.x).squaredNorm() + (s.lambda - sp.lambda).squaredNorm();
    row.dist_minnorm = ProductNorm(s.x - min_norm.x, s.lambda - min_norm.lambda);
    row.energy = er.energy;
    row.a_t = er.a_t;
    row.b_t = er.b_t;
    row.theta = Theta(params, mass, s.t);
    row.step_size = i < trajectory.step_sizes.size() ? trajectory.step_sizes[i] : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string VerdictName(Verdict verdict) {
  switch (verdict) {
    case Verdict::kWithinBound: return "within_bound";
    case Verdict::kFasterThanBound: return "faster_than_bound";
    case Verdict::kViolatesBound: return "violates_bound";
    case Verdict::kNoPrediction: return "no_prediction";
  }
  return "unknown";
}

RateEstimate FitRate(const std::vector<MetricRow>& rows, std::string_view metric, double t_lo,
                     double t_hi, double predicted_slope, double slack) {
  RateEstimate est;
  est.metric = std::string(metric);
  est.t_lo = t_lo;
  est.t_hi = t_hi;
  est.predicted_slope = predicted_slope;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (const MetricRow& row : rows) {
    if (row.t < t_lo || row.t > t_hi) continue;
    const double v = MetricValue(row, metric);
    if (!(v >= kRateFloor)) {
      ++est.floored;
      continue;
    }
    pts.emplace_back(std::log(row.t), std::log(v));
  }
  if (pts.size() < 8) {
    Fail(ErrorCode::kEstimation, "rate fit for '" + est.metric + "': only " +
                                     std::to_string(pts.size()) +
                                     " usable samples in window (need 8)");
  }
  const double n = static_cast<double>(pts.size());
  // Center first for a well-conditioned fit.
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) Fail(ErrorCode::kEstimation, "rate fit: degenerate time window");
  est.fitted_slope = sxy / sxx;
  est.intercept = my - est.fitted_slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (est.intercept + est.fitted_slope * x);
    ss_res += r * r;
    ss_tot += (y - my) * (y - my);
  }
  est.residual_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  est.samples_used = static_cast<int>(pts.size());

  if (std::isnan(predicted_slope)) {
    est.verdict = Verdict::kNoPrediction;
  } else if (est.fitted_slope > predicted_slope + slack) {
    est.verdict = Verdict::kViolatesBound;
  } else if (est.fitted_slope < predicted_slope - slack) {
    est.verdict = Verdict::kFasterThanBound;
  } else {
    est.verdict = Verdict::kWithinBound;
  }
  return est;
}

double PredictedSlope(const RegimeReport& report, std::string_view metric) {
  if (!report.has_prediction) return std::numeric_limits<double>::quiet_NaN();
  if (metric == "obj_residual" || metric == "lagrangian_gap") return report.exponents.gap;
  if (metric == "feasibility") return report.exponents.feasibility;
  if (metric == "dist_saddle_sq" || metric == "energy") return report.exponents.distance;
  return std::numeric_limits<double>::quiet_NaN();
}

RateEstimate FitRate(const std::vector<MetricRow>& rows, std::string_view metric, double t_lo,
                     double t_hi, const RegimeReport& report, double slack) {
  return FitRate(rows, metric, t_lo, t_hi, PredictedSlope(report, metric), slack);
}

OscillationMeasure MeasureOscillation(const Trajectory& trajectory, ComponentSelector selector,
                                      const Problem* prob, double t_from) {
  using Kind = ComponentSelector::Kind;
  if (selector.kind == Kind::kObjective && prob == nullptr) {
    Fail(ErrorCode::kInput, "oscillation: objective selector needs the problem");
  }
  std::vector<double> times, values, derivs;
  for (const TrajectoryState& s : trajectory.samples) {
    if (s.t < t_from) continue;
    times.push_back(s.t);
    switch (selector.kind) {
      case Kind::kPrimal:
        if (selector.index < 0 || selector.index >= s.x.size()) {
          Fail(ErrorCode::kInput, "oscillation: bad primal index");
        }
        values.push_back(s.x(selector.index));
        derivs.push_back(s.v(selector.index));
        break;
      case Kind::kDual:
        if (selector.index < 0 || selector.index >= s.lambda.size()) {
          Fail(ErrorCode::kInput, "oscillation: bad dual index");
        }
        values.push_back(s.lambda(selector.index));
        break;
      case Kind::kObjective:
        values.push_back(prob->objective().Value(s.x));
        derivs.push_back(prob->objective().Gradient(s.x).dot(s.v));
        break;
    }
  }
  OscillationMeasure out;
  if (values.size() < 2) return out;
  if (selector.kind == Kind::kDual) {
    for (std::size_t i = 1; i < values.size(); ++i) {
      derivs.push_back((values[i] - values[i - 1]) / (times[i] - times[i - 1]));
    }
  }
  for (std::size_t i = 1; i < values.size(); ++i) {
    out.total_variation += std::abs(values[i] - values[i - 1]);
  }
  int last_sign = 0;
  for (double d : derivs) {
    const int sign = (d > 0.0) - (d < 0.0);
    if (sign == 0) continue;
    if (last_sign != 0 && sign != last_sign) ++out.sign_changes;
    last_sign = sign;
  }
  return out;
}

}  // namespace pdflow
