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

#include "pdflow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "text_util.hpp"

namespace pdflow {

namespace {

using internal::FormatDouble;

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// b (5th order) minus b* (4th order).
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller constants (Hairer, Norsett & Wanner).
constexpr double kSafety = 0.9;
constexpr double kExpo = 0.2 - 0.04 * 0.75;
constexpr double kBeta = 0.04;
constexpr double kFacMin = 0.2;  // h_new >= 0.2 h
constexpr double kFacMax = 10.0;

Vec Hermite(double t0, const Vec& y0, const Vec& f0, double t1, const Vec& y1, const Vec& f1,
            double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1;
}

}  // namespace

void IntegratorConfig::Validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    Fail(ErrorCode::kInput, "integrator: tolerances must be > 0");
  }
  if (!(max_step_factor > 0.0)) Fail(ErrorCode::kInput, "integrator: max_step_factor must be > 0");
  if (!(initial_step > 0.0)) Fail(ErrorCode::kInput, "integrator: initial_step must be > 0");
  if (max_steps < 1) Fail(ErrorCode::kInput, "integrator: max_steps must be >= 1");
  if (sample_count < 2) Fail(ErrorCode::kInput, "integrator: sample_count must be >= 2");
}

std::vector<double> LogSpacedGrid(double t0, double T, int count) {
  if (!(t0 > 0.0) || !(T > t0) || count < 2) {
    Fail(ErrorCode::kInput, "log grid: need 0 < t0 < T and count >= 2");
  }
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double l0 = std::log(t0), l1 = std::log(T);
  for (int i = 0; i < count; ++i) {
    grid[static_cast<std::size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (count - 1));
  }
  grid.front() = t0;
  grid.back() = T;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) Fail(ErrorCode::kInput, "log grid: too many samples for window");
  }
  return grid;
}

OdeSamples IntegrateOde(const OdeRhs& rhs, double t0, const Vec& y0,
                        const std::vector<double>& grid, const IntegratorConfig& cfg) {
  cfg.Validate();
  if (grid.empty() || grid.front() != t0) {
    Fail(ErrorCode::kInput, "integrator: grid must start at t0");
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      Fail(ErrorCode::kInput, "integrator: grid must be strictly increasing");
    }
  }
  if (!y0.allFinite()) Fail(ErrorCode::kInput, "integrator: non-finite initial state");

  const double T = grid.back();
  const Eigen::Index dim = y0.size();

  OdeSamples out;
  out.t.reserve(grid.size());
  out.y.reserve(grid.size());
  out.step.reserve(grid.size());

  double t = t0;
  Vec y = y0;
  Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
  Vec ytmp(dim), ynew(dim), err(dim);
  double h = std::min(cfg.initial_step, cfg.max_step_factor * t);
  out.t.push_back(t0);
  out.y.push_back(y0);
  out.step.push_back(h);
  std::size_t next = 1;
  try {
    rhs(t, y, k1);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDiverged) throw;
    throw IntegrationError(e.code(), e.what(), out, t, y);
  }

  double err_old = 1e-4;
  long attempts = 0;
  bool last_rejected = false;
  out.stats.min_step = std::numeric_limits<double>::infinity();

  auto fail = [&](ErrorCode code, const std::string& msg) {
    throw IntegrationError(code, msg, out, t, y);
  };

  while (next < grid.size()) {
    if (++attempts > cfg.max_steps) {
      fail(ErrorCode::kTruncated, "integrator: max_steps=" + std::to_string(cfg.max_steps) +
                                      " exceeded at t=" + FormatDouble(t));
    }
    h = std::min({h, cfg.max_step_factor * t, T - t});
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t);
    if (h < h_min) {
      fail(ErrorCode::kDiverged, "integrator: step size underflow at t=" + FormatDouble(t));
    }

    bool finite = true;
    try {
      ytmp = y + h * a21 * k1;
      rhs(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + h, ytmp, k6);
      ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + h, ynew, k7);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDiverged) throw;
      finite = false;
    }

    double err_norm = std::numeric_limits<double>::infinity();
    if (finite && ynew.allFinite()) {
      err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const auto scale =
          cfg.abs_tol + cfg.rel_tol * y.cwiseAbs().cwiseMax(ynew.cwiseAbs()).array();
      err_norm = std::sqrt((err.array() / scale).square().mean());
    }

    if (!std::isfinite(err_norm)) {
      ++out.stats.rejected;
      last_rejected = true;
      h *= 0.1;
      continue;
    }

    if (err_norm <= 1.0) {
      const double t_new = (T - (t + h) <= 1e-14 * T) ? T : t + h;
      // Dense output for every grid time inside (t, t_new].
      while (next < grid.size() && grid[next] <= t_new) {
        out.t.push_back(grid[next]);
        out.y.push_back(grid[next] == t_new ? ynew
                                            : Hermite(t, y, k1, t_new, ynew, k7, grid[next]));
        out.step.push_back(h);
        ++next;
      }
      ++out.stats.accepted;
      out.stats.min_step = std::min(out.stats.min_step, h);
      out.stats.max_step = std::max(out.stats.max_step, h);
      t = t_new;
      y.swap(ynew);
      k1.swap(k7);

      const double fac11 = std::pow(err_norm, kExpo);
      double fac = fac11 / std::pow(err_old, kBeta) / kSafety;
      fac = std::clamp(fac, 1.0 / kFacMax, 1.0 / kFacMin);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(err_norm, 1e-4);
      last_rejected = false;
      h = h_new;
    } else {
      ++out.stats.rejected;
      last_rejected = true;
      h /= std::min(1.0 / kFacMin, std::pow(err_norm, kExpo) / kSafety);
    }
  }
  if (out.stats.accepted == 0) out.stats.min_step = 0.0;
  return out;
}

Trajectory Integrate(const PrimalDualFlow& flow, const TrajectoryState& state0, double T,
                     const IntegratorConfig& cfg) {
  const ParameterSet& params = flow.params();
  if (state0.t != params.t0) Fail(ErrorCode::kInput, "integrate: state0.t must equal t0");
  CheckTimeWindow(params, T);
  const std::vector<double> grid = LogSpacedGrid(params.t0, T, cfg.sample_count);

  auto to_trajectory = [&flow](const OdeSamples& s) {
    Trajectory tr;
    tr.samples.reserve(s.t.size());
    for (std::size_t i = 0; i < s.t.size(); ++i) tr.samples.push_back(flow.Unpack(s.t[i], s.y[i]));
    tr.step_sizes = s.step;
    tr.stats = s.stats;
    return tr;
  };

  OdeRhs rhs = [&flow](double t, const Vec& y, Vec& dy) { flow(t, y, dy); };
  try {
    return to_trajectory(IntegrateOde(rhs, params.t0, flow.Pack(state0), grid, cfg));
  } catch (const IntegrationError& e) {
    throw TrajectoryError(e.code(), e.what(), to_trajectory(e.partial),
                          flow.Unpack(e.last_t, e.last_y));
  }
}

}  // namespace pdflow
