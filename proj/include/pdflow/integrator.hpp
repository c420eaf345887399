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

#ifndef PDFLOW_INTEGRATOR_HPP_
#define PDFLOW_INTEGRATOR_HPP_

#include <functional>
#include <vector>

#include "pdflow/dynamics.hpp"
#include "pdflow/error.hpp"

namespace pdflow {

struct IntegratorConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step_factor = 0.1;  // h <= max_step_factor * t
  double initial_step = 1e-3;
  long max_steps = 20'000'000;   // accepted + rejected attempts
  int sample_count = 400;

  void Validate() const;
  bool operator==(const IntegratorConfig&) const = default;
};

/// `count` log-spaced times from t0 to T inclusive; the endpoints are exact.
std::vector<double> LogSpacedGrid(double t0, double T, int count);

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  double min_step = 0.0;
  double max_step = 0.0;
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dy)>;

struct OdeSamples {
  std::vector<double> t;
  std::vector<Vec> y;
  std::vector<double> step;  // size of the accepted step that produced each sample
  StepStats stats;
};

/// Thrown on kTruncated / kDiverged; carries everything sampled so far.
class IntegrationError : public Error {
 public:
  IntegrationError(ErrorCode code, const std::string& what, OdeSamples partial, double last_t,
                   Vec last_y)
      : Error(code, what),
        partial(std::move(partial)),
        last_t(last_t),
        last_y(std::move(last_y)) {}

  OdeSamples partial;
  double last_t;
  Vec last_y;  // last finite accepted state
};

/// Dormand-Prince 5(4) with PI step control on the error norm
///   sqrt(mean(((y5 - y4)_i / (abs_tol + rel_tol max(|y_i|, |y_new_i|)))^2)),
/// steps capped at max_step_factor * t. Samples at `grid` (strictly
/// increasing, grid.front() == t0) come from cubic Hermite interpolation of
/// the accepted steps. Deterministic.
OdeSamples IntegrateOde(const OdeRhs& rhs, double t0, const Vec& y0,
                        const std::vector<double>& grid, const IntegratorConfig& cfg);

struct Trajectory {
  std::vector<TrajectoryState> samples;
  std::vector<double> step_sizes;
  StepStats stats;
};

class TrajectoryError : public Error {
 public:
  TrajectoryError(ErrorCode code, const std::string& what, Trajectory partial,
                  TrajectoryState last_good)
      : Error(code, what), partial(std::move(partial)), last_good(std::move(last_good)) {}

  Trajectory partial;
  TrajectoryState last_good;
};

/// Integrates the flow from state0 (state0.t == params.t0) to T, sampled on
/// LogSpacedGrid(t0, T, cfg.sample_count). Throws TrajectoryError.
Trajectory Integrate(const PrimalDualFlow& flow, const TrajectoryState& state0, double T,
                     const IntegratorConfig& cfg);

}  // namespace pdflow

#endif  // PDFLOW_INTEGRATOR_HPP_
