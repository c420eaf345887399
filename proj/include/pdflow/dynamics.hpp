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

#ifndef PDFLOW_DYNAMICS_HPP_
#define PDFLOW_DYNAMICS_HPP_

#include <string>
#include <vector>

#include "pdflow/lagrangian.hpp"
#include "pdflow/problem.hpp"

namespace pdflow {

/// Scalars of the primal-dual flow
///
///   m(t) x'' + alpha/t^q x' + gamma d/dt grad_x L_t(x, l) + t^s grad_x L_t(x, l) = 0
///   l' = (alpha-1)(t^(q+s) - gamma q t^(q-1)) grad_l L_t(x + theta(t) x', l)
///
/// gamma = 0 switches Hessian damping off; it is accepted and reported as a
/// warning by ValidateAndClassify.
struct ParameterSet {
  double alpha = 3.0;
  double q = 0.1;
  double s = 0.1;
  double gamma = 1.0;
  RegularizationSpec reg;
  double t0 = 1.0;

  /// Throws kInput on alpha <= 1, q outside (0,1), s <= 0, gamma < 0,
  /// c <= 0, p outside (0,1) or t0 <= 0.
  static ParameterSet Make(double alpha, double q, double s, double gamma, double c, double p,
                           double t0 = 1.0);
};

struct MassValues {
  double m = 1.0;
  double mdot = 0.0;
  double mddot = 0.0;
};

/// m(t) = kappa t^(-sigma), sigma >= 0. A constant mass is sigma = 0.
class MassFunction {
 public:
  static MassFunction Constant(double kappa);
  static MassFunction PowerLaw(double kappa, double sigma);

  bool is_constant() const { return sigma_ == 0.0; }
  double kappa() const { return kappa_; }
  double sigma() const { return sigma_; }

  MassValues Eval(double t) const;

 private:
  MassFunction(double kappa, double sigma) : kappa_(kappa), sigma_(sigma) {}
  double kappa_;
  double sigma_;
};

/// Closed-form (m, m', m'').
MassValues EvalMass(const MassFunction& mass, double t);

/// Asymptotic check of the two mass assumptions for the power-law family:
///   A1: gamma / t^(q+s) <= m(t) <= k1 / t^q   for large t
///   A2: t |m'(t)| <= k2 m(t), t^2 |m''(t)| <= k2 m(t)
struct AssumptionReport {
  bool satisfies_a1 = false;
  double k1 = 0.0;
  bool satisfies_a2 = false;
  double k2 = 0.0;
  std::vector<std::string> violations;
};

AssumptionReport CheckMassAssumptions(const ParameterSet& params, const MassFunction& mass);

struct TrajectoryState {
  double t = 0.0;
  Vec x;
  Vec v;  // x'
  Vec lambda;
};

/// (alpha-1)(t^(q+s) - gamma q t^(q-1)): the dual gain, also the denominator
/// of theta(t).
double DualGain(const ParameterSet& params, double t);

/// Extrapolation coefficient theta(t). Throws kDomain where the dual gain
/// vanishes or is negative.
double Theta(const ParameterSet& params, const MassFunction& mass, double t);

/// Throws kDomain unless the dual gain is positive on [t0, T]. The gain is
/// increasing in t, so checking t0 is sufficient.
void CheckTimeWindow(const ParameterSet& params, double T);

struct FieldValue {
  Vec xdot;
  Vec vdot;
  Vec lambdadot;
};

/// First-order form of the flow with state (x, v, l). The dual derivative is
/// explicit, so the Hessian-damping term
///   d/dt grad_x L_t = H(x) v + A' l' + eps(t) v - c p t^(-p-1) x
/// needs no implicit solve.
FieldValue VectorField(const Problem& prob, const ParameterSet& params, const MassFunction& mass,
                       const TrajectoryState& state);

/// The flow bound to one problem and parameter choice. Flat state layout is
/// [x (n), v (n), lambda (m)].
class PrimalDualFlow {
 public:
  PrimalDualFlow(Problem prob, ParameterSet params, MassFunction mass);

  const Problem& problem() const { return prob_; }
  const ParameterSet& params() const { return params_; }
  const MassFunction& mass() const { return mass_; }

  Eigen::Index state_size() const { return 2 * prob_.dim_x() + prob_.dim_y(); }
  Vec Pack(const TrajectoryState& state) const;
  TrajectoryState Unpack(double t, const Vec& y) const;

  FieldValue Evaluate(const TrajectoryState& state) const;
  void operator()(double t, const Vec& y, Vec& dy) const;

 private:
  Problem prob_;
  ParameterSet params_;
  MassFunction mass_;
};

enum class Regime {
  kThm31ii,
  kThm31iii,
  kThm32ii,
  kThm32iii,
  kThm33ii,
  kThm33iii,
  kOutsideGuarantees,
};

std::string RegimeName(Regime regime);

/// Decay exponents of the theorem bounds. Gap, objective residual and
/// feasibility share one bound, sqrt(m) t^(E/2) + t^(-p); the squared distance
/// to the saddle path is m t^E. For m = kappa t^(-sigma) this gives
///   gap = feasibility = max((E - sigma)/2, -p),  distance = E - sigma.
struct PredictedExponents {
  double envelope = 0.0;  // E
  double gap = 0.0;
  double feasibility = 0.0;
  double distance = 0.0;
};

struct RegimeReport {
  Regime regime = Regime::kOutsideGuarantees;
  /// Regime selected from the parameter inequalities alone. Differs from
  /// `regime` only when a mass assumption fails.
  Regime nominal = Regime::kOutsideGuarantees;
  /// Every regime whose inequalities hold, in preference order.
  std::vector<Regime> applicable;
  double r = 0.0;  // max{q, p - q - s}
  bool has_prediction = false;
  PredictedExponents exponents;  // from `nominal`; NaN when none applies
  std::vector<std::string> violated_conditions;
  std::vector<std::string> warnings;
  AssumptionReport assumptions;
};

/// Total: never throws on a constructed ParameterSet. Preference when several
/// theorem families apply: Thm3.3 > Thm3.2 > Thm3.1.
RegimeReport ValidateAndClassify(const ParameterSet& params, const MassFunction& mass);

PredictedExponents ExponentsFor(Regime regime, const ParameterSet& params, double sigma);

}  // namespace pdflow

#endif  // PDFLOW_DYNAMICS_HPP_
