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

#include "pdflow/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdflow/error.hpp"
#include "text_util.hpp"

namespace pdflow {

namespace {

using internal::FormatDouble;

constexpr double kTie = 1e-12;

}  // namespace

ParameterSet ParameterSet::Make(double alpha, double q, double s, double gamma, double c,
                                double p, double t0) {
  if (!(alpha > 1.0)) Fail(ErrorCode::kInput, "parameters: alpha must be > 1");
  if (!(q > 0.0 && q < 1.0)) Fail(ErrorCode::kInput, "parameters: q must lie in (0, 1)");
  if (!(s > 0.0)) Fail(ErrorCode::kInput, "parameters: s must be > 0");
  if (!(gamma >= 0.0)) Fail(ErrorCode::kInput, "parameters: gamma must be >= 0");
  if (!(t0 > 0.0)) Fail(ErrorCode::kInput, "parameters: t0 must be > 0");
  ParameterSet out;
  out.alpha = alpha;
  out.q = q;
  out.s = s;
  out.gamma = gamma;
  out.reg = RegularizationSpec::Make(c, p);
  out.t0 = t0;
  return out;
}

MassFunction MassFunction::Constant(double kappa) { return PowerLaw(kappa, 0.0); }

MassFunction MassFunction::PowerLaw(double kappa, double sigma) {
  if (!(kappa > 0.0)) Fail(ErrorCode::kInput, "mass: kappa must be > 0");
  if (!(sigma >= 0.0)) Fail(ErrorCode::kInput, "mass: sigma must be >= 0 (non-increasing mass)");
  return MassFunction(kappa, sigma);
}

MassValues MassFunction::Eval(double t) const {
  if (sigma_ == 0.0) return {kappa_, 0.0, 0.0};
  const double m = kappa_ * std::pow(t, -sigma_);
  return {m, -sigma_ * m / t, sigma_ * (sigma_ + 1.0) * m / (t * t)};
}

MassValues EvalMass(const MassFunction& mass, double t) { return mass.Eval(t); }

AssumptionReport CheckMassAssumptions(const ParameterSet& params, const MassFunction& mass) {
  AssumptionReport rep;
  const double sigma = mass.sigma();
  const double q = params.q, s = params.s;

  // Upper bound kappa t^(-sigma) <= k1 t^(-q) eventually iff sigma >= q.
  const bool upper = sigma >= q - kTie;
  // Lower bound gamma t^(-(q+s)) <= kappa t^(-sigma) eventually.
  bool lower = true;
  if (params.gamma > 0.0) {
    if (sigma > q + s + kTie) {
      lower = false;
    } else if (std::abs(sigma - (q + s)) <= kTie) {
      lower = params.gamma <= mass.kappa();
    }
  }
  rep.satisfies_a1 = upper && lower;
  rep.k1 = mass.kappa();
  if (!upper) rep.violations.push_back("A1: m(t)<=k1/t^q (needs sigma>=q)");
  if (!lower) rep.violations.push_back("A1: gamma/t^(q+s)<=m(t) (needs sigma<=q+s)");

  // t|m'| = sigma m and t^2|m''| = sigma(sigma+1) m hold for every t.
  rep.satisfies_a2 = true;
  rep.k2 = std::max(sigma, sigma * (sigma + 1.0));
  return rep;
}

double DualGain(const ParameterSet& params, double t) {
  return (params.alpha - 1.0) *
         (std::pow(t, params.q + params.s) - params.gamma * params.q * std::pow(t, params.q - 1.0));
}

double Theta(const ParameterSet& params, const MassFunction& mass, double t) {
  const double den = DualGain(params, t);
  if (!(den > 0.0)) {
    Fail(ErrorCode::kDomain, "theta: denominator (alpha-1)(t^(q+s)-gamma q t^(q-1)) is " +
                                 FormatDouble(den) + " at t=" + FormatDouble(t));
  }
  const MassValues mv = mass.Eval(t);
  const double q = params.q, g = params.gamma;
  const double num = mv.m * std::pow(t, 2.0 * q + params.s) + g * std::pow(t, q) -
                     2.0 * mv.m * g * q * std::pow(t, 2.0 * q - 1.0) -
                     g * mv.mdot * std::pow(t, 2.0 * q);
  return num / den;
}

void CheckTimeWindow(const ParameterSet& params, double T) {
  if (!(T > params.t0)) {
    Fail(ErrorCode::kDomain, "time window: horizon " + FormatDouble(T) +
                                 " must exceed t0=" + FormatDouble(params.t0));
  }
  if (!(DualGain(params, params.t0) > 0.0)) {
    Fail(ErrorCode::kDomain, "time window: dual gain vanishes or is negative at t=" +
                                 FormatDouble(params.t0) +
                                 "; choose t0 with t0^(s+1) > gamma q");
  }
}

FieldValue VectorField(const Problem& prob, const ParameterSet& params, const MassFunction& mass,
                       const TrajectoryState& state) {
  const double t = state.t;
  prob.CheckPrimal(state.x);
  prob.CheckPrimal(state.v);
  prob.CheckDual(state.lambda);
  if (!(t > 0.0)) Fail(ErrorCode::kDomain, "vector field: t must be positive");

  const Mat& A = prob.A();
  const double eps = params.reg.Weight(t);
  const double theta = Theta(params, mass, t);
  const MassValues mv = mass.Eval(t);

  FieldValue out;
  out.xdot = state.v;
  out.lambdadot =
      DualGain(params, t) * (A * (state.x + theta * state.v) - prob.b() - eps * state.lambda);

  const Vec grad_x =
      prob.objective().Gradient(state.x) + A.transpose() * state.lambda + eps * state.x;
  Vec force = (params.alpha / std::pow(t, params.q)) * state.v + std::pow(t, params.s) * grad_x;
  if (params.gamma != 0.0) {
    const Vec total_derivative = prob.objective().HessianVectorProduct(state.x, state.v) +
                                 A.transpose() * out.lambdadot + eps * state.v -
                                 params.reg.WeightDecay(t) * state.x;
    force += params.gamma * total_derivative;
  }
  out.vdot = -force / mv.m;

  if (!out.vdot.allFinite() || !out.lambdadot.allFinite()) {
    Fail(ErrorCode::kDiverged, "vector field: non-finite derivative at t=" + FormatDouble(t));
  }
  return out;
}

PrimalDualFlow::PrimalDualFlow(Problem prob, ParameterSet params, MassFunction mass)
    : prob_(std::move(prob)), params_(params), mass_(mass) {}

Vec PrimalDualFlow::Pack(const TrajectoryState& state) const {
  prob_.CheckPrimal(state.x);
  prob_.CheckPrimal(state.v);
  prob_.CheckDual(state.lambda);
  Vec y(state_size());
  y << state.x, state.v, state.lambda;
  return y;
}

TrajectoryState PrimalDualFlow::Unpack(double t, const Vec& y) const {
  const Eigen::Index n = prob_.dim_x(), m = prob_.dim_y();
  if (y.size() != state_size()) Fail(ErrorCode::kInput, "flow: flat state has wrong length");
  return {t, y.head(n), y.segment(n, n), y.tail(m)};
}

FieldValue PrimalDualFlow::Evaluate(const TrajectoryState& state) const {
  return VectorField(prob_, params_, mass_, state);
}

void PrimalDualFlow::operator()(double t, const Vec& y, Vec& dy) const {
  const FieldValue f = Evaluate(Unpack(t, y));
  dy.resize(state_size());
  dy << f.xdot, f.vdot, f.lambdadot;
}

std::string RegimeName(Regime regime) {
  switch (regime) {
    case Regime::kThm31ii: return "Thm3.1(ii)";
    case Regime::kThm31iii: return "Thm3.1(iii)";
    case Regime::kThm32ii: return "Thm3.2(ii)";
    case Regime::kThm32iii: return "Thm3.2(iii)";
    case Regime::kThm33ii: return "Thm3.3(ii)";
    case Regime::kThm33iii: return "Thm3.3(iii)";
    case Regime::kOutsideGuarantees: return "outside_guarantees";
  }
  return "unknown";
}

PredictedExponents ExponentsFor(Regime regime, const ParameterSet& params, double sigma) {
  const double q = params.q, s = params.s, p = params.reg.p;
  const double r = std::max(q, p - q - s);
  double e = std::numeric_limits<double>::quiet_NaN();
  switch (regime) {
    case Regime::kThm31ii: e = 3 * q + s + p - 2 + r; break;
    case Regime::kThm31iii: e = 2 * q + s - p - 1 + r; break;
    case Regime::kThm32ii: e = 3 * q + s - p - 1; break;
    case Regime::kThm32iii: e = q - 1; break;
    case Regime::kThm33ii: e = 4 * q + s + p - 2; break;
    case Regime::kThm33iii: e = 2 * q + 2 * p - 2; break;
    case Regime::kOutsideGuarantees: break;
  }
  PredictedExponents out;
  out.envelope = e;
  out.gap = std::max((e - sigma) / 2.0, -p);
  out.feasibility = out.gap;
  out.distance = e - sigma;
  if (std::isnan(e)) out.gap = out.feasibility = std::numeric_limits<double>::quiet_NaN();
  return out;
}

namespace {

struct Condition {
  const char* text;
  bool holds;
};

// Returns the applicable case of one theorem family, or kOutsideGuarantees.
Regime Evaluate(const char* family, const std::vector<Condition>& hypotheses,
                const Condition& case_ii, Regime regime_ii, const Condition& case_iii,
                Regime regime_iii, std::vector<std::string>& violated) {
  bool ok = true;
  for (const Condition& c : hypotheses) {
    if (!c.holds) {
      ok = false;
      violated.push_back(std::string(family) + ": " + c.text);
    }
  }
  if (!ok) return Regime::kOutsideGuarantees;
  if (case_ii.holds) return regime_ii;
  if (case_iii.holds) return regime_iii;
  violated.push_back(std::string(family) + ": neither " + case_ii.text + " nor " + case_iii.text);
  return Regime::kOutsideGuarantees;
}

}  // namespace

RegimeReport ValidateAndClassify(const ParameterSet& params, const MassFunction& mass) {
  RegimeReport rep;
  const double q = params.q, s = params.s, p = params.reg.p;
  const double half = (1.0 - q) / 2.0;
  rep.r = std::max(q, p - q - s);

  std::vector<std::string> violated;
  const Regime thm33 = Evaluate(
      "Thm3.3",
      {{"(1-q)/2<=p<1-q", half <= p && p < 1.0 - q},
       {"(1-q)/2<=2q+s<1-q", half <= 2 * q + s && 2 * q + s < 1.0 - q},
       {"4q+s+p-2<0", 4 * q + s + p - 2 < 0}},
      {"(1-q)/2<p<2q+s", half < p && p < 2 * q + s}, Regime::kThm33ii,
      {"2q+s<=p<1-q", 2 * q + s <= p && p < 1.0 - q}, Regime::kThm33iii, violated);
  const Regime thm32 = Evaluate(
      "Thm3.2",
      {{"0<p<(1-q)/2", p < half}, {"5q+2s-1<0", 5 * q + 2 * s - 1 < 0},
       {"4q+s+p-2<0", 4 * q + s + p - 2 < 0}},
      {"p<2q+s", p < 2 * q + s}, Regime::kThm32ii, {"2q+s<=p", 2 * q + s <= p},
      Regime::kThm32iii, violated);
  const Regime thm31 = Evaluate(
      "Thm3.1",
      {{"0<p<1-q", p < 1.0 - q}, {"4q+s+p-2<0", 4 * q + s + p - 2 < 0},
       {"3q+s-p-1<0", 3 * q + s - p - 1 < 0}},
      {"(1-q)/2<=p", half <= p}, Regime::kThm31ii, {"p<(1-q)/2", p < half}, Regime::kThm31iii,
      violated);

  for (Regime r : {thm33, thm32, thm31}) {
    if (r != Regime::kOutsideGuarantees) rep.applicable.push_back(r);
  }
  rep.nominal = rep.applicable.empty() ? Regime::kOutsideGuarantees : rep.applicable.front();

  rep.assumptions = CheckMassAssumptions(params, mass);
  for (const std::string& v : rep.assumptions.violations) violated.push_back(v);
  rep.violated_conditions = std::move(violated);

  const bool assumptions_ok = rep.assumptions.satisfies_a1 && rep.assumptions.satisfies_a2;
  rep.regime = assumptions_ok ? rep.nominal : Regime::kOutsideGuarantees;
  rep.has_prediction = rep.nominal != Regime::kOutsideGuarantees;
  rep.exponents = ExponentsFor(rep.nominal, params, mass.sigma());

  if (params.gamma == 0.0) {
    rep.warnings.push_back("gamma=0: Hessian damping disabled (degenerate mode)");
  }
  if (!assumptions_ok && rep.has_prediction) {
    rep.warnings.push_back("mass assumptions fail; exponents are nominal for " +
                           RegimeName(rep.nominal));
  }
  return rep;
}

}  // namespace pdflow
