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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pdflow/error.hpp"

namespace pdflow {
namespace {

// Toy instance with weights (1, 2, 1) and its usual parameters.
ParameterSet ToyParams() { return ParameterSet::Make(3.0, 0.1, 0.1, 1.0, 5.0, 0.1); }
MassFunction ToyMass() { return MassFunction::PowerLaw(1.0, 0.15); }

Vec V3(double a, double b, double c) { return Eigen::Vector3d(a, b, c); }

Trajectory Path(const std::vector<double>& ts, const std::function<double(double)>& x,
                const std::function<double(double)>& v) {
  Trajectory tr;
  for (double t : ts) {
    TrajectoryState s;
    s.t = t;
    s.x = Vec::Constant(1, x(t));
    s.v = Vec::Constant(1, v(t));
    s.lambda = Vec::Constant(1, x(t));
    tr.samples.push_back(s);
  }
  return tr;
}

std::vector<MetricRow> Rows(const std::vector<double>& ts,
                            const std::function<double(double)>& metric) {
  std::vector<MetricRow> rows;
  for (double t : ts) {
    MetricRow r;
    r.t = t;
    r.obj_residual = metric(t);
    rows.push_back(r);
  }
  return rows;
}

TEST(EnergyTest, VanishesOnTheSaddlePath) {
  const Problem prob = MakeRandomQp(3, 4, 8);
  const ParameterSet params = ParameterSet::Make(1.1, 0.06, 0.7, 2.0, 0.01, 0.9);
  const MassFunction mass = MassFunction::PowerLaw(1.0, 0.4);
  for (double t : {1.0, 7.0, 300.0}) {
    const SaddlePoint sp = ComputeSaddlePoint(prob, params.reg, t);
    TrajectoryState s{t, sp.x, Vec::Zero(8), sp.lambda};
    const EnergyReport er = ComputeEnergy(prob, params, mass, s, sp);
    EXPECT_LT(er.theta_term.norm(), 1e-9) << t;
    EXPECT_NEAR(er.energy, 0.0, 1e-15) << t;
  }
}

TEST(EnergyTest, MatchesStraightLineEvaluation) {
  const Problem prob = MakeToyProblem(1, 2, 1);
  const ParameterSet params = ToyParams();
  const MassFunction mass = ToyMass();
  const double t = 1.0;
  const Vec x = V3(1, 1, -1), v = V3(-1, -1, 1), l = Vec::Constant(1, 1.0);
  const SaddlePoint sp = ComputeSaddlePoint(prob, params.reg, t);

  // Written out by hand: f = (w.x)^2, A = (1, -2, 1), b = 0.
  const double alpha = 3, q = 0.1, s = 0.1, g = 1, c = 5, p = 0.1, sigma = 0.15;
  const double m = std::pow(t, -sigma), md = -sigma * std::pow(t, -sigma - 1);
  const double a = m * std::pow(t, q + s) - 2 * g * q * m * std::pow(t, q - 1) -
                   g * md * std::pow(t, q) + g;
  const double b = -(alpha - 1) * (q * m * std::pow(t, q - 1) + md * std::pow(t, q) - 1);
  const Eigen::Vector3d w(1, 2, 1), arow(1, -2, 1);
  const double eps = c / std::pow(t, p);
  const Vec gx = 2 * w.dot(x) * w + arow * l(0) + eps * x;
  const Vec th = (alpha - 1) * (x - sp.x) + std::pow(t, q) * (m * v + g * gx);
  const double gap = oracle::RegLagrangian(prob, c, p, t, x, sp.lambda) -
                     oracle::RegLagrangian(prob, c, p, t, sp.x, sp.lambda);
  const double expected = a * std::pow(t, q) * gap + 0.5 * th.squaredNorm() +
                          0.5 * b * (x - sp.x).squaredNorm() +
                          0.5 * (l - sp.lambda).squaredNorm();

  const EnergyReport er = ComputeEnergy(prob, params, mass, {t, x, v, l}, sp);
  EXPECT_NEAR(er.a_t, a, 1e-14);
  EXPECT_NEAR(er.b_t, b, 1e-14);
  EXPECT_LE(std::abs(er.energy - expected), 1e-12 * std::abs(expected));
  EXPECT_EQ(er.energy, er.gap_term + er.theta_sq_term + er.primal_term + er.dual_term);
}

TEST(EnergyTest, TimeMismatchIsAnInputError) {
  const Problem prob = MakeToyProblem(1, 2, 1);
  const SaddlePoint sp = ComputeSaddlePoint(prob, ToyParams().reg, 2.0);
  try {
    ComputeEnergy(prob, ToyParams(), ToyMass(), {1.0, sp.x, sp.x, sp.lambda}, sp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(EnergyTest, NonnegativeWhereCoefficientsAre) {
  const Problem prob = MakeRandomQp(42, 5, 10);
  const ParameterSet params = ParameterSet::Make(1.1, 0.06, 0.7, 2.0, 0.01, 0.9);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  int checked = 0;
  for (double sigma : {0.0, 0.1, 0.4, 0.7}) {
    const MassFunction mass = MassFunction::PowerLaw(1.0, sigma);
    for (double t : LogSpacedGrid(1.0, 1000.0, 25)) {
      const SaddlePoint sp = ComputeSaddlePoint(prob, params.reg, t);
      TrajectoryState s{t, Vec(10), Vec(10), Vec(5)};
      for (auto* vec : {&s.x, &s.v, &s.lambda}) {
        for (Eigen::Index i = 0; i < vec->size(); ++i) (*vec)(i) = nd(rng);
      }
      const EnergyReport er = ComputeEnergy(prob, params, mass, s, sp);
      if (er.a_t >= 0 && er.b_t >= 0) {
        ++checked;
        EXPECT_GE(er.gap_term, 0.0);
        EXPECT_GE(er.energy, 0.0) << "sigma=" << sigma << " t=" << t;
      }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(MetricsTest, ZeroAtTheMinimalNormPair) {
  const Problem prob = MakeRandomQp(5, 3, 6);
  const ParameterSet params = ParameterSet::Make(1.1, 0.06, 0.7, 2.0, 0.01, 0.9);
  const MassFunction mass = MassFunction::Constant(1.0);
  const MinNormSolution mn = ComputeMinNormSolution(prob);
  Trajectory tr;
  tr.samples.push_back({2.0, mn.x, Vec::Zero(6), mn.lambda});
  const auto rows =
      ComputeMetrics(prob, params, mass, tr, SaddlePath(prob, params.reg, {2.0}), mn);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].obj_residual, 0.0, 1e-12);
  EXPECT_NEAR(rows[0].feasibility, 0.0, 1e-12);
  EXPECT_NEAR(rows[0].lagrangian_gap, 0.0, 1e-12);
  EXPECT_EQ(rows[0].dist_minnorm, 0.0);
  EXPECT_GT(rows[0].dist_saddle_sq, 0.0);  // the saddle path has not reached (x*, l*) yet
}

TEST(MetricsTest, ToyStartingPoint) {
  const Problem prob = MakeToyProblem(1, 2, 1);
  const ParameterSet params = ToyParams();
  const MinNormSolution mn = ComputeMinNormSolution(prob);
  Trajectory tr;
  tr.samples.push_back({1.0, V3(1, 1, -1), V3(-1, -1, 1), Vec::Constant(1, 1.0)});
  tr.step_sizes = {0.0};
  const auto rows =
      ComputeMetrics(prob, params, ToyMass(), tr, SaddlePath(prob, params.reg, {1.0}), mn);
  EXPECT_NEAR(rows[0].feasibility, 2.0, 1e-15);
  EXPECT_NEAR(rows[0].obj_residual, 4.0, 1e-15);
  EXPECT_NEAR(rows[0].theta, oracle::Theta(3, 0.1, 0.1, 1, 1, -0.15, 1.0), 1e-14);
}

TEST(MetricsTest, LagrangianGapTermByTerm) {
  const Problem prob = MakeRandomQp(11, 4, 9);
  const ParameterSet params = ParameterSet::Make(1.1, 0.06, 0.7, 2.0, 0.01, 0.9);
  const MinNormSolution mn = ComputeMinNormSolution(prob);
  const Eigen::VectorXd star = oracle::MinNormKkt(prob.quadratic()->Q, prob.quadratic()->k,
                                                  prob.A(), prob.b());
  const Vec xs = star.head(9), ls = star.tail(4);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Trajectory tr;
  std::vector<double> ts = LogSpacedGrid(1.0, 50.0, 50);
  for (double t : ts) {
    TrajectoryState s{t, Vec(9), Vec::Zero(9), Vec(4)};
    for (Eigen::Index i = 0; i < 9; ++i) s.x(i) = xs(i) + nd(rng);
    for (Eigen::Index i = 0; i < 4; ++i) s.lambda(i) = nd(rng);
    tr.samples.push_back(s);
  }
  const auto rows = ComputeMetrics(prob, params, MassFunction::Constant(1.0), tr,
                                   SaddlePath(prob, params.reg, ts), mn);
  const double fs = prob.objective().Value(xs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vec& x = tr.samples[i].x;
    const double expected =
        prob.objective().Value(x) - fs + ls.dot(prob.A() * x - prob.b());
    EXPECT_NEAR(rows[i].lagrangian_gap, expected, 1e-9 * (1 + std::abs(expected)));
    EXPECT_GE(rows[i].lagrangian_gap, -1e-10);
    EXPECT_NEAR(rows[i].feasibility, (prob.A() * x - prob.b()).norm(), 1e-12);
  }
}

TEST(MetricsTest, ColumnLookup) {
  MetricRow r;
  r.t = 1;
  r.energy = 2;
  r.step_size = 3;
  EXPECT_EQ(MetricValue(r, "t"), 1);
  EXPECT_EQ(MetricValue(r, "energy"), 2);
  EXPECT_EQ(MetricValue(r, "step_size"), 3);
  for (auto col : kMetricColumns) EXPECT_NO_THROW(MetricValue(r, col));
  EXPECT_THROW(MetricValue(r, "speed"), Error);
  EXPECT_EQ(kMetricColumns.front(), "t");
}

TEST(MetricsTest, LengthMismatchRejected) {
  const Problem prob = MakeToyProblem(1, 2, 1);
  Trajectory tr;
  tr.samples.push_back({1.0, V3(1, 1, -1), V3(0, 0, 0), Vec::Zero(1)});
  EXPECT_THROW(ComputeMetrics(prob, ToyParams(), ToyMass(), tr, {},
                              ComputeMinNormSolution(prob)),
               Error);
}

TEST(FitRateTest, ExactPowerLaw) {
  const auto ts = LogSpacedGrid(10.0, 1000.0, 60);
  const auto est = FitRate(Rows(ts, [](double t) { return std::pow(t, -2.0); }), "obj_residual",
                           10.0, 1000.0, -1.0);
  EXPECT_NEAR(est.fitted_slope, -2.0, 1e-9);
  EXPECT_NEAR(est.residual_r2, 1.0, 1e-12);
  EXPECT_EQ(est.samples_used, 60);
  EXPECT_EQ(est.verdict, Verdict::kFasterThanBound);
}

TEST(FitRateTest, ScaleInvariance) {
  const auto ts = LogSpacedGrid(1.0, 100.0, 40);
  const auto base = FitRate(Rows(ts, [](double t) { return std::pow(t, -0.5); }),
                            "obj_residual", 1.0, 100.0, -0.5);
  EXPECT_NEAR(base.fitted_slope, -0.5, 1e-12);
  for (double k : {5.0, 1e-6, 3.7e8}) {
    const auto est = FitRate(Rows(ts, [k](double t) { return k * std::pow(t, -0.5); }),
                             "obj_residual", 1.0, 100.0, -0.5);
    EXPECT_NEAR(est.fitted_slope, base.fitted_slope, 1e-12);
    EXPECT_NEAR(est.intercept, base.intercept + std::log(k), 1e-10);
    EXPECT_EQ(est.verdict, Verdict::kWithinBound);
  }
}

TEST(FitRateTest, OscillatingPowerLaw) {
  const auto ts = LogSpacedGrid(10.0, 1000.0, 200);
  const auto est =
      FitRate(Rows(ts, [](double t) { return (2 + std::sin(std::log(t))) / t; }), "obj_residual",
              10.0, 1000.0, -1.0);
  EXPECT_NEAR(est.fitted_slope, -1.0, 0.15);
}

TEST(FitRateTest, VerdictBoundaries) {
  const auto ts = LogSpacedGrid(1.0, 100.0, 20);
  const auto rows = Rows(ts, [](double t) { return 1 / t; });
  EXPECT_EQ(FitRate(rows, "obj_residual", 1, 100, -1.05).verdict, Verdict::kWithinBound);
  EXPECT_EQ(FitRate(rows, "obj_residual", 1, 100, -1.2).verdict, Verdict::kViolatesBound);
  EXPECT_EQ(FitRate(rows, "obj_residual", 1, 100, -0.8).verdict, Verdict::kFasterThanBound);
  EXPECT_EQ(FitRate(rows, "obj_residual", 1, 100, std::nan("")).verdict,
            Verdict::kNoPrediction);
  EXPECT_EQ(VerdictName(Verdict::kViolatesBound), "violates_bound");
}

TEST(FitRateTest, FloorAndWindow) {
  const auto ts = LogSpacedGrid(1.0, 1e4, 41);
  // Drops below the floor at t = 1e3.
  auto rows = Rows(ts, [](double t) { return t < 1e3 ? std::pow(t, -3.0) : 1e-20; });
  const auto est = FitRate(rows, "obj_residual", 1.0, 1e4, -3.0);
  EXPECT_EQ(est.floored, 11);
  EXPECT_EQ(est.samples_used, 30);
  EXPECT_NEAR(est.fitted_slope, -3.0, 1e-9);
  // Window with fewer than 8 usable rows.
  try {
    FitRate(rows, "obj_residual", 500.0, 1e4, -3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEstimation);
  }
  rows[0].obj_residual = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(FitRate(rows, "obj_residual", 1.0, 1e4, -3.0).floored, 12);
}

TEST(FitRateTest, PredictedSlopeFromRegime) {
  const ParameterSet params = ToyParams();
  const RegimeReport rep = ValidateAndClassify(params, ToyMass());
  ASSERT_TRUE(rep.has_prediction);
  EXPECT_EQ(PredictedSlope(rep, "obj_residual"), rep.exponents.gap);
  EXPECT_EQ(PredictedSlope(rep, "lagrangian_gap"), rep.exponents.gap);
  EXPECT_EQ(PredictedSlope(rep, "feasibility"), rep.exponents.feasibility);
  EXPECT_EQ(PredictedSlope(rep, "dist_saddle_sq"), rep.exponents.distance);
  EXPECT_EQ(PredictedSlope(rep, "energy"), rep.exponents.distance);
  EXPECT_TRUE(std::isnan(PredictedSlope(rep, "theta")));
}

TEST(OscillationTest, MonotonePathHasNoSignChanges) {
  const auto ts = LogSpacedGrid(1.0, 100.0, 100);
  const Trajectory tr = Path(ts, [](double t) { return 1 / t; },
                             [](double t) { return -1 / (t * t); });
  const auto m = MeasureOscillation(tr, ComponentSelector::Primal(0));
  EXPECT_EQ(m.sign_changes, 0);
  EXPECT_NEAR(m.total_variation, 1.0 - 0.01, 1e-12);
  EXPECT_EQ(MeasureOscillation(tr, ComponentSelector::Dual(0)).sign_changes, 0);
}

TEST(OscillationTest, DampedSine) {
  std::vector<double> ts;
  const double t_end = 1 + 6 * std::numbers::pi;
  for (int i = 0; i <= 2000; ++i) ts.push_back(1 + (t_end - 1) * i / 2000.0);
  const Trajectory tr = Path(ts, [](double t) { return std::sin(t) / t; },
                             [](double t) { return std::cos(t) / t - std::sin(t) / (t * t); });
  EXPECT_GE(MeasureOscillation(tr, ComponentSelector::Primal(0)).sign_changes, 5);
  EXPECT_GE(MeasureOscillation(tr, ComponentSelector::Dual(0)).sign_changes, 5);
  // Starting the window later drops the early extrema.
  EXPECT_LT(MeasureOscillation(tr, ComponentSelector::Primal(0), nullptr, 10.0).sign_changes,
            MeasureOscillation(tr, ComponentSelector::Primal(0)).sign_changes);
}

TEST(OscillationTest, ObjectiveSelector) {
  const Problem prob = MakeToyProblem(1, 2, 1);
  Trajectory tr;
  // x(t) = (1, 0, 0) cos t: f = cos^2 t, df/dt = -sin 2t.
  for (int i = 0; i <= 400; ++i) {
    const double t = 1 + 0.01 * i;
    tr.samples.push_back({t, V3(std::cos(t), 0, 0), V3(-std::sin(t), 0, 0), Vec::Zero(1)});
  }
  const auto m = MeasureOscillation(tr, ComponentSelector::Objective(), &prob);
  EXPECT_EQ(m.sign_changes, 3);  // pi/2, pi, 3pi/2
  EXPECT_THROW(MeasureOscillation(tr, ComponentSelector::Objective()), Error);
  EXPECT_THROW(MeasureOscillation(tr, ComponentSelector::Primal(3)), Error);
}

}  // namespace
}  // namespace pdflow
