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

#include <gtest/gtest.h>

#include <cmath>

#include "pdflow/error.hpp"

namespace pdflow {
namespace {

Vec Scalar(double v) { return Vec::Constant(1, v); }

TEST(LogSpacedGridTest, EndpointsExactAndIncreasing) {
  const auto g = LogSpacedGrid(1.0, 1000.0, 400);
  ASSERT_EQ(g.size(), 400u);
  EXPECT_EQ(g.front(), 1.0);
  EXPECT_EQ(g.back(), 1000.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_NEAR(g[133], std::pow(10.0, 1.0), 1e-12 * 10);
  EXPECT_THROW(LogSpacedGrid(0.0, 1.0, 5), Error);
  EXPECT_THROW(LogSpacedGrid(2.0, 1.0, 5), Error);
  EXPECT_THROW(LogSpacedGrid(1.0, 2.0, 1), Error);
}

TEST(IntegratorConfigTest, Validation) {
  IntegratorConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.rel_tol = 0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.sample_count = 1;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = {};
  cfg.max_steps = 0;
  EXPECT_THROW(cfg.Validate(), Error);
}

TEST(IntegrateOdeTest, ExponentialDecayClosedForm) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-14;
  const auto grid = LogSpacedGrid(1.0, 20.0, 50);
  const OdeSamples s =
      IntegrateOde([](double, const Vec& y, Vec& dy) { dy = -y; }, 1.0, Scalar(1.0), grid, cfg);
  ASSERT_EQ(s.t.size(), grid.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    EXPECT_EQ(s.t[i], grid[i]);
    const double exact = std::exp(-(s.t[i] - 1.0));
    EXPECT_NEAR(s.y[i](0), exact, 1e-8 * exact + 1e-12);
  }
  EXPECT_GT(s.stats.accepted, 0);
  EXPECT_LE(s.stats.max_step, 0.1 * 20.0);
}

TEST(IntegrateOdeTest, OscillatorEnergyDrift) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  const double t0 = 1.0, T = 1.0 + 20 * M_PI;
  const auto grid = LogSpacedGrid(t0, T, 200);
  Vec y0(2);
  y0 << 1.0, 0.0;
  const OdeSamples s = IntegrateOde(
      [](double, const Vec& y, Vec& dy) {
        dy.resize(2);
        dy << y(1), -y(0);
      },
      t0, y0, grid, cfg);
  double drift = 0;
  for (const Vec& y : s.y) drift = std::max(drift, std::abs(0.5 * y.squaredNorm() - 0.5));
  EXPECT_LE(drift, 1e-6);
  // Closed form at the end: x = cos(t - t0).
  EXPECT_NEAR(s.y.back()(0), 1.0, 1e-6);
}

TEST(IntegrateOdeTest, DenseOutputBetweenSteps) {
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-14;
  cfg.max_step_factor = 1.0;
  // Many samples per step: interpolated, not stepped onto.
  const auto grid = LogSpacedGrid(1.0, 3.0, 300);
  const OdeSamples s = IntegrateOde(
      [](double t, const Vec& y, Vec& dy) { dy = Scalar(std::cos(t)) + 0.0 * y; }, 1.0,
      Scalar(std::sin(1.0)), grid, cfg);
  EXPECT_LT(s.stats.accepted, 300);
  // Cubic Hermite: O(h^4) between steps, step accuracy at the endpoint.
  for (std::size_t i = 0; i < s.t.size(); ++i) EXPECT_NEAR(s.y[i](0), std::sin(s.t[i]), 1e-6);
  EXPECT_NEAR(s.y.back()(0), std::sin(3.0), 1e-9);
}

TEST(IntegrateOdeTest, StepBudgetTruncates) {
  IntegratorConfig cfg;
  cfg.max_steps = 20;
  const auto grid = LogSpacedGrid(1.0, 100.0, 50);
  try {
    IntegrateOde([](double, const Vec& y, Vec& dy) { dy = -y; }, 1.0, Scalar(1.0), grid, cfg);
    FAIL() << "expected truncation";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTruncated);
    EXPECT_FALSE(e.partial.t.empty());
    EXPECT_EQ(e.partial.t.front(), 1.0);
    EXPECT_GT(e.last_t, 1.0);
    EXPECT_LT(e.last_t, 100.0);
  }
}

TEST(IntegrateOdeTest, FiniteTimeBlowUpDiverges) {
  // y' = y^2, y(1) = 1 blows up at t = 2.
  const auto grid = LogSpacedGrid(1.0, 3.0, 20);
  try {
    IntegrateOde([](double, const Vec& y, Vec& dy) { dy = y.cwiseProduct(y); }, 1.0, Scalar(1.0),
                 grid, IntegratorConfig{});
    FAIL() << "expected divergence";
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
    // The discrete solution need not blow up exactly at 2.
    EXPECT_NEAR(e.last_t, 2.0, 0.05);
    EXPECT_TRUE(e.last_y.allFinite());
  }
}

TEST(IntegrateOdeTest, DivergenceAtTheInitialTime) {
  const auto grid = LogSpacedGrid(1.0, 3.0, 5);
  try {
    IntegrateOde([](double, const Vec&, Vec&) { Fail(ErrorCode::kDiverged, "nan"); }, 1.0,
                 Scalar(1.0), grid, IntegratorConfig{});
    FAIL();
  } catch (const IntegrationError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDiverged);
    EXPECT_EQ(e.last_t, 1.0);
    ASSERT_EQ(e.partial.t.size(), 1u);
    EXPECT_EQ(e.partial.y[0](0), 1.0);
  }
}

TEST(IntegrateOdeTest, OtherErrorsPropagate) {
  const auto grid = LogSpacedGrid(1.0, 3.0, 5);
  try {
    IntegrateOde([](double, const Vec&, Vec&) { Fail(ErrorCode::kSolver, "boom"); }, 1.0,
                 Scalar(1.0), grid, IntegratorConfig{});
    FAIL() << "expected solver error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSolver);
  }
}

TEST(IntegrateOdeTest, GridMustStartAtT0) {
  EXPECT_THROW(IntegrateOde([](double, const Vec& y, Vec& dy) { dy = y; }, 1.0, Scalar(1.0),
                            {2.0, 3.0}, IntegratorConfig{}),
               Error);
}

TEST(IntegrateTest, DeterministicAndShaped) {
  const PrimalDualFlow flow(MakeToyProblem(1, 2, 1), ParameterSet::Make(3, 0.1, 0.1, 1, 5, 0.1),
                            MassFunction::PowerLaw(1, 0.15));
  TrajectoryState s0{1.0, Vec::Ones(3), -Vec::Ones(3), Vec::Ones(1)};
  IntegratorConfig cfg;
  cfg.sample_count = 60;
  const Trajectory a = Integrate(flow, s0, 30.0, cfg);
  const Trajectory b = Integrate(flow, s0, 30.0, cfg);
  ASSERT_EQ(a.samples.size(), 60u);
  EXPECT_EQ(a.samples.back().t, 30.0);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].x, b.samples[i].x);
    EXPECT_EQ(a.samples[i].lambda, b.samples[i].lambda);
  }
  EXPECT_EQ(a.step_sizes.size(), a.samples.size());
  s0.t = 2.0;
  EXPECT_THROW(Integrate(flow, s0, 30.0, cfg), Error);
}

}  // namespace
}  // namespace pdflow
