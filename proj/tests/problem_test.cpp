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

#include "pdflow/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pdflow/error.hpp"

namespace pdflow {
namespace {

double MaxRelErr(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() / std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

TEST(GaussianSamplerTest, EngineMatchesStandardSequence) {
  // The standard pins the 10000th output of a default-seeded engine.
  std::mt19937_64 engine;
  engine.discard(9999);
  EXPECT_EQ(engine(), 9981545732273789042ULL);
}

TEST(GaussianSamplerTest, BoxMullerPairFromRawDraws) {
  std::mt19937_64 engine(7);
  const std::uint64_t r1 = engine(), r2 = engine();
  const double u1 = (static_cast<double>(r1 >> 11) + 1.0) * 0x1p-53;
  const double u2 = static_cast<double>(r2 >> 11) * 0x1p-53;
  const double rad = std::sqrt(-2.0 * std::log(u1));
  GaussianSampler g(7);
  EXPECT_DOUBLE_EQ(g.Next(), rad * std::cos(2 * M_PI * u2));
  EXPECT_DOUBLE_EQ(g.Next(), rad * std::sin(2 * M_PI * u2));
}

TEST(GaussianSamplerTest, MomentsLookStandard) {
  GaussianSampler g(123);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = g.Next();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(RandomQpTest, FillOrderAndStructure) {
  const int m = 3, n = 4;
  const Problem prob = MakeRandomQp(99, m, n);
  GaussianSampler g(99);
  Mat H(n, n), A(m, n);
  Vec k(n), b(m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) H(i, j) = g.Next();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g.Next();
  for (int i = 0; i < n; ++i) k(i) = g.Next();
  for (int i = 0; i < m; ++i) b(i) = g.Next();
  const QuadraticForm* qf = prob.quadratic();
  ASSERT_NE(qf, nullptr);
  EXPECT_LT((qf->Q - H.transpose() * H).norm(), 1e-12 * H.squaredNorm());
  EXPECT_EQ(qf->Q, qf->Q.transpose());
  EXPECT_EQ(qf->k, k);
  EXPECT_EQ(prob.A(), A);
  EXPECT_EQ(prob.b(), b);
  EXPECT_EQ(prob.origin().kind, "random_qp");
  ASSERT_TRUE(prob.origin().seed.has_value());
  EXPECT_EQ(*prob.origin().seed, 99u);
}

TEST(RandomQpTest, SeedDeterminism) {
  const Problem a = MakeRandomQp(42, 5, 10), b = MakeRandomQp(42, 5, 10);
  const Problem c = MakeRandomQp(43, 5, 10);
  EXPECT_EQ(a.quadratic()->Q, b.quadratic()->Q);
  EXPECT_EQ(a.A(), b.A());
  EXPECT_NE(a.A(), c.A());
}

TEST(RandomQpTest, RejectsBadDims) {
  EXPECT_THROW(MakeRandomQp(1, 0, 3), Error);
  EXPECT_THROW(MakeRandomQp(1, 2, -1), Error);
}

TEST(ToyProblemTest, CoefficientsAndValues) {
  const Problem prob = MakeToyProblem(10, 20, 10);
  Mat expected_a(1, 3);
  expected_a << 10, -20, 10;
  EXPECT_EQ(prob.A(), expected_a);
  EXPECT_EQ(prob.b(), Vec::Zero(1));
  Vec x(3);
  x << 1, 1, -1;
  // (10 + 20 - 10)^2
  EXPECT_DOUBLE_EQ(prob.objective().Value(x), 400.0);
  EXPECT_EQ(prob.origin().coefficients, (std::vector<double>{10, 20, 10}));
}

TEST(ObjectiveTest, OraclesAgreeWithFiniteDifferences) {
  const Problem qp = MakeRandomQp(5, 2, 6);
  std::vector<std::shared_ptr<const Objective>> objs = {
      std::make_shared<QuadraticObjective>(qp.quadratic()->Q, qp.quadratic()->k),
      std::make_shared<ToyObjective>(Eigen::Vector3d(1, 2, 1)),
      std::make_shared<LogSumExpObjective>(5, 0.3),
  };
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (const auto& f : objs) {
    for (int probe = 0; probe < 20; ++probe) {
      Vec x(f->dim()), v(f->dim());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        x(i) = nd(rng);
        v(i) = nd(rng);
      }
      const Vec g = f->Gradient(x);
      const Vec g_fd = oracle::Gradient([&](const Vec& y) { return f->Value(y); }, x);
      EXPECT_LT(MaxRelErr(g, g_fd), 1e-7);
      const Vec hv = f->HessianVectorProduct(x, v);
      const Vec hv_fd = oracle::Gradient(
          [&](const Vec& y) { return f->Gradient(y).dot(v); }, x);
      EXPECT_LT(MaxRelErr(hv, hv_fd), 1e-7);
    }
  }
}

TEST(ObjectiveTest, QuadraticRejectsAsymmetricQ) {
  Mat Q(2, 2);
  Q << 1, 2, 0, 1;
  EXPECT_THROW(QuadraticObjective(Q, Vec::Zero(2)), Error);
}

TEST(ObjectiveTest, ToyQuadraticFormMatchesValue) {
  const ToyObjective f(Eigen::Vector3d(1, 2, 1));
  const QuadraticForm* qf = f.AsQuadratic();
  ASSERT_NE(qf, nullptr);
  Vec x(3);
  x << 0.3, -1.2, 2.5;
  EXPECT_NEAR(0.5 * x.dot(qf->Q * x) + qf->k.dot(x), f.Value(x), 1e-12);
}

TEST(ProblemTest, DimensionChecks) {
  auto f = std::make_shared<LogSumExpObjective>(3, 0.1);
  EXPECT_THROW(Problem(f, Mat::Ones(2, 4), Vec::Zero(2)), Error);
  EXPECT_THROW(Problem(f, Mat::Ones(2, 3), Vec::Zero(3)), Error);
  const Problem ok(f, Mat::Ones(2, 3), Vec::Zero(2));
  EXPECT_THROW(ok.CheckPrimal(Vec::Zero(2)), Error);
  EXPECT_THROW(ok.CheckDual(Vec::Zero(3)), Error);
  try {
    ok.CheckPrimal(Vec::Zero(4));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
  }
}

TEST(ProblemTest, FeasibilityResidual) {
  const Problem toy = MakeToyProblem(1, 2, 1);
  Vec x(3);
  x << 1, 1, 1;
  EXPECT_DOUBLE_EQ(FeasibilityResidual(toy, x), 0.0);
  x << 1, 0, 0;
  EXPECT_DOUBLE_EQ(FeasibilityResidual(toy, x), 1.0);
}

TEST(ProblemTextTest, RoundTripIsExact) {
  const Problem prob = MakeRandomQp(11, 3, 5);
  std::stringstream ss;
  WriteProblemText(prob, ss);
  const Problem back = ReadProblemText(ss);
  EXPECT_EQ(back.quadratic()->Q, prob.quadratic()->Q);
  EXPECT_EQ(back.quadratic()->k, prob.quadratic()->k);
  EXPECT_EQ(back.A(), prob.A());
  EXPECT_EQ(back.b(), prob.b());
  EXPECT_EQ(back.origin().kind, "random_qp");
  EXPECT_EQ(back.origin().seed, prob.origin().seed);
}

TEST(ProblemTextTest, MalformedInputIsRejected) {
  std::stringstream bad("pdflow-problem 2\n");
  EXPECT_THROW(ReadProblemText(bad), Error);
  const Problem prob = MakeToyProblem(1, 2, 1);
  std::stringstream ss;
  WriteProblemText(prob, ss);
  std::string text = ss.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(ReadProblemText(truncated), Error);
}

TEST(ProblemTextTest, NonQuadraticCannotBeWritten) {
  const Problem prob(std::make_shared<LogSumExpObjective>(2, 0.1), Mat::Ones(1, 2), Vec::Ones(1));
  std::stringstream ss;
  EXPECT_THROW(WriteProblemText(prob, ss), Error);
}

}  // namespace
}  // namespace pdflow
