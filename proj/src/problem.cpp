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

#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pdflow/error.hpp"
#include "text_util.hpp"

namespace pdflow {

namespace {

void CheckLength(const Vec& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    Fail(ErrorCode::kInput, std::string(what) + ": expected length " +
                                std::to_string(n) + ", got " +
                                std::to_string(v.size()));
  }
}

}  // namespace

QuadraticObjective::QuadraticObjective(Mat Q, Vec k)
    : form_{std::move(Q), std::move(k)} {
  if (form_.Q.rows() != form_.Q.cols() || form_.Q.rows() != form_.k.size()) {
    Fail(ErrorCode::kInput, "quadratic objective: Q must be n x n with k of length n");
  }
  const double asym = (form_.Q - form_.Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * (1.0 + form_.Q.cwiseAbs().maxCoeff())) {
    Fail(ErrorCode::kInput, "quadratic objective: Q is not symmetric");
  }
}

double QuadraticObjective::Value(const Vec& x) const {
  CheckLength(x, dim(), "objective");
  return 0.5 * x.dot(form_.Q * x) + form_.k.dot(x);
}

Vec QuadraticObjective::Gradient(const Vec& x) const {
  CheckLength(x, dim(), "gradient");
  return form_.Q * x + form_.k;
}

Vec QuadraticObjective::HessianVectorProduct(const Vec& x, const Vec& v) const {
  CheckLength(x, dim(), "hvp point");
  CheckLength(v, dim(), "hvp direction");
  return form_.Q * v;
}

ToyObjective::ToyObjective(const Eigen::Vector3d& weights)
    : w_(weights), form_{2.0 * weights * weights.transpose(), Vec::Zero(3)} {}

double ToyObjective::Value(const Vec& x) const {
  CheckLength(x, 3, "objective");
  const double u = w_.dot(x);
  return u * u;
}

Vec ToyObjective::Gradient(const Vec& x) const {
  CheckLength(x, 3, "gradient");
  return 2.0 * w_.dot(x) * w_;
}

Vec ToyObjective::HessianVectorProduct(const Vec& x, const Vec& v) const {
  CheckLength(x, 3, "hvp point");
  CheckLength(v, 3, "hvp direction");
  return 2.0 * w_.dot(v) * w_;
}

LogSumExpObjective::LogSumExpObjective(Eigen::Index n, double mu) : n_(n), mu_(mu) {
  if (n < 1 || mu < 0.0) Fail(ErrorCode::kInput, "log-sum-exp objective: need n >= 1, mu >= 0");
}

Vec LogSumExpObjective::Softmax(const Vec& x) const {
  const double shift = x.maxCoeff();
  Vec e = (x.array() - shift).exp().matrix();
  return e / e.sum();
}

double LogSumExpObjective::Value(const Vec& x) const {
  CheckLength(x, n_, "objective");
  const double shift = x.maxCoeff();
  return shift + std::log((x.array() - shift).exp().sum()) + 0.5 * mu_ * x.squaredNorm();
}

Vec LogSumExpObjective::Gradient(const Vec& x) const {
  CheckLength(x, n_, "gradient");
  return Softmax(x) + mu_ * x;
}

Vec LogSumExpObjective::HessianVectorProduct(const Vec& x, const Vec& v) const {
  CheckLength(x, n_, "hvp point");
  CheckLength(v, n_, "hvp direction");
  const Vec pr = Softmax(x);
  // (diag(p) - pp') v
  return pr.cwiseProduct(v) - pr * pr.dot(v) + mu_ * v;
}

Problem::Problem(std::shared_ptr<const Objective> objective, Mat A, Vec b,
                 ProblemOrigin origin)
    : objective_(std::move(objective)),
      A_(std::move(A)),
      b_(std::move(b)),
      origin_(std::move(origin)) {
  if (!objective_) Fail(ErrorCode::kInput, "problem: null objective");
  if (A_.rows() < 1 || A_.cols() < 1) Fail(ErrorCode::kInput, "problem: A must be non-empty");
  if (A_.cols() != objective_->dim()) {
    Fail(ErrorCode::kInput, "problem: A has " + std::to_string(A_.cols()) +
                                " columns but objective dimension is " +
                                std::to_string(objective_->dim()));
  }
  if (b_.size() != A_.rows()) Fail(ErrorCode::kInput, "problem: b length must equal rows of A");
}

void Problem::CheckPrimal(const Vec& x) const { CheckLength(x, dim_x(), "primal vector"); }
void Problem::CheckDual(const Vec& lambda) const { CheckLength(lambda, dim_y(), "dual vector"); }

ObjectiveEval EvalObjective(const Problem& prob, const Vec& x) {
  prob.CheckPrimal(x);
  const Objective& f = prob.objective();
  ObjectiveEval out;
  out.value = f.Value(x);
  out.grad = f.Gradient(x);
  out.hvp = [&f, x](const Vec& v) { return f.HessianVectorProduct(x, v); };
  return out;
}

double FeasibilityResidual(const Problem& prob, const Vec& x) {
  prob.CheckPrimal(x);
  return (prob.A() * x - prob.b()).norm();
}

double GaussianSampler::Next() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = static_cast<double>((engine_() >> 11) + 1) * kScale;
  const double u2 = static_cast<double>(engine_() >> 11) * kScale;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

Problem MakeRandomQp(std::uint64_t seed, int m, int n) {
  if (m < 1 || n < 1) Fail(ErrorCode::kInput, "random QP: need m >= 1 and n >= 1");
  GaussianSampler rng(seed);
  auto fill = [&rng](Mat& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = rng.Next();
  };
  Mat H(n, n), A(m, n);
  Vec k(n), b(m);
  fill(H);
  fill(A);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = rng.Next();
  for (Eigen::Index i = 0; i < m; ++i) b(i) = rng.Next();
  Mat Q = H.transpose() * H;
  Q = 0.5 * (Q + Q.transpose()).eval();
  ProblemOrigin origin{"random_qp", seed, {}};
  return Problem(std::make_shared<QuadraticObjective>(std::move(Q), std::move(k)),
                 std::move(A), std::move(b), std::move(origin));
}

Problem MakeToyProblem(double mc, double nc, double ec) {
  if (mc == 0.0 || nc == 0.0 || ec == 0.0) {
    Fail(ErrorCode::kInput, "toy problem: coefficients must be nonzero");
  }
  Mat A(1, 3);
  A << mc, -nc, ec;
  ProblemOrigin origin{"toy", std::nullopt, {mc, nc, ec}};
  return Problem(std::make_shared<ToyObjective>(Eigen::Vector3d(mc, nc, ec)), std::move(A),
                 Vec::Zero(1), std::move(origin));
}

namespace {

void WriteRow(std::ostream& out, const auto& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j) out << ' ';
    out << internal::FormatDouble(row(j));
  }
  out << '\n';
}

std::string ExpectKeyword(std::istream& in, const char* keyword) {
  std::string token;
  if (!(in >> token) || token != keyword) {
    Fail(ErrorCode::kInput, std::string("problem text: expected '") + keyword + "', got '" +
                                token + "'");
  }
  return token;
}

void ReadValues(std::istream& in, Eigen::Ref<Mat> M, const char* what) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (!(in >> M(i, j))) Fail(ErrorCode::kInput, std::string("problem text: truncated ") + what);
}

}  // namespace

void WriteProblemText(const Problem& prob, std::ostream& out) {
  const QuadraticForm* qf = prob.quadratic();
  if (!qf) Fail(ErrorCode::kInput, "problem text: only quadratic objectives are serializable");
  const ProblemOrigin& o = prob.origin();
  out << "pdflow-problem 1\n";
  out << "kind " << o.kind << '\n';
  out << "seed " << (o.seed ? std::to_string(*o.seed) : std::string("-")) << '\n';
  out << "coefficients " << o.coefficients.size();
  for (double c : o.coefficients) out << ' ' << internal::FormatDouble(c);
  out << '\n';
  out << "dims " << prob.dim_y() << ' ' << prob.dim_x() << '\n';
  out << "Q\n";
  for (Eigen::Index i = 0; i < qf->Q.rows(); ++i) WriteRow(out, qf->Q.row(i));
  out << "k\n";
  WriteRow(out, qf->k.transpose());
  out << "A\n";
  for (Eigen::Index i = 0; i < prob.A().rows(); ++i) WriteRow(out, prob.A().row(i));
  out << "b\n";
  WriteRow(out, prob.b().transpose());
}

Problem ReadProblemText(std::istream& in) {
  ExpectKeyword(in, "pdflow-problem");
  int version = 0;
  if (!(in >> version) || version != 1) {
    Fail(ErrorCode::kInput, "problem text: unsupported version");
  }
  ProblemOrigin origin;
  ExpectKeyword(in, "kind");
  in >> origin.kind;
  ExpectKeyword(in, "seed");
  std::string seed;
  in >> seed;
  if (seed != "-") origin.seed = std::stoull(seed);
  ExpectKeyword(in, "coefficients");
  std::size_t count = 0;
  in >> count;
  origin.coefficients.resize(count);
  for (double& c : origin.coefficients) in >> c;
  ExpectKeyword(in, "dims");
  Eigen::Index m = 0, n = 0;
  if (!(in >> m >> n) || m < 1 || n < 1) Fail(ErrorCode::kInput, "problem text: bad dims");
  Mat Q(n, n), A(m, n);
  Vec k(n), b(m);
  ExpectKeyword(in, "Q");
  ReadValues(in, Q, "Q");
  ExpectKeyword(in, "k");
  ReadValues(in, k, "k");
  ExpectKeyword(in, "A");
  ReadValues(in, A, "A");
  ExpectKeyword(in, "b");
  ReadValues(in, b, "b");

  std::shared_ptr<const Objective> objective;
  if (origin.kind == "toy" && origin.coefficients.size() == 3 && n == 3) {
    objective = std::make_shared<ToyObjective>(Eigen::Vector3d(
        origin.coefficients[0], origin.coefficients[1], origin.coefficients[2]));
  } else {
    objective = std::make_shared<QuadraticObjective>(std::move(Q), std::move(k));
  }
  return Problem(std::move(objective), std::move(A), std::move(b), std::move(origin));
}

}  // namespace pdflow
