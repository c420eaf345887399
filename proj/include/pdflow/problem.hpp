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

#ifndef PDFLOW_PROBLEM_HPP_
#define PDFLOW_PROBLEM_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pdflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// f(x) = 1/2 x'Qx + k'x.
struct QuadraticForm {
  Mat Q;
  Vec k;
};

/// Smooth convex objective accessed through value, gradient and
/// Hessian-vector products. A dense Hessian is never requested.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double Value(const Vec& x) const = 0;
  virtual Vec Gradient(const Vec& x) const = 0;
  virtual Vec HessianVectorProduct(const Vec& x, const Vec& v) const = 0;

  /// Non-null when the objective is exactly quadratic; lets the saddle and
  /// minimal-norm solvers use a single linear solve.
  virtual const QuadraticForm* AsQuadratic() const { return nullptr; }
};

class QuadraticObjective : public Objective {
 public:
  QuadraticObjective(Mat Q, Vec k);

  Eigen::Index dim() const override { return form_.k.size(); }
  double Value(const Vec& x) const override;
  Vec Gradient(const Vec& x) const override;
  Vec HessianVectorProduct(const Vec& x, const Vec& v) const override;
  const QuadraticForm* AsQuadratic() const override { return &form_; }

 private:
  QuadraticForm form_;
};

/// f(x) = (w1 x1 + w2 x2 + w3 x3)^2, evaluated directly from the weights.
class ToyObjective : public Objective {
 public:
  explicit ToyObjective(const Eigen::Vector3d& weights);

  Eigen::Index dim() const override { return 3; }
  double Value(const Vec& x) const override;
  Vec Gradient(const Vec& x) const override;
  Vec HessianVectorProduct(const Vec& x, const Vec& v) const override;
  const QuadraticForm* AsQuadratic() const override { return &form_; }

 private:
  Eigen::Vector3d w_;
  QuadraticForm form_;  // Q = 2ww', k = 0
};

/// f(x) = log(sum_i exp(x_i)) + mu/2 |x|^2. Convex but not quadratic; used to
/// exercise the Newton saddle solver.
class LogSumExpObjective : public Objective {
 public:
  LogSumExpObjective(Eigen::Index n, double mu);

  Eigen::Index dim() const override { return n_; }
  double Value(const Vec& x) const override;
  Vec Gradient(const Vec& x) const override;
  Vec HessianVectorProduct(const Vec& x, const Vec& v) const override;

 private:
  Vec Softmax(const Vec& x) const;

  Eigen::Index n_;
  double mu_;
};

/// Where an instance came from. Carried into the text format header.
struct ProblemOrigin {
  std::string kind = "custom";  // random_qp | toy | custom
  std::optional<std::uint64_t> seed;
  std::vector<double> coefficients;  // toy weights
};

/// min f(x) s.t. Ax = b. Immutable after construction.
class Problem {
 public:
  Problem(std::shared_ptr<const Objective> objective, Mat A, Vec b,
          ProblemOrigin origin = {});

  Eigen::Index dim_x() const { return A_.cols(); }
  Eigen::Index dim_y() const { return A_.rows(); }
  const Objective& objective() const { return *objective_; }
  const Mat& A() const { return A_; }
  const Vec& b() const { return b_; }
  const ProblemOrigin& origin() const { return origin_; }
  const QuadraticForm* quadratic() const { return objective_->AsQuadratic(); }

  void CheckPrimal(const Vec& x) const;
  void CheckDual(const Vec& lambda) const;

 private:
  std::shared_ptr<const Objective> objective_;
  Mat A_;
  Vec b_;
  ProblemOrigin origin_;
};

struct ObjectiveEval {
  double value = 0.0;
  Vec grad;
  std::function<Vec(const Vec&)> hvp;  // v -> Hess f(x) v, x captured by value
};

ObjectiveEval EvalObjective(const Problem& prob, const Vec& x);

/// |Ax - b|_2
double FeasibilityResidual(const Problem& prob, const Vec& x);

/// Standard normal samples via Box-Muller over std::mt19937_64, whose output
/// sequence is fixed by the C++ standard. Each pair of uniforms (u1, u2) with
/// u1 in (0,1], u2 in [0,1) yields sqrt(-2 ln u1) * (cos 2pi u2, sin 2pi u2),
/// consumed cosine first.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}
  double Next();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Random equality-constrained QP: Q = H'H, with H (n x n), A (m x n), k, b
/// drawn in that order, matrices row-major, from GaussianSampler(seed).
Problem MakeRandomQp(std::uint64_t seed, int m, int n);

/// f(x) = (mc x1 + nc x2 + ec x3)^2, A = (mc, -nc, ec), b = 0.
Problem MakeToyProblem(double mc, double nc, double ec);

/// Plain-text matrix format (quadratic problems only):
///
///   pdflow-problem 1
///   kind <random_qp|toy|custom>
///   seed <u64|->
///   coefficients <count> <values...>
///   dims <m> <n>
///   Q        followed by n rows of n values
///   k        followed by one row of n values
///   A        followed by m rows of n values
///   b        followed by one row of m values
///
/// Values use 17 significant digits so a round trip is exact.
void WriteProblemText(const Problem& prob, std::ostream& out);
Problem ReadProblemText(std::istream& in);

}  // namespace pdflow

#endif  // PDFLOW_PROBLEM_HPP_
