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

#ifndef PDFLOW_LAGRANGIAN_HPP_
#define PDFLOW_LAGRANGIAN_HPP_

#include "pdflow/problem.hpp"

namespace pdflow {

/// Tikhonov weight eps(t) = c / t^p on the regularized Lagrangian
///   L_t(x, l) = f(x) + <Ax - b, l> + eps(t)/2 (|x|^2 - |l|^2).
struct RegularizationSpec {
  double c = 1.0;
  double p = 0.5;

  /// Throws kInput unless c > 0 and 0 < p < 1.
  static RegularizationSpec Make(double c, double p);

  double Weight(double t) const;
  /// -d/dt eps(t) = c p t^(-p-1) (nonnegative).
  double WeightDecay(double t) const;
};

/// Unregularized Lagrangian L(x, l) = f(x) + <l, Ax - b>.
double Lagrangian(const Problem& prob, const Vec& x, const Vec& lambda);

double LagrangianValue(const Problem& prob, const RegularizationSpec& reg, double t,
                       const Vec& x, const Vec& lambda);
Vec GradXLagrangian(const Problem& prob, const RegularizationSpec& reg, double t,
                    const Vec& x, const Vec& lambda);
Vec GradLambdaLagrangian(const Problem& prob, const RegularizationSpec& reg, double t,
                         const Vec& x, const Vec& lambda);

/// Euclidean norm on the product space: sqrt(|x|^2 + |l|^2).
double ProductNorm(const Vec& x, const Vec& lambda);

/// The unique saddle point (x_t, l_t) of L_t and its time derivative.
struct SaddlePoint {
  double t = 0.0;
  Vec x;
  Vec lambda;
  Vec xdot;
  Vec lambdadot;
  double kkt_residual = 0.0;  // |grad_x L_t| + |grad_l L_t| at (x, lambda)
  int newton_iterations = 0;  // 0 for quadratic objectives
};

struct SaddleOptions {
  double tolerance = 1e-10;  // relative to 1 + |(x_t, l_t)|
  int max_newton_iterations = 50;
};

/// Quadratic objectives: one LU solve of
///   [Q + eps I   A' ] [x]   [-k]
///   [A        -eps I] [l] = [ b].
/// Otherwise damped Newton on the same residual, with the Jacobian assembled
/// column by column from Hessian-vector products. Velocities come from
/// differentiating the optimality system in t.
SaddlePoint ComputeSaddlePoint(const Problem& prob, const RegularizationSpec& reg, double t,
                               const SaddleOptions& options = {});

/// Minimal-norm primal-dual solution, the projection of the origin onto the
/// KKT set.
struct MinNormSolution {
  Vec x;
  Vec lambda;
  double kkt_residual = 0.0;  // |grad f(x) + A'l| + |Ax - b|
};

/// Quadratic objectives only. The KKT set is the solution set of a linear
/// system, so the projection is its pseudoinverse (minimum-norm) solution,
/// computed with a complete orthogonal decomposition. Throws kInfeasible when
/// the system is inconsistent.
MinNormSolution ComputeMinNormSolution(const Problem& prob);

}  // namespace pdflow

#endif  // PDFLOW_LAGRANGIAN_HPP_
