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

#include "pdflow/lagrangian.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pdflow/error.hpp"
#include "text_util.hpp"

namespace pdflow {

namespace {

void CheckTime(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    Fail(ErrorCode::kDomain, "regularized Lagrangian: time must be positive, got " +
                                 internal::FormatDouble(t));
  }
}

void CheckArgs(const Problem& prob, double t, const Vec& x, const Vec& lambda) {
  CheckTime(t);
  prob.CheckPrimal(x);
  prob.CheckDual(lambda);
}

// Jacobian of the optimality residual with respect to (x, l).
Mat SaddleJacobian(const Problem& prob, const Vec& x, double eps) {
  const Eigen::Index n = prob.dim_x(), m = prob.dim_y();
  Mat J = Mat::Zero(n + m, n + m);
  if (const QuadraticForm* qf = prob.quadratic()) {
    J.topLeftCorner(n, n) = qf->Q;
  } else {
    Vec e = Vec::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      e(j) = 1.0;
      J.block(0, j, n, 1) = prob.objective().HessianVectorProduct(x, e);
      e(j) = 0.0;
    }
    J.topLeftCorner(n, n) =
        0.5 * (J.topLeftCorner(n, n) + J.topLeftCorner(n, n).transpose()).eval();
  }
  J.topLeftCorner(n, n).diagonal().array() += eps;
  J.topRightCorner(n, m) = prob.A().transpose();
  J.bottomLeftCorner(m, n) = prob.A();
  J.bottomRightCorner(m, m).diagonal().setConstant(-eps);
  return J;
}

struct Residual {
  Vec rx;
  Vec rl;
  double Norm() const { return rx.norm() + rl.norm(); }
};

Residual SaddleResidual(const Problem& prob, double eps, const Vec& x, const Vec& lambda) {
  return {prob.objective().Gradient(x) + prob.A().transpose() * lambda + eps * x,
          prob.A() * x - prob.b() - eps * lambda};
}

}  // namespace

RegularizationSpec RegularizationSpec::Make(double c, double p) {
  if (!(c > 0.0)) Fail(ErrorCode::kInput, "regularization: c must be > 0");
  if (!(p > 0.0 && p < 1.0)) Fail(ErrorCode::kInput, "regularization: p must lie in (0, 1)");
  return {c, p};
}

double RegularizationSpec::Weight(double t) const { return c / std::pow(t, p); }

double RegularizationSpec::WeightDecay(double t) const { return c * p * std::pow(t, -p - 1.0); }

double Lagrangian(const Problem& prob, const Vec& x, const Vec& lambda) {
  prob.CheckPrimal(x);
  prob.CheckDual(lambda);
  return prob.objective().Value(x) + lambda.dot(prob.A() * x - prob.b());
}

double LagrangianValue(const Problem& prob, const RegularizationSpec& reg, double t,
                       const Vec& x, const Vec& lambda) {
  CheckArgs(prob, t, x, lambda);
  return prob.objective().Value(x) + (prob.A() * x - prob.b()).dot(lambda) +
         0.5 * reg.Weight(t) * (x.squaredNorm() - lambda.squaredNorm());
}

Vec GradXLagrangian(const Problem& prob, const RegularizationSpec& reg, double t, const Vec& x,
                    const Vec& lambda) {
  CheckArgs(prob, t, x, lambda);
  return prob.objective().Gradient(x) + prob.A().transpose() * lambda + reg.Weight(t) * x;
}

Vec GradLambdaLagrangian(const Problem& prob, const RegularizationSpec& reg, double t,
                         const Vec& x, const Vec& lambda) {
  CheckArgs(prob, t, x, lambda);
  return prob.A() * x - prob.b() - reg.Weight(t) * lambda;
}

double ProductNorm(const Vec& x, const Vec& lambda) {
  return std::sqrt(x.squaredNorm() + lambda.squaredNorm());
}

SaddlePoint ComputeSaddlePoint(const Problem& prob, const RegularizationSpec& reg, double t,
                               const SaddleOptions& options) {
  CheckTime(t);
  const Eigen::Index n = prob.dim_x(), m = prob.dim_y();
  const double eps = reg.Weight(t);

  SaddlePoint sp;
  sp.t = t;
  Vec z = Vec::Zero(n + m);

  if (const QuadraticForm* qf = prob.quadratic()) {
    const Mat J = SaddleJacobian(prob, z.head(n), eps);
    Vec rhs(n + m);
    rhs << -qf->k, prob.b();
    Eigen::PartialPivLU<Mat> lu(J);
    z = lu.solve(rhs);
    // One step of iterative refinement tightens the residual when eps is small.
    z += lu.solve(rhs - J * z);
  } else {
    int it = 0;
    Residual r = SaddleResidual(prob, eps, z.head(n), z.tail(m));
    while (r.Norm() > options.tolerance * (1.0 + z.norm())) {
      if (it == options.max_newton_iterations) {
        Fail(ErrorCode::kSolver, "saddle point: Newton did not converge after " +
                                     std::to_string(it) + " iterations at t=" +
                                     internal::FormatDouble(t) + ", residual " +
                                     internal::FormatDouble(r.Norm()));
      }
      ++it;
      Vec rr(n + m);
      rr << r.rx, r.rl;
      const Vec step = Eigen::PartialPivLU<Mat>(SaddleJacobian(prob, z.head(n), eps)).solve(-rr);
      // Backtrack on the residual norm.
      double alpha = 1.0;
      const double r0 = r.Norm();
      for (int k = 0; k < 30; ++k) {
        const Vec trial = z + alpha * step;
        Residual rt = SaddleResidual(prob, eps, trial.head(n), trial.tail(m));
        if (rt.Norm() <= (1.0 - 1e-4 * alpha) * r0 || k == 29) {
          z = trial;
          r = std::move(rt);
          break;
        }
        alpha *= 0.5;
      }
    }
    // Newton converges quadratically near the root: one more full step
    // takes the residual from the stopping tolerance to rounding level.
    if (r.Norm() > 0.0) {
      Vec rr(n + m);
      rr << r.rx, r.rl;
      const Vec trial =
          z + Eigen::PartialPivLU<Mat>(SaddleJacobian(prob, z.head(n), eps)).solve(-rr);
      Residual rt = SaddleResidual(prob, eps, trial.head(n), trial.tail(m));
      if (rt.Norm() < r.Norm()) {
        z = trial;
        ++it;
      }
    }
    sp.newton_iterations = it;
  }

  sp.x = z.head(n);
  sp.lambda = z.tail(m);
  sp.kkt_residual = SaddleResidual(prob, eps, sp.x, sp.lambda).Norm();

  // d/dt of the optimality system:
  //   (H + eps) xdot + A' ldot =  c p t^(-p-1) x
  //   A xdot - eps ldot        = -c p t^(-p-1) l
  const double decay = reg.WeightDecay(t);
  Vec rhs(n + m);
  rhs << decay * sp.x, -decay * sp.lambda;
  const Vec zdot = Eigen::PartialPivLU<Mat>(SaddleJacobian(prob, sp.x, eps)).solve(rhs);
  sp.xdot = zdot.head(n);
  sp.lambdadot = zdot.tail(m);
  return sp;
}

MinNormSolution ComputeMinNormSolution(const Problem& prob) {
  const QuadraticForm* qf = prob.quadratic();
  if (!qf) {
    Fail(ErrorCode::kInput, "minimal-norm solution: only available for quadratic objectives");
  }
  const Eigen::Index n = prob.dim_x(), m = prob.dim_y();
  Mat K = Mat::Zero(n + m, n + m);
  K.topLeftCorner(n, n) = qf->Q;
  K.topRightCorner(n, m) = prob.A().transpose();
  K.bottomLeftCorner(m, n) = prob.A();
  Vec rhs(n + m);
  rhs << -qf->k, prob.b();

  Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
  Vec z = cod.solve(rhs);
  z += cod.solve(rhs - K * z);

  MinNormSolution out;
  out.x = z.head(n);
  out.lambda = z.tail(m);
  out.kkt_residual = (qf->Q * out.x + qf->k + prob.A().transpose() * out.lambda).norm() +
                     (prob.A() * out.x - prob.b()).norm();
  const double scale = (1.0 + rhs.norm()) * (1.0 + K.norm());
  if (out.kkt_residual > 1e-8 * scale) {
    Fail(ErrorCode::kInfeasible, "minimal-norm solution: KKT system is inconsistent (residual " +
                                     internal::FormatDouble(out.kkt_residual) + ")");
  }
  return out;
}

}  // namespace pdflow
