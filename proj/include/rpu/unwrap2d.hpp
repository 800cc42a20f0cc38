// Copyright 2026 The RPU Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "rpu/error.hpp"
#include "rpu/phasediff.hpp"

// Global least-squares 2D phase unwrapping:
//   min_Phi ||D_t(Phi) - V||_F^2 + ||D_w(Phi) - U||_F^2
// solved matrix-free by conjugate gradients on the normal equations
// (D_t^T D_t + D_w^T D_w) Phi = D_t^T V + D_w^T U. The operator is the grid
// Laplacian, singular with the constants as its nullspace; a gauge picks the
// representative.
namespace rpu {

enum class Gauge { kFixFirstEntry, kZeroMean };

struct UnwrapOptions {
  Gauge gauge = Gauge::kFixFirstEntry;
  double tolerance = 1e-10;  // relative residual
  int max_iterations = 0;    // 0 means 10 * K * T
};

struct UnwrapResult {
  Eigen::MatrixXd phase;  // unwrapped, K x T
  double objective = 0.0;
  double residual = 0.0;  // relative normal-equation residual
  int iterations = 0;
};

namespace detail {

// D_t^T D_t + D_w^T D_w applied to a K x T array.
inline Eigen::MatrixXd grid_laplacian(const Eigen::MatrixXd& x) {
  const Eigen::Index k = x.rows();
  const Eigen::Index t = x.cols();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(k, t);
  if (t > 1) {
    const Eigen::MatrixXd dt = x.rightCols(t - 1) - x.leftCols(t - 1);
    y.leftCols(t - 1) -= dt;
    y.rightCols(t - 1) += dt;
  }
  if (k > 1) {
    const Eigen::MatrixXd dw = x.topRows(k - 1) - x.bottomRows(k - 1);
    y.topRows(k - 1) += dw;
    y.bottomRows(k - 1) -= dw;
  }
  return y;
}

inline Eigen::MatrixXd normal_rhs(const DerivativeField& d) {
  const Eigen::Index k = d.bins();
  const Eigen::Index t = d.frames();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(k, t);
  if (t > 1) {
    b.leftCols(t - 1) -= d.if_field;
    b.rightCols(t - 1) += d.if_field;
  }
  if (k > 1) {
    b.topRows(k - 1) += d.gd_field;
    b.bottomRows(k - 1) -= d.gd_field;
  }
  return b;
}

}  // namespace detail

inline double unwrap_objective(const Eigen::MatrixXd& phase,
                               const DerivativeField& d) {
  const Eigen::Index k = phase.rows();
  const Eigen::Index t = phase.cols();
  double obj = 0.0;
  if (t > 1) {
    obj += (phase.rightCols(t - 1) - phase.leftCols(t - 1) - d.if_field)
               .squaredNorm();
  }
  if (k > 1) {
    obj += (phase.topRows(k - 1) - phase.bottomRows(k - 1) - d.gd_field)
               .squaredNorm();
  }
  return obj;
}

inline UnwrapResult unwrap_2d(const DerivativeField& derivs,
                              const UnwrapOptions& opts = {}) {
  derivs.check_shape();
  const Eigen::Index k = derivs.bins();
  const Eigen::Index t = derivs.frames();
  if (k * t < 2) throw DomainError("unwrap_2d needs at least two entries");

  const int max_iter = opts.max_iterations > 0
                           ? opts.max_iterations
                           : static_cast<int>(10 * k * t);
  UnwrapResult result;
  result.phase = Eigen::MatrixXd::Zero(k, t);

  Eigen::MatrixXd r = detail::normal_rhs(derivs);
  r.array() -= r.mean();  // numerically in the range of the operator
  const double b_norm = r.norm();
  if (b_norm > 0.0) {
    Eigen::MatrixXd p = r;
    double rr = r.squaredNorm();
    int it = 0;
    double rel = 1.0;
    while (it < max_iter) {
      ++it;
      const Eigen::MatrixXd q = detail::grid_laplacian(p);
      const double alpha = rr / p.cwiseProduct(q).sum();
      result.phase += alpha * p;
      r -= alpha * q;
      r.array() -= r.mean();
      const double rr_next = r.squaredNorm();
      rel = std::sqrt(rr_next) / b_norm;
      if (rel <= opts.tolerance) break;
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
    result.iterations = it;
    result.residual = rel;
    if (!(rel <= opts.tolerance)) {
      throw ConvergenceError("unwrap_2d: conjugate gradient did not converge",
                             rel, it);
    }
  }

  switch (opts.gauge) {
    case Gauge::kFixFirstEntry:
      result.phase.array() -= result.phase(0, 0);
      break;
    case Gauge::kZeroMean:
      result.phase.array() -= result.phase.mean();
      break;
  }
  result.objective = unwrap_objective(result.phase, derivs);
  return result;
}

}  // namespace rpu
