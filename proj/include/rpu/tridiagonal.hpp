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
#include <string>
#include <utility>

#include "rpu/error.hpp"

namespace rpu {

// Cholesky factorization of a symmetric positive definite tridiagonal matrix,
// M = L L^T with L lower bidiagonal. Solves are O(n) and the factor is
// immutable once built, so one instance can serve many threads.
class TridiagonalFactorization {
 public:
  TridiagonalFactorization(Eigen::VectorXd diagonal,
                           Eigen::VectorXd off_diagonal)
      : diagonal_(std::move(diagonal)), off_diagonal_(std::move(off_diagonal)) {
    const Eigen::Index n = diagonal_.size();
    if (n < 1) throw DomainError("tridiagonal system must have dimension >= 1");
    if (off_diagonal_.size() != n - 1) {
      throw DomainError("off-diagonal length must be dimension - 1");
    }
    pivot_.resize(n);
    sub_.resize(n - 1);
    double prev = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double d = diagonal_[i];
      if (i > 0) {
        sub_[i - 1] = off_diagonal_[i - 1] / prev;
        d -= sub_[i - 1] * sub_[i - 1];
      }
      if (!(d > 0.0)) {
        throw NumericError("matrix is not positive definite at row " +
                           std::to_string(i));
      }
      pivot_[i] = prev = std::sqrt(d);
    }
  }

  // M = I + D_w^T D_w for K bins: diagonal [2, 3, ..., 3, 2], off-diagonal
  // -1 (K = 1 gives [1]).
  static TridiagonalFactorization phase_system(Eigen::Index bins) {
    if (bins < 1) throw DomainError("phase system needs at least one bin");
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(bins, 3.0);
    diag[0] -= 1.0;
    diag[bins - 1] -= 1.0;
    if (bins == 1) diag[0] = 1.0;
    return {std::move(diag), Eigen::VectorXd::Constant(bins - 1, -1.0)};
  }

  Eigen::Index dimension() const { return diagonal_.size(); }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  const Eigen::VectorXd& off_diagonal() const { return off_diagonal_; }

  template <typename Derived>
  Eigen::VectorXd solve(const Eigen::MatrixBase<Derived>& rhs) const {
    const Eigen::Index n = dimension();
    if (rhs.size() != n) throw DomainError("right-hand side has wrong length");
    Eigen::VectorXd x(n);
    // L y = b
    x[0] = rhs[0] / pivot_[0];
    for (Eigen::Index i = 1; i < n; ++i) {
      x[i] = (rhs[i] - sub_[i - 1] * x[i - 1]) / pivot_[i];
    }
    // L^T x = y
    x[n - 1] /= pivot_[n - 1];
    for (Eigen::Index i = n - 2; i >= 0; --i) {
      x[i] = (x[i] - sub_[i] * x[i + 1]) / pivot_[i];
    }
    return x;
  }

  template <typename Derived>
  Eigen::VectorXd multiply(const Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = dimension();
    Eigen::VectorXd y = diagonal_.cwiseProduct(x);
    if (n > 1) {
      y.head(n - 1) += off_diagonal_.cwiseProduct(x.tail(n - 1));
      y.tail(n - 1) += off_diagonal_.cwiseProduct(x.head(n - 1));
    }
    return y;
  }

 private:
  Eigen::VectorXd diagonal_;
  Eigen::VectorXd off_diagonal_;
  Eigen::VectorXd pivot_;  // diagonal of L
  Eigen::VectorXd sub_;    // subdiagonal of L
};

}  // namespace rpu
