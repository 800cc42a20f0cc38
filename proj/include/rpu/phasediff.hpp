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

#include "rpu/error.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

// Wrapped phase derivatives of a K x T phase spectrogram.
//   if_field(w, t) = W(phi(w, t + 1) - phi(w, t))      K x (T - 1)
//   gd_field(w, t) = W(phi(w, t) - phi(w + 1, t))      (K - 1) x T
// Group delay follows the negative frequency-direction convention.
struct DerivativeField {
  Eigen::MatrixXd if_field;
  Eigen::MatrixXd gd_field;

  Eigen::Index bins() const { return if_field.rows(); }
  Eigen::Index frames() const { return gd_field.cols(); }

  void check_shape() const {
    if (if_field.rows() != gd_field.rows() + 1 ||
        if_field.cols() + 1 != gd_field.cols()) {
      throw DomainError("derivative field shapes are inconsistent: IF " +
                        std::to_string(if_field.rows()) + "x" +
                        std::to_string(if_field.cols()) + ", GD " +
                        std::to_string(gd_field.rows()) + "x" +
                        std::to_string(gd_field.cols()));
    }
  }
};

inline Eigen::MatrixXd instantaneous_frequency(const Eigen::MatrixXd& phase) {
  if (phase.cols() < 2) {
    throw DomainError("instantaneous frequency needs at least two frames");
  }
  const Eigen::Index t = phase.cols();
  return wrap(phase.rightCols(t - 1) - phase.leftCols(t - 1));
}

inline Eigen::MatrixXd instantaneous_frequency(const PhaseSpectrogram& phase) {
  return instantaneous_frequency(phase.data);
}

inline Eigen::MatrixXd group_delay(const Eigen::MatrixXd& phase) {
  if (phase.rows() < 2) throw DomainError("group delay needs at least two bins");
  const Eigen::Index k = phase.rows();
  return wrap(phase.topRows(k - 1) - phase.bottomRows(k - 1));
}

inline Eigen::MatrixXd group_delay(const PhaseSpectrogram& phase) {
  return group_delay(phase.data);
}

// Tolerates T = 1 (empty IF field) and K = 1 (empty GD field).
inline DerivativeField derivatives(const Eigen::MatrixXd& phase) {
  DerivativeField d;
  d.if_field = phase.cols() >= 2
                   ? instantaneous_frequency(phase)
                   : Eigen::MatrixXd(phase.rows(), 0);
  d.gd_field = phase.rows() >= 2 ? group_delay(phase)
                                 : Eigen::MatrixXd(0, phase.cols());
  return d;
}

inline DerivativeField derivatives(const PhaseSpectrogram& phase) {
  return derivatives(phase.data);
}

// D_w: out[w] = phi[w] - phi[w + 1], length K - 1.
template <typename Derived>
Eigen::VectorXd diff_omega(const Eigen::MatrixBase<Derived>& phi) {
  const Eigen::Index k = phi.size();
  if (k == 0) throw DomainError("diff_omega of an empty vector");
  return phi.head(k - 1) - phi.tail(k - 1);
}

// D_w^T, length K = u.size() + 1.
template <typename Derived>
Eigen::VectorXd diff_omega_adjoint(const Eigen::MatrixBase<Derived>& u) {
  const Eigen::Index m = u.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 1);
  out.head(m) += u;
  out.tail(m) -= u;
  return out;
}

}  // namespace rpu
