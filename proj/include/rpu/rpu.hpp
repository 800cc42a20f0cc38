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

#include <string>
#include <variant>

#include "rpu/error.hpp"
#include "rpu/phasediff.hpp"
#include "rpu/spectral.hpp"
#include "rpu/tridiagonal.hpp"

// Recurrent phase unwrapping: frame-by-frame least-squares phase estimation
// from the instantaneous frequency of the previous frame and the group delay
// of the current frame.
namespace rpu {

struct ZeroInitialFrame {};
struct GivenInitialFrame {
  Eigen::VectorXd phase;
};
// phi(0, 0) = 0, phi(w + 1, 0) = phi(w, 0) - u(w, 0).
struct GroupDelayInitialFrame {};

using InitialFrame =
    std::variant<ZeroInitialFrame, GivenInitialFrame, GroupDelayInitialFrame>;

struct RpuOptions {
  InitialFrame initial_frame = ZeroInitialFrame{};
  // Wrap every reconstructed frame to [-pi, pi) before it seeds the next one.
  bool wrap_each_frame = true;
};

struct GroupDelayModification {
  Eigen::VectorXd phi_hat;  // phi_prev + v_prev
  Eigen::VectorXd u_tilde;  // u_tau shifted by 2 pi n to be nearest D_w(phi_hat)
};

inline GroupDelayModification modify_group_delay(
    const Eigen::Ref<const Eigen::VectorXd>& phi_prev_wrapped,
    const Eigen::Ref<const Eigen::VectorXd>& v_prev,
    const Eigen::Ref<const Eigen::VectorXd>& u_tau) {
  const Eigen::Index k = phi_prev_wrapped.size();
  if (k < 1 || v_prev.size() != k || u_tau.size() != k - 1) {
    throw DomainError("modify_group_delay: expected vectors of length K, K, K-1; got " +
                      std::to_string(phi_prev_wrapped.size()) + ", " +
                      std::to_string(v_prev.size()) + ", " +
                      std::to_string(u_tau.size()));
  }
  GroupDelayModification out;
  out.phi_hat = phi_prev_wrapped + v_prev;
  const Eigen::VectorXd predicted = diff_omega(out.phi_hat);
  out.u_tilde = predicted + wrap(u_tau - predicted);
  return out;
}

// Value of ||phi - phi_hat||^2 + ||D_w(phi) - u||^2 for a candidate frame.
inline double rpu_objective(const Eigen::Ref<const Eigen::VectorXd>& phi,
                            const Eigen::Ref<const Eigen::VectorXd>& phi_hat,
                            const Eigen::Ref<const Eigen::VectorXd>& u) {
  return (phi - phi_hat).squaredNorm() + (diff_omega(phi) - u).squaredNorm();
}

inline Eigen::VectorXd rpu_step(const Eigen::Ref<const Eigen::VectorXd>& phi_prev,
                                const Eigen::Ref<const Eigen::VectorXd>& v_prev,
                                const Eigen::Ref<const Eigen::VectorXd>& u_tau,
                                const TridiagonalFactorization& system,
                                const RpuOptions& opts) {
  if (!phi_prev.allFinite() || !v_prev.allFinite() || !u_tau.allFinite()) {
    throw NumericError("rpu_step: non-finite input");
  }
  if (system.dimension() != phi_prev.size()) {
    throw DomainError("rpu_step: factorization dimension does not match K");
  }
  const auto mod = modify_group_delay(phi_prev, v_prev, u_tau);
  Eigen::VectorXd phi = system.solve(mod.phi_hat + diff_omega_adjoint(mod.u_tilde));
  if (opts.wrap_each_frame) phi = wrap(phi);
  return phi;
}

inline Eigen::VectorXd initial_frame(const DerivativeField& derivs,
                                     const RpuOptions& opts) {
  const Eigen::Index k = derivs.bins();
  return std::visit(
      [&](const auto& init) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(init)>;
        if constexpr (std::is_same_v<T, ZeroInitialFrame>) {
          return Eigen::VectorXd::Zero(k);
        } else if constexpr (std::is_same_v<T, GivenInitialFrame>) {
          if (init.phase.size() != k) {
            throw DomainError("given initial frame has length " +
                              std::to_string(init.phase.size()) + ", expected " +
                              std::to_string(k));
          }
          return init.phase;
        } else {
          Eigen::VectorXd phi = Eigen::VectorXd::Zero(k);
          for (Eigen::Index w = 0; w + 1 < k; ++w) {
            phi[w + 1] = phi[w] - derivs.gd_field(w, 0);
          }
          return phi;
        }
      },
      opts.initial_frame);
}

inline Eigen::MatrixXd rpu_reconstruct(const DerivativeField& derivs,
                                       const RpuOptions& opts = {}) {
  derivs.check_shape();
  const Eigen::Index k = derivs.bins();
  const Eigen::Index frames = derivs.frames();
  if (frames == 0) throw DomainError("rpu_reconstruct: no frames");

  const auto system = TridiagonalFactorization::phase_system(k);
  Eigen::MatrixXd phase(k, frames);
  phase.col(0) = initial_frame(derivs, opts);
  if (opts.wrap_each_frame) phase.col(0) = wrap(phase.col(0));
  for (Eigen::Index t = 1; t < frames; ++t) {
    phase.col(t) = rpu_step(phase.col(t - 1), derivs.if_field.col(t - 1),
                            derivs.gd_field.col(t), system, opts);
  }
  return phase;
}

inline PhaseSpectrogram rpu_reconstruct(const AmplitudeSpectrogram& amplitude,
                                        const DerivativeField& derivs,
                                        const RpuOptions& opts = {}) {
  derivs.check_shape();
  if (derivs.bins() != amplitude.bins() || derivs.frames() != amplitude.frames()) {
    throw DomainError("derivative field does not match the amplitude shape");
  }
  return {rpu_reconstruct(derivs, opts), amplitude.config, opts.wrap_each_frame};
}

}  // namespace rpu
