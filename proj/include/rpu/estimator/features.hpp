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

#include <algorithm>
#include <cmath>

#include "rpu/error.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

struct FeatureConfig {
  int context = 2;                 // frames on each side
  double amplitude_floor = 1e-5;   // relative to the utterance maximum
  double variance_floor = 1e-12;

  void validate() const {
    if (context < 0) throw ConfigError("feature context must be >= 0");
    if (!(amplitude_floor > 0.0)) {
      throw ConfigError("amplitude_floor must be positive");
    }
  }

  int input_dim(Eigen::Index bins) const {
    return static_cast<int>((2 * context + 1) * bins);
  }
};

// log(max(a, floor * max(a))). An all-zero input uses the floor itself.
inline Eigen::MatrixXd log_amplitude(const Eigen::MatrixXd& amp,
                                     const FeatureConfig& cfg) {
  const double peak = amp.size() > 0 ? amp.maxCoeff() : 0.0;
  const double floor =
      peak > 0.0 ? cfg.amplitude_floor * peak : cfg.amplitude_floor;
  return amp.unaryExpr([floor](double a) { return std::log(std::max(a, floor)); });
}

// Per-utterance mean/variance normalization of a log-amplitude matrix.
inline Eigen::MatrixXd normalize_log_amplitude(const Eigen::MatrixXd& log_amp,
                                               const FeatureConfig& cfg) {
  if (log_amp.size() == 0) return log_amp;
  const double mean = log_amp.mean();
  const double var = (log_amp.array() - mean).square().mean();
  const double scale = 1.0 / std::sqrt(std::max(var, cfg.variance_floor));
  return ((log_amp.array() - mean) * scale).matrix();
}

// Stack of context windows for every frame, (2c+1)K x T. Column t holds the
// normalized columns t-c..t+c with edge frames replicated.
inline Eigen::MatrixXd stack_context(const Eigen::MatrixXd& normalized,
                                     const FeatureConfig& cfg) {
  const Eigen::Index k = normalized.rows();
  const Eigen::Index frames = normalized.cols();
  Eigen::MatrixXd out(cfg.input_dim(k), frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int j = -cfg.context; j <= cfg.context; ++j) {
      const Eigen::Index src = std::clamp<Eigen::Index>(t + j, 0, frames - 1);
      out.col(t).segment((j + cfg.context) * k, k) = normalized.col(src);
    }
  }
  return out;
}

// Input features psi_t for every frame of an amplitude spectrogram.
inline Eigen::MatrixXd feature_matrix(const Eigen::MatrixXd& amplitude,
                                      const FeatureConfig& cfg) {
  cfg.validate();
  return stack_context(normalize_log_amplitude(log_amplitude(amplitude, cfg), cfg),
                       cfg);
}

// psi_tau for one frame, normalizing the given log-amplitude matrix.
inline Eigen::VectorXd features(const Eigen::MatrixXd& log_amp, Eigen::Index tau,
                                const FeatureConfig& cfg) {
  cfg.validate();
  if (tau < 0 || tau >= log_amp.cols()) {
    throw DomainError("feature frame index out of range");
  }
  const Eigen::MatrixXd normalized = normalize_log_amplitude(log_amp, cfg);
  const Eigen::Index k = log_amp.rows();
  Eigen::VectorXd out(cfg.input_dim(k));
  for (int j = -cfg.context; j <= cfg.context; ++j) {
    const Eigen::Index src = std::clamp<Eigen::Index>(tau + j, 0, log_amp.cols() - 1);
    out.segment((j + cfg.context) * k, k) = normalized.col(src);
  }
  return out;
}

}  // namespace rpu
