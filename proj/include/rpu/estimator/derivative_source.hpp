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

#include <memory>
#include <utility>

#include "rpu/error.hpp"
#include "rpu/estimator/features.hpp"
#include "rpu/estimator/model.hpp"
#include "rpu/phasediff.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

// Supplies wrapped (v_{t-1}, u_t) for every frame of an amplitude
// spectrogram, as a full derivative field.
class DerivativeSource {
 public:
  virtual ~DerivativeSource() = default;
  virtual DerivativeField derive(const AmplitudeSpectrogram& amplitude) const = 0;
};

// Exact derivatives of a known clean phase; isolates reconstruction from
// estimation error.
class OracleDerivativeSource final : public DerivativeSource {
 public:
  explicit OracleDerivativeSource(PhaseSpectrogram clean)
      : clean_(std::move(clean)), field_(derivatives(clean_)) {}

  DerivativeField derive(const AmplitudeSpectrogram& amplitude) const override {
    if (amplitude.bins() != clean_.bins() || amplitude.frames() != clean_.frames()) {
      throw DomainError("oracle phase does not match the amplitude shape");
    }
    return field_;
  }

  const DerivativeField& field() const { return field_; }
  const PhaseSpectrogram& clean_phase() const { return clean_; }

 private:
  PhaseSpectrogram clean_;
  DerivativeField field_;
};

// Runs a model over every frame's features; returns wrapped angles, one
// column per frame.
inline Eigen::MatrixXd predict_frames(const EstimatorModel<float>& model,
                                      const AmplitudeSpectrogram& amplitude,
                                      const FeatureConfig& fcfg) {
  const Eigen::MatrixXf psi = feature_matrix(amplitude.data, fcfg).cast<float>();
  return wrap(forward_batch<float>(model, psi).cast<double>());
}

// v_t = F_IF(psi_t) for t = 0..T-2 and u_t = F_GD(psi_t) for t = 0..T-1.
class LearnedDerivativeSource final : public DerivativeSource {
 public:
  LearnedDerivativeSource(EstimatorModel<float> if_model,
                          EstimatorModel<float> gd_model, FeatureConfig fcfg = {})
      : if_model_(std::move(if_model)), gd_model_(std::move(gd_model)), fcfg_(fcfg) {
    if (if_model_.target_kind != TargetKind::kInstantaneousFrequency) {
      throw ConfigError("IF source model has the wrong target kind");
    }
    if (gd_model_.target_kind != TargetKind::kGroupDelay) {
      throw ConfigError("GD source model has the wrong target kind");
    }
  }

  DerivativeField derive(const AmplitudeSpectrogram& amplitude) const override {
    const Eigen::Index k = amplitude.bins();
    if (if_model_.output_dim() != k || gd_model_.output_dim() != k - 1) {
      throw DomainError("models were trained for a different bin count");
    }
    DerivativeField d;
    const Eigen::MatrixXd v = predict_frames(if_model_, amplitude, fcfg_);
    d.if_field = v.leftCols(std::max<Eigen::Index>(amplitude.frames() - 1, 0));
    d.gd_field = predict_frames(gd_model_, amplitude, fcfg_);
    return d;
  }

 private:
  EstimatorModel<float> if_model_;
  EstimatorModel<float> gd_model_;
  FeatureConfig fcfg_;
};

inline std::unique_ptr<DerivativeSource> oracle_derivatives(PhaseSpectrogram clean) {
  return std::make_unique<OracleDerivativeSource>(std::move(clean));
}

// Direct phase estimation with a phase-target model.
inline PhaseSpectrogram estimate_phase(const EstimatorModel<float>& model,
                                       const AmplitudeSpectrogram& amplitude,
                                       const FeatureConfig& fcfg = {}) {
  if (model.target_kind != TargetKind::kPhase) {
    throw ConfigError("direct phase estimation needs a phase-target model");
  }
  if (model.output_dim() != amplitude.bins()) {
    throw DomainError("model was trained for a different bin count");
  }
  return {predict_frames(model, amplitude, fcfg), amplitude.config, true};
}

}  // namespace rpu
