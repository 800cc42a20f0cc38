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

#include <complex>
#include <vector>

#include "rpu/error.hpp"
#include "rpu/spectral.hpp"

// Comparison methods: Griffin-Lim, IF-only integration and zero phase.
namespace rpu {

struct GlaConfig {
  int iterations = 0;
  bool track_inconsistency = false;
};

struct GlaResult {
  PhaseSpectrogram phase;
  // ||S_n - stft(istft(S_n))|| per iteration, two-sided spectrum norm.
  std::vector<double> inconsistency;
};

// stft(istft(S)): projection onto consistent spectrograms.
inline ComplexSpectrogram project_consistent(const ComplexSpectrogram& s) {
  return stft(istft(s), s.config);
}

inline double inconsistency(const ComplexSpectrogram& s) {
  return two_sided_norm(s.data - project_consistent(s).data, s.config.fft_size);
}

// Classical alternating projections. The amplitude is never modified; each
// iteration sets phase <- arg(stft(istft(amplitude * exp(i * phase)))).
inline GlaResult griffin_lim(const AmplitudeSpectrogram& amplitude,
                             const PhaseSpectrogram& init_phase,
                             const GlaConfig& cfg) {
  if (amplitude.data.rows() != init_phase.data.rows() ||
      amplitude.data.cols() != init_phase.data.cols()) {
    throw DomainError("griffin_lim: amplitude and phase shapes differ");
  }
  if (cfg.iterations < 0) throw DomainError("griffin_lim: negative iterations");
  GlaResult result{init_phase, {}};
  for (int it = 0; it < cfg.iterations; ++it) {
    const ComplexSpectrogram s = compose(amplitude, result.phase);
    const ComplexSpectrogram c = project_consistent(s);
    if (cfg.track_inconsistency) {
      result.inconsistency.push_back(
          two_sided_norm(s.data - c.data, s.config.fft_size));
    }
    result.phase = phase(c);
  }
  return result;
}

// phi_t = W(phi_{t-1} + v_{t-1}) starting from init_frame.
inline PhaseSpectrogram integrate_if(const Eigen::VectorXd& init_frame,
                                     const Eigen::MatrixXd& if_field,
                                     const StftConfig& cfg) {
  if (if_field.rows() != init_frame.size()) {
    throw DomainError("integrate_if: IF field and initial frame disagree on K");
  }
  Eigen::MatrixXd phase(init_frame.size(), if_field.cols() + 1);
  phase.col(0) = wrap(init_frame);
  for (Eigen::Index t = 1; t < phase.cols(); ++t) {
    phase.col(t) = wrap(phase.col(t - 1) + if_field.col(t - 1));
  }
  return {std::move(phase), cfg, true};
}

inline PhaseSpectrogram zero_phase(const AmplitudeSpectrogram& amplitude) {
  return {Eigen::MatrixXd::Zero(amplitude.data.rows(), amplitude.data.cols()),
          amplitude.config, true};
}

}  // namespace rpu
