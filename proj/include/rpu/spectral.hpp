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
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rpu/error.hpp"
#include "rpu/fft.hpp"

namespace rpu {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class WindowKind { kHann };

// Analysis/synthesis parameters shared by every transform. Frequency bins
// are indexed 0..bins()-1, frames 0..T-1.
struct StftConfig {
  int sample_rate = 16000;
  int window_length = 512;  // 32 ms
  int hop_length = 128;     // 8 ms
  int fft_size = 512;
  WindowKind window = WindowKind::kHann;

  int bins() const { return fft_size / 2 + 1; }

  void validate() const {
    if (sample_rate <= 0) throw ConfigError("sample_rate must be positive");
    if (window_length <= 0) throw ConfigError("window_length must be positive");
    if (hop_length <= 0) throw ConfigError("hop_length must be positive");
    if (hop_length > window_length) {
      throw ConfigError("hop_length must not exceed window_length");
    }
    if (fft_size < window_length) {
      throw ConfigError("fft_size must be at least window_length");
    }
  }

  bool operator==(const StftConfig&) const = default;
};

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  size_t size() const { return samples.size(); }
};

struct ComplexSpectrogram {
  Eigen::MatrixXcd data;  // bins x frames
  StftConfig config;

  Eigen::Index bins() const { return data.rows(); }
  Eigen::Index frames() const { return data.cols(); }
};

struct AmplitudeSpectrogram {
  Eigen::MatrixXd data;  // bins x frames, nonnegative
  StftConfig config;

  Eigen::Index bins() const { return data.rows(); }
  Eigen::Index frames() const { return data.cols(); }
};

struct PhaseSpectrogram {
  Eigen::MatrixXd data;  // bins x frames, radians
  StftConfig config;
  bool wrapped = true;   // entries in [-pi, pi)

  Eigen::Index bins() const { return data.rows(); }
  Eigen::Index frames() const { return data.cols(); }
};

// W(x) = [x + pi]_mod 2pi - pi, result in [-pi, pi).
inline double wrap(double x) {
  double r = std::fmod(x + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r - kPi;
}

template <typename Derived>
auto wrap(const Eigen::MatrixBase<Derived>& x) {
  return x.unaryExpr([](double v) { return wrap(v); }).eval();
}

// Periodic Hann window (denominator N).
inline std::vector<double> analysis_window(const StftConfig& cfg) {
  std::vector<double> w(static_cast<size_t>(cfg.window_length));
  const double n = cfg.window_length;
  for (size_t i = 0; i < w.size(); ++i) {
    w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / n);
  }
  return w;
}

namespace detail {

// Framing geometry. The signal is zero-padded at the end to a multiple of the
// hop, then reflect-padded by half a window on each side so that frame t is
// centered on sample t * hop.
struct Framing {
  Eigen::Index padded_signal = 0;  // length after zero-padding to hop multiple
  Eigen::Index pad_left = 0;
  Eigen::Index total = 0;  // length of the reflect-padded buffer
  Eigen::Index frames = 0;

  static Framing for_signal(Eigen::Index n, const StftConfig& cfg) {
    Framing f;
    const Eigen::Index hop = cfg.hop_length;
    f.padded_signal = ((n + hop - 1) / hop) * hop;
    f.frames = f.padded_signal / hop + 1;
    f.pad_left = cfg.window_length / 2;
    f.total = f.padded_signal + cfg.window_length;
    return f;
  }

  static Framing for_frames(Eigen::Index frames, const StftConfig& cfg) {
    Framing f;
    f.frames = frames;
    f.padded_signal = (frames - 1) * cfg.hop_length;
    f.pad_left = cfg.window_length / 2;
    f.total = f.padded_signal + cfg.window_length;
    return f;
  }

  // Index into the (zero-padded) signal that feeds padded position p.
  Eigen::Index source_index(Eigen::Index p) const {
    Eigen::Index i = p - pad_left;
    const Eigen::Index n = padded_signal;
    if (n == 1) return 0;
    const Eigen::Index period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
  }
};

}  // namespace detail

inline ComplexSpectrogram stft(const Waveform& wave, const StftConfig& cfg) {
  cfg.validate();
  if (wave.sample_rate != cfg.sample_rate) {
    throw ConfigError("waveform sample rate " +
                      std::to_string(wave.sample_rate) +
                      " does not match configured " +
                      std::to_string(cfg.sample_rate));
  }
  if (wave.samples.empty()) throw DomainError("stft of an empty signal");

  const auto framing =
      detail::Framing::for_signal(static_cast<Eigen::Index>(wave.size()), cfg);
  const Eigen::Index n = static_cast<Eigen::Index>(wave.size());
  std::vector<double> padded(static_cast<size_t>(framing.total));
  for (Eigen::Index p = 0; p < framing.total; ++p) {
    const Eigen::Index i = framing.source_index(p);
    padded[static_cast<size_t>(p)] = i < n ? wave.samples[static_cast<size_t>(i)] : 0.0;
  }

  const auto window = analysis_window(cfg);
  RealFft fft(cfg.fft_size);
  ComplexSpectrogram out{Eigen::MatrixXcd(cfg.bins(), framing.frames), cfg};
  std::vector<double> frame(window.size());
  std::vector<std::complex<double>> column(static_cast<size_t>(cfg.bins()));
  for (Eigen::Index t = 0; t < framing.frames; ++t) {
    const size_t start = static_cast<size_t>(t * cfg.hop_length);
    for (size_t i = 0; i < window.size(); ++i) {
      frame[i] = window[i] * padded[start + i];
    }
    fft.forward(frame, column);
    for (Eigen::Index k = 0; k < cfg.bins(); ++k) {
      out.data(k, t) = column[static_cast<size_t>(k)];
    }
  }
  return out;
}

// Least-squares inverse of stft(): weighted overlap-add with the canonical
// dual window, folded back through the reflect padding. stft(istft(S)) is the
// orthogonal projection of S onto consistent spectrograms (with respect to
// the two-sided spectrum norm). The result has (T - 1) * hop samples.
inline Waveform istft(const ComplexSpectrogram& spec) {
  const StftConfig& cfg = spec.config;
  cfg.validate();
  if (spec.bins() != cfg.bins()) {
    throw DomainError("spectrogram has " + std::to_string(spec.bins()) +
                      " bins, config expects " + std::to_string(cfg.bins()));
  }
  if (spec.frames() < 2) throw DomainError("istft needs at least two frames");

  const auto framing = detail::Framing::for_frames(spec.frames(), cfg);
  const auto window = analysis_window(cfg);
  std::vector<double> numerator(static_cast<size_t>(framing.total), 0.0);
  std::vector<double> denominator(static_cast<size_t>(framing.total), 0.0);

  RealFft fft(cfg.fft_size);
  std::vector<std::complex<double>> column(static_cast<size_t>(cfg.bins()));
  std::vector<double> frame(static_cast<size_t>(cfg.fft_size));
  for (Eigen::Index t = 0; t < spec.frames(); ++t) {
    for (Eigen::Index k = 0; k < cfg.bins(); ++k) {
      column[static_cast<size_t>(k)] = spec.data(k, t);
    }
    fft.inverse(column, frame);
    const size_t start = static_cast<size_t>(t * cfg.hop_length);
    for (size_t i = 0; i < window.size(); ++i) {
      numerator[start + i] += window[i] * frame[i];
      denominator[start + i] += window[i] * window[i];
    }
  }

  std::vector<double> num(static_cast<size_t>(framing.padded_signal), 0.0);
  std::vector<double> den(num.size(), 0.0);
  for (Eigen::Index p = 0; p < framing.total; ++p) {
    const size_t i = static_cast<size_t>(framing.source_index(p));
    num[i] += numerator[static_cast<size_t>(p)];
    den[i] += denominator[static_cast<size_t>(p)];
  }

  Waveform out{std::vector<double>(num.size()), cfg.sample_rate};
  for (size_t i = 0; i < num.size(); ++i) {
    if (!(den[i] > 1e-12)) {
      throw NumericError("window normalization vanishes at sample " +
                         std::to_string(i));
    }
    out.samples[i] = num[i] / den[i];
  }
  return out;
}

inline AmplitudeSpectrogram amplitude(const ComplexSpectrogram& spec) {
  return {spec.data.cwiseAbs(), spec.config};
}

inline PhaseSpectrogram phase(const ComplexSpectrogram& spec) {
  Eigen::MatrixXd arg = spec.data.unaryExpr(
      [](const std::complex<double>& c) { return wrap(std::arg(c)); });
  return {std::move(arg), spec.config, true};
}

// amplitude * exp(i * phase)
inline ComplexSpectrogram compose(const AmplitudeSpectrogram& amp,
                                  const PhaseSpectrogram& ph) {
  if (amp.data.rows() != ph.data.rows() || amp.data.cols() != ph.data.cols()) {
    throw DomainError("amplitude and phase shapes differ");
  }
  ComplexSpectrogram out{Eigen::MatrixXcd(amp.data.rows(), amp.data.cols()),
                         amp.config};
  for (Eigen::Index t = 0; t < amp.data.cols(); ++t) {
    for (Eigen::Index k = 0; k < amp.data.rows(); ++k) {
      out.data(k, t) = std::polar(amp.data(k, t), ph.data(k, t));
    }
  }
  return out;
}

// Frobenius norm of the full two-sided spectrum that a one-sided
// spectrogram represents: interior bins count twice.
inline double two_sided_norm(const Eigen::MatrixXcd& one_sided, int fft_size) {
  double sum = 0.0;
  const Eigen::Index bins = one_sided.rows();
  for (Eigen::Index k = 0; k < bins; ++k) {
    const bool unpaired = k == 0 || (fft_size % 2 == 0 && k == bins - 1);
    sum += (unpaired ? 1.0 : 2.0) * one_sided.row(k).squaredNorm();
  }
  return std::sqrt(sum);
}

}  // namespace rpu
