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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rpu/estimator/model.hpp"
#include "rpu/spectral.hpp"

// Bundled synthetic desk corpus: vowel-like harmonic stacks, chirps, tone
// mixtures and amplitude-modulated noise. Everything is derived from the
// seed, so the corpus is reproducible bit for bit.
namespace rpu {

struct CorpusSignal {
  std::string name;
  Waveform wave;
  bool held_out = false;
};

namespace corpus_detail {

struct Noise {
  explicit Noise(std::uint64_t seed) : rng(seed) {}
  // Box-Muller on the portable uniform draw.
  double gaussian() {
    const double u1 = std::max(uniform01(rng), 1e-300);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
  std::mt19937_64 rng;
};

// Raised-cosine syllable envelope: voiced stretches separated by short gaps.
inline double syllable_envelope(double t, double seconds) {
  constexpr double kSyllable = 0.46;
  constexpr double kGap = 0.08;
  constexpr double kRamp = 0.04;
  const double period = kSyllable + kGap;
  const double local = std::fmod(t, period);
  if (local >= kSyllable || t > seconds) return 0.0;
  if (local < kRamp) return 0.5 - 0.5 * std::cos(kPi * local / kRamp);
  if (local > kSyllable - kRamp) {
    return 0.5 - 0.5 * std::cos(kPi * (kSyllable - local) / kRamp);
  }
  return 1.0;
}

inline void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0) {
    for (double& v : x) v *= peak / m;
  }
}

inline std::vector<double> vowel(const std::array<double, 3>& formants, double f0,
                                 int sample_rate, double seconds, Noise& noise) {
  const size_t n = static_cast<size_t>(std::lround(seconds * sample_rate));
  constexpr std::array<double, 3> kBandwidth = {90.0, 110.0, 150.0};
  constexpr std::array<double, 3> kGain = {1.0, 0.6, 0.3};
  const double nyquist = 0.5 * sample_rate;
  const int harmonics = static_cast<int>(0.9 * nyquist / (f0 * 0.85));
  std::vector<double> start_phase(static_cast<size_t>(harmonics));
  for (auto& p : start_phase) p = noise.uniform(-kPi, kPi);
  const double vibrato_rate = noise.uniform(4.5, 6.0);

  std::vector<double> x(n, 0.0);
  double cycle = 0.0;  // accumulated fundamental phase
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f0 * (1.0 - 0.15 * t / seconds) *
                     (1.0 + 0.02 * std::sin(kTwoPi * vibrato_rate * t));
    cycle += kTwoPi * f / sample_rate;
    double s = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      const double fh = h * f;
      if (fh >= 0.95 * nyquist) break;
      double gain = 0.02;
      for (size_t j = 0; j < formants.size(); ++j) {
        const double d = (fh - formants[j]) / kBandwidth[j];
        gain += kGain[j] / (1.0 + d * d);
      }
      gain /= std::sqrt(static_cast<double>(h));
      s += gain * std::cos(h * cycle + start_phase[static_cast<size_t>(h - 1)]);
    }
    x[i] = s * syllable_envelope(t, seconds);
  }
  return x;
}

inline std::vector<double> chirp(double f_start, double f_end, int sample_rate,
                                 double seconds) {
  const size_t n = static_cast<size_t>(std::lround(seconds * sample_rate));
  std::vector<double> x(n);
  double ph = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double f = f_start * std::pow(f_end / f_start, t / seconds);
    ph += kTwoPi * f / sample_rate;
    x[i] = std::cos(ph) + 0.5 * std::cos(2.0 * ph) + 0.25 * std::cos(3.0 * ph);
  }
  return x;
}

inline std::vector<double> tones(const std::array<double, 3>& freqs, int sample_rate,
                                 double seconds, Noise& noise) {
  const size_t n = static_cast<size_t>(std::lround(seconds * sample_rate));
  constexpr std::array<double, 3> kGain = {1.0, 0.6, 0.3};
  std::array<double, 3> offset{};
  for (auto& p : offset) p = noise.uniform(-kPi, kPi);
  std::vector<double> x(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    for (size_t j = 0; j < freqs.size(); ++j) {
      x[i] += kGain[j] * std::cos(kTwoPi * freqs[j] * t + offset[j]);
    }
    x[i] *= 1.0 + 0.3 * std::sin(kTwoPi * 1.5 * t);
  }
  return x;
}

// Gaussian noise through a two-pole resonator, amplitude-modulated.
inline std::vector<double> am_noise(double center, double am_rate, int sample_rate,
                                    double seconds, Noise& noise) {
  const size_t n = static_cast<size_t>(std::lround(seconds * sample_rate));
  const double r = 0.97;
  const double a1 = 2.0 * r * std::cos(kTwoPi * center / sample_rate);
  const double a2 = -r * r;
  std::vector<double> x(n);
  double y1 = 0.0, y2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double y = noise.gaussian() + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    x[i] = y * (1.0 + 0.8 * std::sin(kTwoPi * am_rate * t));
  }
  return x;
}

}  // namespace corpus_detail

// Ten signals; four (one per family) are marked held out for evaluation.
inline std::vector<CorpusSignal> generate_corpus(std::uint64_t seed = 2020,
                                                 int sample_rate = 16000,
                                                 double seconds = 2.0) {
  using namespace corpus_detail;
  Noise noise(seed);
  std::vector<CorpusSignal> out;
  auto add = [&](std::string name, std::vector<double> x, bool held_out) {
    normalize_peak(x, 0.7);
    for (double& v : x) v += 1e-4 * noise.gaussian();  // about -70 dB floor
    out.push_back({std::move(name), Waveform{std::move(x), sample_rate}, held_out});
  };
  add("vowel_a", vowel({730, 1090, 2440}, noise.uniform(110, 140), sample_rate, seconds, noise), false);
  add("vowel_i", vowel({270, 2290, 3010}, noise.uniform(180, 220), sample_rate, seconds, noise), false);
  add("vowel_u", vowel({300, 870, 2240}, noise.uniform(120, 160), sample_rate, seconds, noise), false);
  add("vowel_e", vowel({530, 1840, 2480}, noise.uniform(140, 190), sample_rate, seconds, noise), true);
  add("chirp_up", chirp(150.0, 2500.0, sample_rate, seconds), false);
  add("chirp_down", chirp(2200.0, 180.0, sample_rate, seconds), true);
  add("tones_a", tones({440.0, 1230.0, 2750.0}, sample_rate, seconds, noise), false);
  add("tones_b", tones({523.0, 1570.0, 3100.0}, sample_rate, seconds, noise), true);
  add("am_noise_a", am_noise(1000.0, 3.0, sample_rate, seconds, noise), false);
  add("am_noise_b", am_noise(1800.0, 4.0, sample_rate, seconds, noise), true);
  return out;
}

}  // namespace rpu
