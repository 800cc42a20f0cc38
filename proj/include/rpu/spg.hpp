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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "rpu/binary_io.hpp"
#include "rpu/phasediff.hpp"
#include "rpu/spectral.hpp"

// ".spg" container:
//   "SPG1", u32 kind, u32 K, u32 T, u32 sample_rate, u32 window, u32 hop,
//   u32 fft_size, then row-major f64 payload (complex as re, im pairs).
// K and T always describe the underlying spectrogram; derivative kinds store
// K x (T - 1) (IF) or (K - 1) x T (GD) values.
namespace rpu {

enum class SpgKind : std::uint32_t {
  kComplex = 0,
  kAmplitude = 1,
  kPhase = 2,
  kInstantaneousFrequency = 3,
  kGroupDelay = 4,
};

struct SpgFile {
  SpgKind kind = SpgKind::kAmplitude;
  Eigen::Index bins = 0;
  Eigen::Index frames = 0;
  StftConfig config;
  Eigen::MatrixXd real;      // all kinds but kComplex
  Eigen::MatrixXcd complex;  // kComplex only

  // Shape of the stored payload for this kind.
  std::pair<Eigen::Index, Eigen::Index> payload_shape() const {
    switch (kind) {
      case SpgKind::kInstantaneousFrequency:
        return {bins, std::max<Eigen::Index>(frames - 1, 0)};
      case SpgKind::kGroupDelay:
        return {std::max<Eigen::Index>(bins - 1, 0), frames};
      default:
        return {bins, frames};
    }
  }
};

inline void write_spg(std::ostream& out, const SpgFile& f) {
  const auto [rows, cols] = f.payload_shape();
  const bool is_complex = f.kind == SpgKind::kComplex;
  if (is_complex ? (f.complex.rows() != rows || f.complex.cols() != cols)
                 : (f.real.rows() != rows || f.real.cols() != cols)) {
    throw DomainError("spg payload does not match declared shape");
  }
  binary::write_tag(out, "SPG1");
  binary::write_u32(out, static_cast<std::uint32_t>(f.kind));
  binary::write_u32(out, static_cast<std::uint32_t>(f.bins));
  binary::write_u32(out, static_cast<std::uint32_t>(f.frames));
  binary::write_u32(out, static_cast<std::uint32_t>(f.config.sample_rate));
  binary::write_u32(out, static_cast<std::uint32_t>(f.config.window_length));
  binary::write_u32(out, static_cast<std::uint32_t>(f.config.hop_length));
  binary::write_u32(out, static_cast<std::uint32_t>(f.config.fft_size));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (is_complex) {
        binary::write_f64(out, f.complex(r, c).real());
        binary::write_f64(out, f.complex(r, c).imag());
      } else {
        binary::write_f64(out, f.real(r, c));
      }
    }
  }
}

inline SpgFile read_spg(std::istream& in) {
  binary::Reader r(in);
  if (r.tag("magic") != "SPG1") throw IoError("bad spg magic", 0);
  SpgFile f;
  const std::uint32_t kind = r.u32("kind");
  if (kind > 4) throw IoError("unknown spg kind " + std::to_string(kind), 4);
  f.kind = static_cast<SpgKind>(kind);
  f.bins = r.u32("bin count");
  f.frames = r.u32("frame count");
  f.config.sample_rate = static_cast<int>(r.u32("sample rate"));
  f.config.window_length = static_cast<int>(r.u32("window length"));
  f.config.hop_length = static_cast<int>(r.u32("hop length"));
  f.config.fft_size = static_cast<int>(r.u32("fft size"));
  try {
    f.config.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid spg header: ") + e.what(), 16);
  }
  if (f.bins != f.config.bins()) {
    throw IoError("spg bin count disagrees with fft size", 8);
  }
  const auto [rows, cols] = f.payload_shape();
  if (f.kind == SpgKind::kComplex) {
    f.complex.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double re = r.f64("payload");
        const double im = r.f64("payload");
        f.complex(i, j) = {re, im};
      }
    }
  } else {
    f.real.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) f.real(i, j) = r.f64("payload");
    }
  }
  if (!r.at_end()) throw IoError("trailing bytes after spg payload", r.offset());
  return f;
}

inline void write_spg(const std::filesystem::path& path, const SpgFile& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  write_spg(out, f);
  if (!out) throw IoError("write failed for " + path.string());
}

inline SpgFile read_spg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_spg(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline SpgFile to_spg(const ComplexSpectrogram& s) {
  return {SpgKind::kComplex, s.bins(), s.frames(), s.config, {}, s.data};
}
inline SpgFile to_spg(const AmplitudeSpectrogram& s) {
  return {SpgKind::kAmplitude, s.bins(), s.frames(), s.config, s.data, {}};
}
inline SpgFile to_spg(const PhaseSpectrogram& s) {
  return {SpgKind::kPhase, s.bins(), s.frames(), s.config, s.data, {}};
}

namespace detail {
inline void expect_kind(const SpgFile& f, SpgKind kind, const char* name) {
  if (f.kind != kind) {
    throw IoError(std::string("expected a ") + name + " spectrogram, found kind " +
                  std::to_string(static_cast<std::uint32_t>(f.kind)));
  }
}
}  // namespace detail

inline ComplexSpectrogram complex_from_spg(const SpgFile& f) {
  detail::expect_kind(f, SpgKind::kComplex, "complex");
  return {f.complex, f.config};
}

inline AmplitudeSpectrogram amplitude_from_spg(const SpgFile& f) {
  detail::expect_kind(f, SpgKind::kAmplitude, "amplitude");
  return {f.real, f.config};
}

// The wrapped flag is not stored; it is recovered from the value range.
inline PhaseSpectrogram phase_from_spg(const SpgFile& f) {
  detail::expect_kind(f, SpgKind::kPhase, "phase");
  const bool wrapped =
      f.real.size() == 0 || (f.real.minCoeff() >= -kPi && f.real.maxCoeff() < kPi);
  return {f.real, f.config, wrapped};
}

inline std::pair<SpgFile, SpgFile> to_spg(const DerivativeField& d,
                                          const StftConfig& cfg) {
  d.check_shape();
  return {{SpgKind::kInstantaneousFrequency, d.bins(), d.frames(), cfg, d.if_field, {}},
          {SpgKind::kGroupDelay, d.bins(), d.frames(), cfg, d.gd_field, {}}};
}

inline DerivativeField derivatives_from_spg(const SpgFile& if_file,
                                            const SpgFile& gd_file) {
  detail::expect_kind(if_file, SpgKind::kInstantaneousFrequency, "IF");
  detail::expect_kind(gd_file, SpgKind::kGroupDelay, "GD");
  DerivativeField d{if_file.real, gd_file.real};
  d.check_shape();
  return d;
}

}  // namespace rpu
