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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "rpu/binary_io.hpp"
#include "rpu/spectral.hpp"

// Canonical RIFF/WAVE, PCM 16-bit mono.
namespace rpu {

inline Waveform read_wav(std::istream& in) {
  binary::Reader r(in);
  if (r.tag("RIFF tag") != "RIFF") throw IoError("missing RIFF tag", 0);
  r.u32("RIFF size");
  if (r.tag("WAVE tag") != "WAVE") throw IoError("missing WAVE tag", 8);

  bool have_format = false;
  int sample_rate = 0;
  while (true) {
    const std::int64_t chunk_offset = r.offset();
    const std::string id = r.tag("chunk id");
    const std::uint32_t size = r.u32("chunk size");
    if (id == "fmt ") {
      if (size < 16) throw IoError("fmt chunk too small", chunk_offset);
      const std::uint16_t format = r.u16("audio format");
      const std::uint16_t channels = r.u16("channel count");
      sample_rate = static_cast<int>(r.u32("sample rate"));
      r.u32("byte rate");
      r.u16("block align");
      const std::uint16_t bits = r.u16("bits per sample");
      if (format != 1) throw IoError("only PCM WAV is supported", chunk_offset + 8);
      if (channels != 1) throw IoError("only mono WAV is supported", chunk_offset + 10);
      if (bits != 16) throw IoError("only 16-bit WAV is supported", chunk_offset + 22);
      r.skip(size - 16 + (size & 1u), "fmt extension");
      have_format = true;
    } else if (id == "data") {
      if (!have_format) throw IoError("data chunk before fmt chunk", chunk_offset);
      if (size % 2 != 0) throw IoError("odd data chunk size", chunk_offset + 4);
      Waveform wave{std::vector<double>(size / 2), sample_rate};
      for (auto& s : wave.samples) {
        const auto v = static_cast<std::int16_t>(r.u16("sample"));
        s = static_cast<double>(v) / 32768.0;
      }
      return wave;
    } else {
      r.skip(size + (size & 1u), "chunk payload");
    }
  }
}

inline Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_wav(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline std::int16_t to_pcm16(double x) {
  const double scaled = std::round(x * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

inline void write_wav(std::ostream& out, const Waveform& wave) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(wave.size() * 2);
  binary::write_tag(out, "RIFF");
  binary::write_u32(out, 36 + data_bytes);
  binary::write_tag(out, "WAVE");
  binary::write_tag(out, "fmt ");
  binary::write_u32(out, 16);
  binary::write_u16(out, 1);  // PCM
  binary::write_u16(out, 1);  // mono
  binary::write_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
  binary::write_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  binary::write_u16(out, 2);
  binary::write_u16(out, 16);
  binary::write_tag(out, "data");
  binary::write_u32(out, data_bytes);
  for (double s : wave.samples) {
    binary::write_u16(out, static_cast<std::uint16_t>(to_pcm16(s)));
  }
}

inline void write_wav(const std::filesystem::path& path, const Waveform& wave) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  write_wav(out, wave);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rpu
