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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "rpu/error.hpp"

// Little-endian primitives for the binary container formats.
namespace rpu::binary {

template <typename U>
void write_le(std::ostream& out, U value) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> bytes;
  for (size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

inline void write_u16(std::ostream& out, std::uint16_t v) { write_le(out, v); }
inline void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
inline void write_f32(std::ostream& out, float v) {
  write_le(out, std::bit_cast<std::uint32_t>(v));
}
inline void write_f64(std::ostream& out, double v) {
  write_le(out, std::bit_cast<std::uint64_t>(v));
}
inline void write_tag(std::ostream& out, const char (&tag)[5]) {
  out.write(tag, 4);
}

// Reads with position tracking so errors can report the byte offset.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::int64_t offset() const { return offset_; }

  void read_bytes(char* dst, size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in_.gcount()) != n) {
      throw IoError(std::string("truncated input while reading ") + what,
                    offset_ + in_.gcount());
    }
    offset_ += static_cast<std::int64_t>(n);
  }

  template <typename U>
  U read_le(const char* what) {
    std::array<char, sizeof(U)> bytes;
    read_bytes(bytes.data(), bytes.size(), what);
    U value = 0;
    for (size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(bytes[i])) << (8 * i);
    }
    return value;
  }

  std::uint16_t u16(const char* what) { return read_le<std::uint16_t>(what); }
  std::uint32_t u32(const char* what) { return read_le<std::uint32_t>(what); }
  float f32(const char* what) {
    return std::bit_cast<float>(read_le<std::uint32_t>(what));
  }
  double f64(const char* what) {
    return std::bit_cast<double>(read_le<std::uint64_t>(what));
  }
  std::string tag(const char* what) {
    std::string s(4, '\0');
    read_bytes(s.data(), 4, what);
    return s;
  }
  void skip(std::uint64_t n, const char* what) {
    in_.ignore(static_cast<std::streamsize>(n));
    if (static_cast<std::uint64_t>(in_.gcount()) != n) {
      throw IoError(std::string("truncated input while skipping ") + what,
                    offset_ + in_.gcount());
    }
    offset_ += static_cast<std::int64_t>(n);
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::int64_t offset_ = 0;
};

}  // namespace rpu::binary
