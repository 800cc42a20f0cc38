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
#include "rpu/estimator/model.hpp"

// ".mdl" model file:
//   "VMN1", u32 target_kind, u32 layer count L, L x (u32 in_dim, u32 out_dim),
//   then f32 blocks in declaration order: for each gated layer the value
//   weight, value bias, gate weight, gate bias; then output weight and bias.
//   Weight matrices are stored row-major (out_dim rows of in_dim values).
namespace rpu {

namespace detail {

template <typename Matrix>
void write_matrix_f32(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::write_f32(out, m(r, c));
  }
}

template <typename Matrix>
void read_matrix_f32(binary::Reader& in, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in.f32("weights");
  }
}

}  // namespace detail

inline void write_model(std::ostream& out, const EstimatorModel<float>& m) {
  binary::write_tag(out, "VMN1");
  binary::write_u32(out, static_cast<std::uint32_t>(m.target_kind));
  binary::write_u32(out, static_cast<std::uint32_t>(m.num_layers()));
  for (const auto& l : m.hidden) {
    binary::write_u32(out, static_cast<std::uint32_t>(l.value_weight.cols()));
    binary::write_u32(out, static_cast<std::uint32_t>(l.value_weight.rows()));
  }
  binary::write_u32(out, static_cast<std::uint32_t>(m.output.weight.cols()));
  binary::write_u32(out, static_cast<std::uint32_t>(m.output.weight.rows()));
  for (const auto& l : m.hidden) {
    detail::write_matrix_f32(out, l.value_weight);
    detail::write_matrix_f32(out, l.value_bias);
    detail::write_matrix_f32(out, l.gate_weight);
    detail::write_matrix_f32(out, l.gate_bias);
  }
  detail::write_matrix_f32(out, m.output.weight);
  detail::write_matrix_f32(out, m.output.bias);
}

inline EstimatorModel<float> read_model(std::istream& in) {
  binary::Reader r(in);
  if (r.tag("magic") != "VMN1") throw IoError("bad model magic", 0);
  EstimatorModel<float> m;
  const std::uint32_t kind = r.u32("target kind");
  if (kind > 2) throw IoError("unknown target kind " + std::to_string(kind), 4);
  m.target_kind = static_cast<TargetKind>(kind);
  const std::int64_t count_offset = r.offset();
  const std::uint32_t layers = r.u32("layer count");
  if (layers < 1 || layers > 1024) {
    throw IoError("implausible layer count " + std::to_string(layers), count_offset);
  }
  std::vector<std::pair<std::uint32_t, std::uint32_t>> dims(layers);
  std::uint32_t prev_out = 0;
  for (std::uint32_t l = 0; l < layers; ++l) {
    const std::int64_t at = r.offset();
    dims[l].first = r.u32("layer input dim");
    dims[l].second = r.u32("layer output dim");
    if (dims[l].first == 0 || dims[l].second == 0 ||
        (l > 0 && dims[l].first != prev_out)) {
      throw IoError("inconsistent layer dimensions", at);
    }
    prev_out = dims[l].second;
  }
  for (std::uint32_t l = 0; l + 1 < layers; ++l) {
    const auto [in_dim, out_dim] = dims[l];
    GatedLayer<float> g{MatrixX<float>(out_dim, in_dim), VectorX<float>(out_dim),
                        MatrixX<float>(out_dim, in_dim), VectorX<float>(out_dim)};
    detail::read_matrix_f32(r, g.value_weight);
    detail::read_matrix_f32(r, g.value_bias);
    detail::read_matrix_f32(r, g.gate_weight);
    detail::read_matrix_f32(r, g.gate_bias);
    m.hidden.push_back(std::move(g));
  }
  const auto [in_dim, out_dim] = dims.back();
  m.output = {MatrixX<float>(out_dim, in_dim), VectorX<float>(out_dim)};
  detail::read_matrix_f32(r, m.output.weight);
  detail::read_matrix_f32(r, m.output.bias);
  if (!r.at_end()) throw IoError("trailing bytes after model payload", r.offset());
  return m;
}

inline void write_model(const std::filesystem::path& path, const EstimatorModel<float>& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path.string());
  write_model(out, m);
  if (!out) throw IoError("write failed for " + path.string());
}

inline EstimatorModel<float> read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_model(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace rpu
