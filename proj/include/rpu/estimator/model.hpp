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
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rpu/error.hpp"

// Gated-tanh multilayer regressors for phase and phase derivatives, trained
// under the von Mises (negative cosine) loss.
namespace rpu {

enum class TargetKind : std::uint32_t {
  kPhase = 0,
  kInstantaneousFrequency = 1,
  kGroupDelay = 2,
};

inline std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::kPhase:
      return "phase";
    case TargetKind::kInstantaneousFrequency:
      return "if";
    case TargetKind::kGroupDelay:
      return "gd";
  }
  return "unknown";
}

inline TargetKind parse_target_kind(const std::string& s) {
  if (s == "phase") return TargetKind::kPhase;
  if (s == "if") return TargetKind::kInstantaneousFrequency;
  if (s == "gd") return TargetKind::kGroupDelay;
  throw UsageError("unknown target kind '" + s + "' (expected phase, if or gd)");
}

// Phase and IF models predict K values per frame, GD models K - 1.
inline int output_dim(TargetKind kind, Eigen::Index bins) {
  return static_cast<int>(kind == TargetKind::kGroupDelay ? bins - 1 : bins);
}

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// tanh(A x + a) * sigmoid(B x + b)
template <typename Scalar>
struct GatedLayer {
  MatrixX<Scalar> value_weight;
  VectorX<Scalar> value_bias;
  MatrixX<Scalar> gate_weight;
  VectorX<Scalar> gate_bias;
};

template <typename Scalar>
struct AffineLayer {
  MatrixX<Scalar> weight;
  VectorX<Scalar> bias;
};

struct ModelShape {
  TargetKind kind = TargetKind::kInstantaneousFrequency;
  int input_dim = 0;
  int hidden_width = 0;
  int num_layers = 2;  // gated layers + the final affine layer
  int output_dim = 0;

  void validate() const {
    if (input_dim < 1 || output_dim < 1) {
      throw ConfigError("model input and output dimensions must be positive");
    }
    if (num_layers < 1) throw ConfigError("model needs at least one layer");
    if (num_layers > 1 && hidden_width < 1) {
      throw ConfigError("hidden_width must be positive");
    }
  }
};

template <typename Scalar>
struct EstimatorModel {
  TargetKind target_kind = TargetKind::kInstantaneousFrequency;
  std::vector<GatedLayer<Scalar>> hidden;
  AffineLayer<Scalar> output;

  int input_dim() const {
    return static_cast<int>(hidden.empty() ? output.weight.cols()
                                           : hidden.front().value_weight.cols());
  }
  int output_dim() const { return static_cast<int>(output.weight.rows()); }
  int num_layers() const { return static_cast<int>(hidden.size()) + 1; }
  int hidden_width() const {
    return hidden.empty() ? 0 : static_cast<int>(hidden.front().value_weight.rows());
  }

  // Visits every parameter block in declaration order: per gated layer the
  // value weight, value bias, gate weight and gate bias, then the output
  // weight and bias.
  template <typename F>
  void for_each_block(F&& f) {
    for (auto& layer : hidden) {
      f(std::span<Scalar>(layer.value_weight.data(), layer.value_weight.size()));
      f(std::span<Scalar>(layer.value_bias.data(), layer.value_bias.size()));
      f(std::span<Scalar>(layer.gate_weight.data(), layer.gate_weight.size()));
      f(std::span<Scalar>(layer.gate_bias.data(), layer.gate_bias.size()));
    }
    f(std::span<Scalar>(output.weight.data(), output.weight.size()));
    f(std::span<Scalar>(output.bias.data(), output.bias.size()));
  }

  template <typename F>
  void for_each_block(F&& f) const {
    const_cast<EstimatorModel*>(this)->for_each_block(
        [&](std::span<Scalar> s) { f(std::span<const Scalar>(s)); });
  }

  std::vector<Scalar*> block_pointers() {
    std::vector<Scalar*> out;
    for_each_block([&](std::span<Scalar> s) { out.push_back(s.data()); });
    return out;
  }

  size_t parameter_count() const {
    size_t n = 0;
    for_each_block([&](std::span<const Scalar> s) { n += s.size(); });
    return n;
  }

  bool all_finite() const {
    bool ok = true;
    for_each_block([&](std::span<const Scalar> s) {
      for (Scalar v : s) ok = ok && std::isfinite(static_cast<double>(v));
    });
    return ok;
  }

  EstimatorModel zeros_like() const {
    EstimatorModel z = *this;
    z.for_each_block([](std::span<Scalar> s) { std::fill(s.begin(), s.end(), Scalar(0)); });
    return z;
  }

  template <typename Other>
  EstimatorModel<Other> cast() const {
    EstimatorModel<Other> out;
    out.target_kind = target_kind;
    for (const auto& l : hidden) {
      out.hidden.push_back({l.value_weight.template cast<Other>(),
                            l.value_bias.template cast<Other>(),
                            l.gate_weight.template cast<Other>(),
                            l.gate_bias.template cast<Other>()});
    }
    out.output = {output.weight.template cast<Other>(),
                  output.bias.template cast<Other>()};
    return out;
  }

  bool operator==(const EstimatorModel& o) const {
    if (target_kind != o.target_kind || hidden.size() != o.hidden.size()) return false;
    for (size_t i = 0; i < hidden.size(); ++i) {
      const auto& a = hidden[i];
      const auto& b = o.hidden[i];
      if (a.value_weight != b.value_weight || a.value_bias != b.value_bias ||
          a.gate_weight != b.gate_weight || a.gate_bias != b.gate_bias) {
        return false;
      }
    }
    return output.weight == o.output.weight && output.bias == o.output.bias;
  }
};

// Uniform in [0, 1) from the top 53 bits; portable across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)) per affine map, biases 0.
template <typename Scalar>
EstimatorModel<Scalar> make_model(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  std::mt19937_64 rng(seed);
  auto init = [&rng](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    MatrixX<Scalar> w(rows, cols);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * limit);
      }
    }
    return w;
  };

  EstimatorModel<Scalar> m;
  m.target_kind = shape.kind;
  int in = shape.input_dim;
  for (int l = 0; l + 1 < shape.num_layers; ++l) {
    GatedLayer<Scalar> layer;
    layer.value_weight = init(shape.hidden_width, in);
    layer.value_bias = VectorX<Scalar>::Zero(shape.hidden_width);
    layer.gate_weight = init(shape.hidden_width, in);
    layer.gate_bias = VectorX<Scalar>::Zero(shape.hidden_width);
    m.hidden.push_back(std::move(layer));
    in = shape.hidden_width;
  }
  m.output.weight = init(shape.output_dim, in);
  m.output.bias = VectorX<Scalar>::Zero(shape.output_dim);
  return m;
}

namespace detail {

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
struct LayerCache {
  MatrixX<Scalar> input;
  MatrixX<Scalar> tanh_value;
  MatrixX<Scalar> sigmoid_gate;
};

}  // namespace detail

// Columns of `inputs` are samples; returns one column of angles per sample.
template <typename Scalar>
MatrixX<Scalar> forward_batch(const EstimatorModel<Scalar>& model,
                              const MatrixX<Scalar>& inputs,
                              std::vector<detail::LayerCache<Scalar>>* cache = nullptr) {
  if (inputs.rows() != model.input_dim()) {
    throw DomainError("estimator input has dimension " +
                      std::to_string(inputs.rows()) + ", model expects " +
                      std::to_string(model.input_dim()));
  }
  MatrixX<Scalar> x = inputs;
  if (cache != nullptr) cache->resize(model.hidden.size());
  for (size_t l = 0; l < model.hidden.size(); ++l) {
    const auto& layer = model.hidden[l];
    MatrixX<Scalar> a = layer.value_weight * x;
    a.colwise() += layer.value_bias;
    MatrixX<Scalar> b = layer.gate_weight * x;
    b.colwise() += layer.gate_bias;
    a = a.array().tanh().matrix();
    b = b.unaryExpr([](Scalar v) { return detail::sigmoid(v); });
    MatrixX<Scalar> h = a.cwiseProduct(b);
    if (cache != nullptr) {
      (*cache)[l] = {std::move(x), std::move(a), std::move(b)};
    }
    x = std::move(h);
  }
  MatrixX<Scalar> y = model.output.weight * x;
  y.colwise() += model.output.bias;
  if (cache != nullptr) cache->push_back({std::move(x), {}, {}});
  return y;
}

template <typename Scalar>
VectorX<Scalar> forward(const EstimatorModel<Scalar>& model,
                        const VectorX<Scalar>& psi) {
  return forward_batch<Scalar>(model, psi);
}

// -sum cos(target - pred). Insensitive to 2 pi shifts of either argument.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar von_mises_loss(const Eigen::MatrixBase<DerivedA>& pred,
                                         const Eigen::MatrixBase<DerivedB>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DomainError("von_mises_loss: prediction and target shapes differ");
  }
  return -(target - pred).array().cos().sum();
}

// d loss / d pred = -sin(target - pred)
template <typename DerivedA, typename DerivedB>
auto von_mises_loss_derivative(const Eigen::MatrixBase<DerivedA>& pred,
                               const Eigen::MatrixBase<DerivedB>& target) {
  return (-(target - pred).array().sin()).matrix().eval();
}

// Loss over a batch and its exact gradient with respect to every parameter
// (accumulated into `grad`, which must have the model's shape).
template <typename Scalar>
Scalar loss_and_gradient(const EstimatorModel<Scalar>& model,
                         const MatrixX<Scalar>& inputs,
                         const MatrixX<Scalar>& targets,
                         EstimatorModel<Scalar>& grad) {
  std::vector<detail::LayerCache<Scalar>> cache;
  const MatrixX<Scalar> pred = forward_batch(model, inputs, &cache);
  if (targets.rows() != pred.rows() || targets.cols() != pred.cols()) {
    throw DomainError("estimator target shape does not match the model output");
  }
  const Scalar loss = von_mises_loss(pred, targets);

  MatrixX<Scalar> delta = von_mises_loss_derivative(pred, targets);
  const MatrixX<Scalar>& last_input = cache.back().input;
  grad.output.weight.noalias() += delta * last_input.transpose();
  grad.output.bias += delta.rowwise().sum();
  MatrixX<Scalar> dh = model.output.weight.transpose() * delta;

  for (size_t l = model.hidden.size(); l-- > 0;) {
    const auto& layer = model.hidden[l];
    const auto& c = cache[l];
    const MatrixX<Scalar> d_value =
        (dh.array() * c.sigmoid_gate.array() *
         (Scalar(1) - c.tanh_value.array().square()))
            .matrix();
    const MatrixX<Scalar> d_gate =
        (dh.array() * c.tanh_value.array() * c.sigmoid_gate.array() *
         (Scalar(1) - c.sigmoid_gate.array()))
            .matrix();
    auto& g = grad.hidden[l];
    g.value_weight.noalias() += d_value * c.input.transpose();
    g.value_bias += d_value.rowwise().sum();
    g.gate_weight.noalias() += d_gate * c.input.transpose();
    g.gate_bias += d_gate.rowwise().sum();
    if (l > 0) {
      dh = layer.value_weight.transpose() * d_value +
           layer.gate_weight.transpose() * d_gate;
    }
  }
  return loss;
}

template <typename Scalar>
EstimatorModel<Scalar> loss_gradient(const EstimatorModel<Scalar>& model,
                                     const VectorX<Scalar>& psi,
                                     const VectorX<Scalar>& target) {
  EstimatorModel<Scalar> grad = model.zeros_like();
  loss_and_gradient<Scalar>(model, psi, target, grad);
  return grad;
}

}  // namespace rpu
