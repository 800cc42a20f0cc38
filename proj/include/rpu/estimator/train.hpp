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
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rpu/error.hpp"
#include "rpu/estimator/features.hpp"
#include "rpu/estimator/model.hpp"
#include "rpu/phasediff.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

struct TrainConfig {
  // Adam
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double initial_lr = 0.01;
  int lr_halving_period = 1000;  // epochs
  int epochs = 10000;
  double segment_seconds = 2.0;
  int batch_size = 64;  // frames
  std::uint64_t seed = 0;
  // Architecture
  int hidden_layers = 4;  // gated layers before the final affine layer
  int hidden_width = 1024;

  static TrainConfig full() { return {}; }

  // Trains on one core in a few minutes per model.
  static TrainConfig desk(std::uint64_t seed = 0) {
    TrainConfig c;
    c.seed = seed;
    c.epochs = 500;
    c.lr_halving_period = 50;
    c.hidden_layers = 2;
    c.hidden_width = 128;
    return c;
  }

  void validate() const {
    if (!(initial_lr > 0.0)) throw ConfigError("initial_lr must be positive");
    if (lr_halving_period < 1) throw ConfigError("lr_halving_period must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(segment_seconds > 0.0)) throw ConfigError("segment_seconds must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (hidden_layers < 0) throw ConfigError("hidden_layers must be >= 0");
    if (hidden_layers > 0 && hidden_width < 1) {
      throw ConfigError("hidden_width must be >= 1");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 &&
          epsilon > 0.0)) {
      throw ConfigError("invalid Adam hyperparameters");
    }
  }

  double learning_rate(int epoch) const {
    return initial_lr * std::ldexp(1.0, -(epoch / lr_halving_period));
  }
};

// Clean amplitude and phase of one utterance.
struct TrainingExample {
  AmplitudeSpectrogram amplitude;
  PhaseSpectrogram phase;
};

// Per-frame samples: column j of inputs is psi_t, column j of targets the
// matching phase, IF (frames t -> t+1) or GD vector.
struct TrainingSet {
  Eigen::MatrixXf inputs;
  Eigen::MatrixXf targets;

  Eigen::Index size() const { return inputs.cols(); }
};

inline Eigen::MatrixXd targets_for(TargetKind kind, const Eigen::MatrixXd& phase) {
  switch (kind) {
    case TargetKind::kPhase:
      return phase;
    case TargetKind::kInstantaneousFrequency:
      return phase.cols() >= 2 ? instantaneous_frequency(phase)
                               : Eigen::MatrixXd(phase.rows(), 0);
    case TargetKind::kGroupDelay:
      return group_delay(phase);
  }
  return {};
}

// Utterances are cut into segments of about segment_seconds; each segment is
// normalized on its own. A tail shorter than half a segment joins the
// previous one.
inline TrainingSet build_training_set(std::span<const TrainingExample> data,
                                      TargetKind kind, const FeatureConfig& fcfg,
                                      double segment_seconds) {
  if (data.empty()) throw DomainError("training dataset is empty");
  std::vector<Eigen::MatrixXd> inputs;
  std::vector<Eigen::MatrixXd> targets;
  Eigen::Index total = 0;
  for (const auto& ex : data) {
    if (ex.amplitude.data.rows() != ex.phase.data.rows() ||
        ex.amplitude.data.cols() != ex.phase.data.cols()) {
      throw DomainError("training example amplitude/phase shapes differ");
    }
    const auto& cfg = ex.amplitude.config;
    const Eigen::Index frames = ex.amplitude.frames();
    const Eigen::Index seg = std::max<Eigen::Index>(
        1, std::llround(segment_seconds * cfg.sample_rate / cfg.hop_length));
    Eigen::Index start = 0;
    while (start < frames) {
      Eigen::Index len = std::min(seg, frames - start);
      if (frames - (start + len) < seg / 2) len = frames - start;
      const Eigen::MatrixXd psi =
          feature_matrix(ex.amplitude.data.middleCols(start, len), fcfg);
      const Eigen::MatrixXd y = targets_for(kind, ex.phase.data.middleCols(start, len));
      inputs.push_back(psi.leftCols(y.cols()));
      targets.push_back(y);
      total += y.cols();
      start += len;
    }
  }
  TrainingSet set;
  set.inputs.resize(inputs.front().rows(), total);
  set.targets.resize(targets.front().rows(), total);
  Eigen::Index col = 0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].rows() != set.inputs.rows() || targets[i].rows() != set.targets.rows()) {
      throw DomainError("training examples have inconsistent bin counts");
    }
    const Eigen::Index n = targets[i].cols();
    set.inputs.middleCols(col, n) = inputs[i].cast<float>();
    set.targets.middleCols(col, n) = targets[i].cast<float>();
    col += n;
  }
  return set;
}

template <typename Scalar>
class AdamOptimizer {
 public:
  AdamOptimizer(const EstimatorModel<Scalar>& model, const TrainConfig& cfg)
      : cfg_(cfg), first_(model.zeros_like()), second_(model.zeros_like()) {}

  void step(EstimatorModel<Scalar>& model, EstimatorModel<Scalar>& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    const auto params = model.block_pointers();
    const auto grads = grad.block_pointers();
    const auto m = first_.block_pointers();
    const auto v = second_.block_pointers();
    std::vector<size_t> sizes;
    model.for_each_block([&](std::span<Scalar> s) { sizes.push_back(s.size()); });
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
    const Scalar step = static_cast<Scalar>(lr / c1);
    const Scalar inv_c2 = static_cast<Scalar>(1.0 / c2);
    const Scalar eps = static_cast<Scalar>(cfg_.epsilon);
    for (size_t b = 0; b < sizes.size(); ++b) {
      for (size_t i = 0; i < sizes[b]; ++i) {
        const Scalar g = grads[b][i];
        m[b][i] = b1 * m[b][i] + (Scalar(1) - b1) * g;
        v[b][i] = b2 * v[b][i] + (Scalar(1) - b2) * g * g;
        params[b][i] -= step * m[b][i] / (std::sqrt(v[b][i] * inv_c2) + eps);
      }
    }
  }

 private:
  TrainConfig cfg_;
  EstimatorModel<Scalar> first_;
  EstimatorModel<Scalar> second_;
  int t_ = 0;
};

struct TrainResult {
  EstimatorModel<float> model;
  std::vector<double> loss_history;  // summed loss per epoch
};

// Per-epoch callback: (epoch, summed loss).
using EpochCallback = std::function<void(int, double)>;

// Mini-batch Adam over per-frame samples, single-threaded and fully
// determined by cfg.seed.
inline TrainResult train(const TrainingSet& set, TargetKind kind,
                         const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  cfg.validate();
  if (set.size() == 0) throw DomainError("training set has no samples");
  ModelShape shape{kind, static_cast<int>(set.inputs.rows()), cfg.hidden_width,
                   cfg.hidden_layers + 1, static_cast<int>(set.targets.rows())};
  TrainResult result{make_model<float>(shape, cfg.seed), {}};
  auto& model = result.model;

  std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);
  std::vector<Eigen::Index> order(static_cast<size_t>(set.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  AdamOptimizer<float> adam(model, cfg);
  EstimatorModel<float> grad = model.zeros_like();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with a portable uniform draw.
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform01(rng) * static_cast<double>(i));
      std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
    const double lr = cfg.learning_rate(epoch);
    double epoch_loss = 0.0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(cfg.batch_size)) {
      const size_t n = std::min(order.size() - start, static_cast<size_t>(cfg.batch_size));
      const std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(start + n));
      const Eigen::MatrixXf x = set.inputs(Eigen::all, idx);
      const Eigen::MatrixXf y = set.targets(Eigen::all, idx);
      grad.for_each_block([](std::span<float> s) { std::fill(s.begin(), s.end(), 0.0f); });
      const float loss = loss_and_gradient<float>(model, x, y, grad);
      if (!std::isfinite(loss)) {
        throw NumericError("training loss became non-finite at epoch " +
                           std::to_string(epoch) + ", batch starting at sample " +
                           std::to_string(start));
      }
      epoch_loss += loss;
      adam.step(model, grad, lr);
    }
    result.loss_history.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  if (!model.all_finite()) throw NumericError("trained model has non-finite weights");
  return result;
}

inline TrainResult train(std::span<const TrainingExample> data, TargetKind kind,
                         const TrainConfig& cfg, const FeatureConfig& fcfg = {},
                         const EpochCallback& on_epoch = {}) {
  return train(build_training_set(data, kind, fcfg, cfg.segment_seconds), kind, cfg,
               on_epoch);
}

}  // namespace rpu
