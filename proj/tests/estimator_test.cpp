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

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rpu/estimator/derivative_source.hpp"
#include "rpu/estimator/model_io.hpp"
#include "rpu/metrics.hpp"
#include "rpu/rpu.hpp"

namespace rpu {
namespace {

TEST(FeaturesTest, ContextZeroIsTheNormalizedColumn) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd log_amp = testing::random_angles(6, 5, rng);
  const FeatureConfig cfg{0};
  const Eigen::MatrixXd normalized = normalize_log_amplitude(log_amp, cfg);
  EXPECT_EQ(features(log_amp, 3, cfg), Eigen::VectorXd(normalized.col(3)));
  EXPECT_NEAR(normalized.mean(), 0.0, 1e-12);
  EXPECT_NEAR((normalized.array() - normalized.mean()).square().mean(), 1.0, 1e-12);
}

TEST(FeaturesTest, EdgeFramesAreReplicated) {
  Eigen::MatrixXd log_amp(2, 4);
  log_amp << 0, 1, 2, 3,
             4, 5, 6, 7;
  const FeatureConfig cfg;
  const Eigen::MatrixXd n = normalize_log_amplitude(log_amp, cfg);
  const Eigen::VectorXd psi = features(log_amp, 0, cfg);
  ASSERT_EQ(psi.size(), 10);
  const int expected[] = {0, 0, 0, 1, 2};
  for (int j = 0; j < 5; ++j) {
    EXPECT_EQ(Eigen::VectorXd(psi.segment(2 * j, 2)), Eigen::VectorXd(n.col(expected[j])));
  }
  const Eigen::VectorXd last = features(log_amp, 3, cfg);
  EXPECT_EQ(Eigen::VectorXd(last.tail(2)), Eigen::VectorXd(n.col(3)));
  EXPECT_THROW(features(log_amp, 4, cfg), DomainError);
}

TEST(FeaturesTest, ConstantInputGivesZeros) {
  const Eigen::MatrixXd amp = Eigen::MatrixXd::Constant(5, 7, 0.3);
  const Eigen::MatrixXd psi = feature_matrix(amp, FeatureConfig{});
  EXPECT_EQ(psi.rows(), 25);
  EXPECT_EQ(psi.cols(), 7);
  EXPECT_EQ(psi.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(feature_matrix(Eigen::MatrixXd::Zero(5, 3), FeatureConfig{}).allFinite());
}

TEST(FeaturesTest, MatrixAgreesWithPerFrameFeatures) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd amp = testing::random_angles(9, 6, rng, 0.0, 2.0);
  const FeatureConfig cfg;
  const Eigen::MatrixXd psi = feature_matrix(amp, cfg);
  const Eigen::MatrixXd log_amp = log_amplitude(amp, cfg);
  for (int t = 0; t < 6; ++t) {
    EXPECT_LT((psi.col(t) - features(log_amp, t, cfg)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(FeaturesTest, AmplitudeFloor) {
  Eigen::MatrixXd amp(1, 3);
  amp << 2.0, 0.0, 1e-9;
  const Eigen::MatrixXd l = log_amplitude(amp, FeatureConfig{});
  EXPECT_DOUBLE_EQ(l(0, 0), std::log(2.0));
  EXPECT_DOUBLE_EQ(l(0, 1), std::log(2e-5));
  EXPECT_DOUBLE_EQ(l(0, 2), std::log(2e-5));
  EXPECT_THROW((FeatureConfig{-1}.validate()), ConfigError);
}

TEST(ModelTest, ShapesFollowTargetKind) {
  EXPECT_EQ(output_dim(TargetKind::kGroupDelay, 257), 256);
  EXPECT_EQ(output_dim(TargetKind::kInstantaneousFrequency, 257), 257);
  EXPECT_EQ(output_dim(TargetKind::kPhase, 257), 257);
  const auto m = make_model<float>({TargetKind::kPhase, 10, 8, 3, 4}, 1);
  EXPECT_EQ(m.input_dim(), 10);
  EXPECT_EQ(m.output_dim(), 4);
  EXPECT_EQ(m.num_layers(), 3);
  EXPECT_EQ(m.hidden_width(), 8);
  EXPECT_EQ(m.parameter_count(), 2u * (8 * 10 + 8) + 2u * (8 * 8 + 8) + (4 * 8 + 4));
  EXPECT_EQ(parse_target_kind("gd"), TargetKind::kGroupDelay);
  EXPECT_THROW(parse_target_kind("xyz"), UsageError);
}

TEST(ModelTest, InitializationIsBoundedAndSeeded) {
  const auto a = make_model<double>({TargetKind::kPhase, 30, 20, 2, 10}, 7);
  const auto b = make_model<double>({TargetKind::kPhase, 30, 20, 2, 10}, 7);
  const auto c = make_model<double>({TargetKind::kPhase, 30, 20, 2, 10}, 8);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  const double limit = std::sqrt(6.0 / 50.0);
  EXPECT_LE(a.hidden[0].value_weight.cwiseAbs().maxCoeff(), limit);
  EXPECT_EQ(a.hidden[0].value_bias, Eigen::VectorXd::Zero(20));
}

TEST(ModelTest, ZeroModelGivesZeroOutput) {
  auto m = make_model<double>({TargetKind::kPhase, 4, 3, 3, 2}, 1).zeros_like();
  const Eigen::VectorXd y = forward(m, Eigen::VectorXd::Constant(4, 5.0).eval());
  EXPECT_EQ(y, Eigen::VectorXd::Zero(2));
}

TEST(ModelTest, ScalarForwardByHand) {
  auto m = make_model<double>({TargetKind::kPhase, 1, 1, 2, 1}, 1);
  m.hidden[0].value_weight(0, 0) = 0.5;
  m.hidden[0].value_bias[0] = 0.1;
  m.hidden[0].gate_weight(0, 0) = -1.0;
  m.hidden[0].gate_bias[0] = 0.2;
  m.output.weight(0, 0) = 2.0;
  m.output.bias[0] = -0.3;
  const double x = 0.8;
  const double h = std::tanh(0.5 * x + 0.1) / (1.0 + std::exp(-(-x + 0.2)));
  const Eigen::VectorXd y = forward(m, Eigen::VectorXd::Constant(1, x).eval());
  EXPECT_NEAR(y[0], 2.0 * h - 0.3, 1e-15);
  EXPECT_THROW(forward(m, Eigen::VectorXd::Zero(2).eval()), DomainError);
}

TEST(ModelTest, ForwardIsDeterministic) {
  const auto m = make_model<float>({TargetKind::kGroupDelay, 20, 16, 3, 5}, 3);
  std::mt19937_64 rng(3);
  const Eigen::VectorXf psi = testing::random_angles(20, 1, rng).cast<float>();
  const Eigen::VectorXf a = forward(m, psi);
  const Eigen::VectorXf b = forward(m, psi);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(float) * 5), 0);
}

TEST(VonMisesLossTest, Examples) {
  std::mt19937_64 rng(4);
  const Eigen::VectorXd t = testing::random_angles(12, 1, rng);
  EXPECT_NEAR(von_mises_loss(t, t), -12.0, 1e-12);
  EXPECT_NEAR(von_mises_loss((t.array() + kPi).matrix(), t), 12.0, 1e-12);
  EXPECT_NEAR(von_mises_loss((t.array() + kTwoPi).matrix(), t), -12.0, 1e-12);
  EXPECT_THROW(von_mises_loss(t, Eigen::VectorXd::Zero(3)), DomainError);
}

TEST(VonMisesLossTest, PeriodicInEveryCoordinate) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd p = testing::random_angles(8, 1, rng, -10.0, 10.0);
    const Eigen::VectorXd t = testing::random_angles(8, 1, rng, -10.0, 10.0);
    Eigen::VectorXd shifted = p;
    for (int i = 0; i < 8; ++i) shifted[i] += kTwoPi * static_cast<double>(rng() % 7) - 3 * kTwoPi;
    EXPECT_NEAR(von_mises_loss(shifted, t), von_mises_loss(p, t), 1e-12);
  }
}

TEST(VonMisesLossTest, DerivativeSign) {
  const Eigen::VectorXd t = Eigen::VectorXd::Constant(3, 0.4);
  EXPECT_EQ(von_mises_loss_derivative(t, t), Eigen::VectorXd::Zero(3));
  const Eigen::VectorXd p = (t.array() - kPi / 2).matrix();
  const Eigen::VectorXd d = von_mises_loss_derivative(p, t);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(d[i], -1.0, 1e-15);
}

TEST(GradientTest, OutputSeedVanishesAtTarget) {
  const auto m = make_model<double>({TargetKind::kPhase, 3, 4, 2, 2}, 9);
  const Eigen::VectorXd psi = Eigen::VectorXd::LinSpaced(3, -1.0, 1.0);
  const Eigen::VectorXd target = forward(m, psi);
  const auto g = loss_gradient(m, psi, target);
  double max_abs = 0.0;
  g.for_each_block([&](std::span<const double> s) {
    for (double v : s) max_abs = std::max(max_abs, std::abs(v));
  });
  EXPECT_LT(max_abs, 1e-15);
}

TEST(GradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(10);
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 2 + trial % 3, width = 3 + trial % 4, out = 1 + trial % 3;
    const int layers = 1 + trial % 3;
    auto model = make_model<double>({TargetKind::kPhase, in, width, layers, out}, 100 + trial);
    model.for_each_block([&](std::span<double> s) {
      for (auto& v : s) v += 0.2 * (uniform01(rng) - 0.5);
    });
    const Eigen::MatrixXd x = testing::random_angles(in, 3, rng, -1.0, 1.0);
    const Eigen::MatrixXd y = testing::random_angles(out, 3, rng);
    EstimatorModel<double> grad = model.zeros_like();
    loss_and_gradient<double>(model, x, y, grad);

    std::vector<double> analytic;
    grad.for_each_block([&](std::span<const double> s) {
      analytic.insert(analytic.end(), s.begin(), s.end());
    });
    std::vector<std::span<double>> blocks;
    model.for_each_block([&](std::span<double> s) { blocks.push_back(s); });
    size_t index = 0;
    for (auto block : blocks) {
      for (auto& p : block) {
        const double saved = p;
        p = saved + h;
        const double plus = von_mises_loss(forward_batch<double>(model, x), y);
        p = saved - h;
        const double minus = von_mises_loss(forward_batch<double>(model, x), y);
        p = saved;
        const double numeric = (plus - minus) / (2.0 * h);
        const double a = analytic[index++];
        const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
        EXPECT_LE(rel, 1e-5) << "trial " << trial << " parameter " << index - 1;
      }
    }
    EXPECT_EQ(index, analytic.size());
  }
}

TEST(ModelCastTest, FloatAndDoubleAgree) {
  const auto m = make_model<float>({TargetKind::kInstantaneousFrequency, 6, 5, 2, 3}, 4);
  const auto d = m.cast<double>();
  const Eigen::VectorXf psi = Eigen::VectorXf::LinSpaced(6, -1.0f, 1.0f);
  const Eigen::VectorXd yd = forward(d, psi.cast<double>().eval());
  const Eigen::VectorXf yf = forward(m, psi);
  EXPECT_LT((yd - yf.cast<double>()).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_TRUE(d.cast<float>() == m);
}

TEST(DerivativeSourceTest, OracleAnswersPhaseDifferences) {
  const auto spec = stft(testing::white_noise(6000, 3), StftConfig{});
  const PhaseSpectrogram ph = phase(spec);
  const auto src = oracle_derivatives(ph);
  const DerivativeField d = src->derive(amplitude(spec));
  EXPECT_EQ(d.if_field, instantaneous_frequency(ph));
  EXPECT_EQ(d.gd_field, group_delay(ph));
  const Eigen::VectorXd first = ph.data.col(0);
  const Eigen::MatrixXd est = rpu_reconstruct(d, {GivenInitialFrame{first}});
  EXPECT_GE(cosine_accuracy(est, ph.data), 0.999);

  const PhaseSpectrogram single{ph.data.leftCols(1), ph.config, true};
  const DerivativeField one = oracle_derivatives(single)->derive(
      AmplitudeSpectrogram{Eigen::MatrixXd::Ones(257, 1), ph.config});
  EXPECT_EQ(one.if_field.cols(), 0);
  EXPECT_NO_THROW(one.check_shape());
}

TEST(DerivativeSourceTest, LearnedSourceShapes) {
  const StftConfig cfg{16000, 32, 8, 32};
  const FeatureConfig fcfg;
  const int k = cfg.bins();
  const auto if_model = make_model<float>(
      {TargetKind::kInstantaneousFrequency, fcfg.input_dim(k), 8, 2, k}, 1);
  const auto gd_model = make_model<float>(
      {TargetKind::kGroupDelay, fcfg.input_dim(k), 8, 2, k - 1}, 2);
  const LearnedDerivativeSource src(if_model, gd_model, fcfg);
  const auto spec = stft(testing::white_noise(400, 4), cfg);
  const DerivativeField d = src.derive(amplitude(spec));
  EXPECT_NO_THROW(d.check_shape());
  EXPECT_EQ(d.bins(), k);
  EXPECT_EQ(d.frames(), spec.frames());
  EXPECT_GE(d.if_field.minCoeff(), -kPi);
  EXPECT_LT(d.gd_field.maxCoeff(), kPi);
  EXPECT_THROW(LearnedDerivativeSource(gd_model, gd_model), ConfigError);
  EXPECT_THROW(estimate_phase(if_model, amplitude(spec)), ConfigError);
}

}  // namespace
}  // namespace rpu
