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

#include <bit>
#include <limits>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rpu/estimator/model_io.hpp"
#include "rpu/spg.hpp"
#include "rpu/wav.hpp"

namespace rpu {
namespace {

// Random doubles drawn from raw bit patterns (finite only) plus a few edge
// values, so a round trip has to preserve every bit.
Eigen::MatrixXd random_bits(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    double v;
    do {
      v = std::bit_cast<double>(rng());
    } while (!std::isfinite(v));
    m(i) = v;
  }
  if (m.size() >= 3) {
    m(0) = -0.0;
    m(1) = std::numeric_limits<double>::denorm_min();
    m(2) = std::numeric_limits<double>::max();
  }
  return m;
}

std::string serialize(const SpgFile& f) {
  std::ostringstream out;
  write_spg(out, f);
  return out.str();
}

TEST(SpgTest, EveryKindRoundTripsBitExactly) {
  StftConfig cfg{16000, 32, 8, 32};
  const Eigen::Index k = cfg.bins(), t = 6;
  std::vector<SpgFile> files;
  SpgFile c{SpgKind::kComplex, k, t, cfg, {}, Eigen::MatrixXcd(k, t)};
  const auto re = random_bits(k, t, 1), im = random_bits(k, t, 2);
  for (Eigen::Index i = 0; i < re.size(); ++i) c.complex(i) = {re(i), im(i)};
  files.push_back(c);
  files.push_back({SpgKind::kAmplitude, k, t, cfg, random_bits(k, t, 3), {}});
  files.push_back({SpgKind::kPhase, k, t, cfg, random_bits(k, t, 4), {}});
  files.push_back({SpgKind::kInstantaneousFrequency, k, t, cfg, random_bits(k, t - 1, 5), {}});
  files.push_back({SpgKind::kGroupDelay, k, t, cfg, random_bits(k - 1, t, 6), {}});
  for (const auto& f : files) {
    const std::string bytes = serialize(f);
    std::istringstream in(bytes);
    const SpgFile back = read_spg(in);
    EXPECT_EQ(back.kind, f.kind);
    EXPECT_EQ(back.bins, k);
    EXPECT_EQ(back.frames, t);
    EXPECT_EQ(back.config, cfg);
    EXPECT_EQ(serialize(back), bytes);
  }
}

TEST(SpgTest, HeaderLayout) {
  StftConfig cfg{16000, 32, 8, 32};
  const std::string bytes =
      serialize({SpgKind::kPhase, cfg.bins(), 2, cfg, Eigen::MatrixXd::Zero(17, 2), {}});
  ASSERT_EQ(bytes.size(), 32u + 17u * 2u * 8u);
  EXPECT_EQ(bytes.substr(0, 4), "SPG1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 2);      // kind
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 17);     // K
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 2);     // T
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 0x80);  // 16000 = 0x3E80
  EXPECT_EQ(static_cast<unsigned char>(bytes[17]), 0x3E);
}

TEST(SpgTest, DerivativeFieldsRoundTrip) {
  const StftConfig cfg{16000, 32, 8, 32};
  std::mt19937_64 rng(3);
  const auto ph = testing::random_angles(cfg.bins(), 9, rng);
  const DerivativeField d = derivatives(ph);
  const auto [if_file, gd_file] = to_spg(d, cfg);
  std::istringstream a(serialize(if_file)), b(serialize(gd_file));
  const DerivativeField back = derivatives_from_spg(read_spg(a), read_spg(b));
  EXPECT_EQ(back.if_field, d.if_field);
  EXPECT_EQ(back.gd_field, d.gd_field);
}

TEST(SpgTest, MalformedInputReportsOffset) {
  const StftConfig cfg{16000, 32, 8, 32};
  std::string bytes =
      serialize({SpgKind::kAmplitude, cfg.bins(), 3, cfg, Eigen::MatrixXd::Ones(17, 3), {}});
  {
    std::istringstream in(bytes.substr(0, 100));
    try {
      read_spg(in);
      FAIL() << "expected IoError";
    } catch (const IoError& e) {
      EXPECT_EQ(e.byte_offset(), 100);
    }
  }
  bytes[0] = 'X';
  std::istringstream in(bytes);
  EXPECT_THROW(read_spg(in), IoError);
  std::istringstream extra(serialize({SpgKind::kAmplitude, cfg.bins(), 3, cfg,
                                      Eigen::MatrixXd::Ones(17, 3), {}}) + "junk");
  EXPECT_THROW(read_spg(extra), IoError);
}

TEST(SpgTest, KindMismatchIsAnError) {
  const StftConfig cfg{16000, 32, 8, 32};
  const SpgFile f{SpgKind::kAmplitude, cfg.bins(), 3, cfg, Eigen::MatrixXd::Ones(17, 3), {}};
  EXPECT_THROW(phase_from_spg(f), IoError);
  EXPECT_NO_THROW(amplitude_from_spg(f));
}

TEST(WavTest, Pcm16RoundTrip) {
  Waveform w{std::vector<double>(1000), 16000};
  std::mt19937_64 rng(1);
  for (auto& s : w.samples) {
    s = static_cast<std::int16_t>(rng() & 0xFFFF) / 32768.0;
  }
  std::stringstream buf;
  write_wav(buf, w);
  EXPECT_EQ(buf.str().size(), 44u + 2000u);
  const Waveform back = read_wav(buf);
  EXPECT_EQ(back.sample_rate, 16000);
  EXPECT_EQ(back.samples, w.samples);
}

TEST(WavTest, ClipsOutOfRangeSamples) {
  EXPECT_EQ(to_pcm16(2.0), 32767);
  EXPECT_EQ(to_pcm16(-2.0), -32768);
  EXPECT_EQ(to_pcm16(0.5), 16384);
}

TEST(WavTest, SkipsUnknownChunks) {
  std::stringstream plain;
  write_wav(plain, Waveform{{0.25, -0.5}, 8000});
  std::string bytes = plain.str();
  // Insert a LIST chunk with an odd payload between fmt and data.
  const std::string list("LIST\x03\x00\x00\x00" "abc\x00", 12);
  bytes.insert(36, list);
  std::istringstream in(bytes);
  const Waveform w = read_wav(in);
  EXPECT_EQ(w.sample_rate, 8000);
  EXPECT_EQ(w.samples, (std::vector<double>{0.25, -0.5}));
}

TEST(WavTest, RejectsUnsupportedFormats) {
  std::stringstream plain;
  write_wav(plain, Waveform{{0.1, 0.2}, 16000});
  const std::string good = plain.str();

  std::string stereo = good;
  stereo[22] = 2;
  std::istringstream a(stereo);
  try {
    read_wav(a);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.byte_offset(), 22);
  }

  std::string bits8 = good;
  bits8[34] = 8;
  std::istringstream b(bits8);
  EXPECT_THROW(read_wav(b), IoError);

  std::string riff = good;
  riff[0] = 'X';
  std::istringstream c(riff);
  EXPECT_THROW(read_wav(c), IoError);

  std::istringstream truncated(good.substr(0, 45));
  try {
    read_wav(truncated);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.byte_offset(), 45);
  }
}

std::string serialize(const EstimatorModel<float>& m) {
  std::ostringstream out;
  write_model(out, m);
  return out.str();
}

TEST(ModelIoTest, RoundTripsBitExactly) {
  for (int layers : {1, 2, 3}) {
    auto m = make_model<float>({TargetKind::kGroupDelay, 15, 6, layers, 4}, 99);
    // Perturb biases so zero-initialized blocks carry information too.
    std::mt19937_64 rng(layers);
    m.for_each_block([&](std::span<float> s) {
      for (auto& v : s) v += static_cast<float>(uniform01(rng) - 0.5);
    });
    const std::string bytes = serialize(m);
    std::istringstream in(bytes);
    const auto back = read_model(in);
    EXPECT_TRUE(back == m);
    EXPECT_EQ(back.target_kind, TargetKind::kGroupDelay);
    EXPECT_EQ(back.num_layers(), layers);
    EXPECT_EQ(serialize(back), bytes);
    const size_t header = 12 + 8 * static_cast<size_t>(layers);
    EXPECT_EQ(bytes.size(), header + 4 * m.parameter_count());
  }
}

TEST(ModelIoTest, RejectsCorruptFiles) {
  const auto m = make_model<float>({TargetKind::kPhase, 5, 3, 2, 5}, 1);
  std::string bytes = serialize(m);
  {
    std::string bad = bytes;
    bad[3] = '2';
    std::istringstream in(bad);
    EXPECT_THROW(read_model(in), IoError);
  }
  {
    std::string bad = bytes;
    bad[20] = 9;  // second layer input dim no longer matches the first output
    std::istringstream in(bad);
    EXPECT_THROW(read_model(in), IoError);
  }
  std::istringstream in(bytes.substr(0, bytes.size() - 2));
  EXPECT_THROW(read_model(in), IoError);
}

}  // namespace
}  // namespace rpu
