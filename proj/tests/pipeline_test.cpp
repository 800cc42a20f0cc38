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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "rpu/corpus.hpp"
#include "rpu/pipeline.hpp"

namespace rpu {
namespace {

namespace fs = std::filesystem;

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rpu_pipeline_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(CorpusTest, GeneratesTenDeterministicSignals) {
  const auto a = generate_corpus(2020, 16000, 0.25);
  const auto b = generate_corpus(2020, 16000, 0.25);
  ASSERT_EQ(a.size(), 10u);
  int held_out = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].wave.samples, b[i].wave.samples);
    EXPECT_EQ(a[i].wave.size(), 4000u);
    double peak = 0.0;
    for (double s : a[i].wave.samples) peak = std::max(peak, std::abs(s));
    EXPECT_NEAR(peak, 0.7, 1e-3) << a[i].name;
    held_out += a[i].held_out ? 1 : 0;
  }
  EXPECT_EQ(held_out, 4);
  EXPECT_NE(generate_corpus(7, 16000, 0.25)[5].wave.samples, a[5].wave.samples);
}

TEST(MethodTest, Names) {
  for (Method m : all_methods()) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_EQ(to_string(Method::kIfOnly), "if-only");
  EXPECT_THROW(parse_method("gla"), UsageError);
}

TEST_F(PipelineTest, AnalyzeWritesMatchingHeaders) {
  const RunConfig cfg;
  write_wav(dir_ / "x.wav", testing::white_noise(8000, 1));
  analyze_command(dir_ / "x.wav", dir_ / "a.spg", dir_ / "p.spg", cfg);
  const SpgFile a = read_spg(dir_ / "a.spg");
  const SpgFile p = read_spg(dir_ / "p.spg");
  EXPECT_EQ(a.kind, SpgKind::kAmplitude);
  EXPECT_EQ(p.kind, SpgKind::kPhase);
  EXPECT_EQ(a.bins, 257);
  EXPECT_EQ(a.frames, p.frames);
  EXPECT_EQ(a.config, p.config);

  write_wav(dir_ / "slow.wav", testing::white_noise(8000, 1, 8000));
  EXPECT_THROW(analyze_command(dir_ / "slow.wav", dir_ / "a.spg", dir_ / "p.spg", cfg),
               ConfigError);
}

TEST_F(PipelineTest, AnalyzeSynthesizeRoundTrip) {
  const RunConfig cfg;
  const Waveform x = testing::white_noise(16000, 2);
  write_wav(dir_ / "x.wav", x);
  analyze_command(dir_ / "x.wav", dir_ / "a.spg", dir_ / "p.spg", cfg);
  synthesize_command(dir_ / "a.spg", dir_ / "p.spg", dir_ / "y.wav");
  const Waveform stored = read_wav(dir_ / "x.wav");
  const Waveform y = read_wav(dir_ / "y.wav");
  // Interior samples, away from the reflected edges.
  const size_t lo = 512, hi = y.size() - 512;
  const Waveform a{{stored.samples.begin() + lo, stored.samples.begin() + hi}, 16000};
  const Waveform b{{y.samples.begin() + lo, y.samples.begin() + hi}, 16000};
  EXPECT_GE(snr_db(b, a, 0), 60.0);
}

TEST_F(PipelineTest, TrainCommand) {
  RunConfig cfg;
  cfg.train.epochs = 20;
  fs::create_directories(dir_ / "empty");
  EXPECT_THROW(train_command(dir_ / "empty", TargetKind::kGroupDelay, cfg, dir_ / "m.mdl", {}),
               UsageError);

  fs::create_directories(dir_ / "one");
  write_wav(dir_ / "one" / "v.wav", generate_corpus(1, 16000, 1.0)[0].wave);
  const TrainResult r = train_command(dir_ / "one", TargetKind::kGroupDelay, cfg,
                                      dir_ / "gd.mdl", dir_ / "hist.csv");
  ASSERT_EQ(r.loss_history.size(), 20u);
  EXPECT_LE(r.loss_history.back(), r.loss_history.front());
  const auto m = read_model(dir_ / "gd.mdl");
  EXPECT_EQ(m.target_kind, TargetKind::kGroupDelay);
  EXPECT_EQ(m.output_dim(), 256);
  EXPECT_EQ(m.num_layers(), 3);
  const std::string hist = slurp(dir_ / "hist.csv");
  EXPECT_EQ(hist.substr(0, 12), "epoch,loss\r\n");
  EXPECT_EQ(std::count(hist.begin(), hist.end(), '\n'), 21);

  // Same seed, same bytes.
  train_command(dir_ / "one", TargetKind::kGroupDelay, cfg, dir_ / "gd2.mdl", {});
  EXPECT_EQ(slurp(dir_ / "gd.mdl"), slurp(dir_ / "gd2.mdl"));
}

TEST(ReconstructTest, ZeroMethodMatchesZeroPhaseSynthesis) {
  const RunConfig cfg;
  const Analysis a = analyze(testing::white_noise(8000, 3), cfg.stft);
  const ReconstructionInputs in{a.amplitude, {}, {}, {}};
  const auto recs = reconstruct(in, Method::kZero, {}, cfg, {0}, "x");
  ASSERT_EQ(recs.size(), 1u);
  const Waveform expected = istft(compose(a.amplitude, zero_phase(a.amplitude)));
  EXPECT_EQ(recs[0].wave.samples, expected.samples);
}

TEST(ReconstructTest, OracleRpuWithGivenFrame) {
  RunConfig cfg;
  cfg.initial_frame = InitialFrameKind::kGivenOracle;
  const Waveform x = generate_corpus(2020, 16000, 1.0)[0].wave;
  const Analysis a = analyze(x, cfg.stft);
  const ReconstructionInputs in{a.amplitude, a.phase, a.phase, x};
  const auto recs = reconstruct(in, Method::kRpu, {}, cfg, {0}, "x");
  EXPECT_GE(recs[0].report.cosine_accuracy, 0.999);
  EXPECT_GE(recs[0].report.snr_db, 40.0);
  EXPECT_LT(recs[0].report.spectral_convergence, 1e-6);

  cfg.initial_frame = InitialFrameKind::kZeros;
  EXPECT_THROW(reconstruct(ReconstructionInputs{a.amplitude, {}, {}, {}}, Method::kRpu, {},
                           cfg, {0}, "x"),
               UsageError);
  cfg.initial_frame = InitialFrameKind::kGivenOracle;
  EXPECT_THROW(rpu_options(cfg, std::nullopt), UsageError);
}

TEST(ReconstructTest, GlaSnapshotsMatchIndependentRuns) {
  const RunConfig cfg;
  const Analysis a = analyze(testing::white_noise(6000, 4), cfg.stft);
  const ReconstructionInputs in{a.amplitude, a.phase, a.phase, {}};
  const auto shared = reconstruct(in, Method::kIfOnly, {}, cfg, {10, 0, 3}, "x");
  ASSERT_EQ(shared.size(), 3u);
  EXPECT_EQ(shared[0].report.gla_iterations, 10);
  for (const auto& rec : shared) {
    const auto single =
        reconstruct(in, Method::kIfOnly, {}, cfg, {rec.report.gla_iterations}, "x");
    EXPECT_EQ(single[0].phase.data, rec.phase.data);
  }
}

TEST_F(PipelineTest, CompareIsDeterministicAndOrdered) {
  RunConfig cfg;
  cfg.gla_iterations = {0, 2};
  std::vector<std::pair<std::string, Waveform>> corpus;
  for (const auto& s : generate_corpus(2020, 16000, 0.3)) {
    if (s.held_out) corpus.emplace_back(s.name, s.wave);
  }
  Estimators none;
  const ComparisonResult a = compare(corpus, none, cfg, 4);
  const ComparisonResult b = compare(corpus, none, cfg, 1);
  std::ostringstream ca, cb;
  write_report_csv(ca, a.rows);
  write_report_csv(cb, b.rows);
  EXPECT_EQ(ca.str(), cb.str());
  ASSERT_EQ(a.rows.size(), corpus.size() * 4 * 2);
  EXPECT_EQ(a.rows[0].utterance, corpus[0].first);
  EXPECT_EQ(a.rows[0].method, "zero");
  EXPECT_EQ(a.rows[1].gla_iterations, 2);
  // Without models only the zero-phase rows succeed.
  for (const auto& r : a.rows) {
    EXPECT_EQ(r.status == "ok", r.method == "zero") << r.method << " " << r.status;
  }
  EXPECT_THROW(compare({}, none, cfg), UsageError);
  fs::create_directories(dir_ / "empty");
  EXPECT_THROW(compare_command(dir_ / "empty", none, cfg, dir_ / "c.csv", {}), UsageError);
}

TEST(ShiftDemoTest, RoundsToWholeSamples) {
  const Waveform x = testing::tone(200.0, 8000);
  const StftConfig cfg;
  const ShiftDemo exact = shift_demo(x, 0.5, cfg);
  EXPECT_EQ(exact.shift_samples, 8);
  EXPECT_FALSE(exact.rounded);
  const ShiftDemo rounded = shift_demo(x, 0.52, cfg);
  EXPECT_EQ(rounded.shift_samples, 8);
  EXPECT_TRUE(rounded.rounded);
  const ShiftDemo zero = shift_demo(x, 0.0, cfg);
  EXPECT_EQ(zero.report.phase_mean_abs_diff, 0.0);
  EXPECT_THROW(shift_demo(x, 8.0, cfg), UsageError);
  EXPECT_NE(format_shift_demo(exact).find("shift_samples 8\n"), std::string::npos);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RPU_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST_F(PipelineTest, CliExitCodes) {
  const std::string d = dir_.string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("analyze"), 2);
  EXPECT_EQ(run_cli("train --corpus " + d + " --kind if --out " + d + "/m.mdl"), 2);
  EXPECT_EQ(run_cli("train --corpus " + d + " --kind xyz --out " + d + "/m.mdl"), 2);

  std::ofstream(dir_ / "junk.wav") << "not a wav file";
  EXPECT_EQ(run_cli("analyze " + d + "/junk.wav --amp " + d + "/a.spg --phase " + d +
                    "/p.spg"),
            3);
  std::ofstream(dir_ / "bad.json") << R"({"unknown": 1})";
  EXPECT_EQ(run_cli("gen-corpus --out " + d + "/c --config " + d + "/bad.json"), 3);

  write_wav(dir_ / "x.wav", testing::white_noise(4000, 5));
  EXPECT_EQ(run_cli("analyze " + d + "/x.wav --amp " + d + "/a.spg --phase " + d + "/p.spg"),
            0);
  EXPECT_EQ(run_cli("reconstruct --amp " + d + "/a.spg --method rpu --source oracle:" + d +
                    "/p.spg --init given --out " + d + "/y.wav --report " + d + "/r.csv"),
            0);
  const std::string report = slurp(dir_ / "r.csv");
  EXPECT_NE(report.find("\r\na,rpu,0,"), std::string::npos) << report;
  EXPECT_EQ(run_cli("reconstruct --amp " + d + "/a.spg --method rpu --out " + d + "/y.wav"), 2);
  EXPECT_EQ(run_cli("shift-demo " + d + "/x.wav --shift-ms 0.5"), 0);
}

}  // namespace
}  // namespace rpu
