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
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rpu/baselines.hpp"
#include "rpu/config.hpp"
#include "rpu/corpus.hpp"
#include "rpu/error.hpp"
#include "rpu/estimator/derivative_source.hpp"
#include "rpu/estimator/model_io.hpp"
#include "rpu/estimator/train.hpp"
#include "rpu/metrics.hpp"
#include "rpu/rpu.hpp"
#include "rpu/spectral.hpp"
#include "rpu/spg.hpp"
#include "rpu/wav.hpp"

// The command implementations behind the CLI. Every command is a pure
// function of its inputs and configuration.
namespace rpu {

namespace fs = std::filesystem;

enum class Method { kZero, kPhaseDirect, kIfOnly, kRpu };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kZero:
      return "zero";
    case Method::kPhaseDirect:
      return "ph-direct";
    case Method::kIfOnly:
      return "if-only";
    case Method::kRpu:
      return "rpu";
  }
  return "unknown";
}

inline Method parse_method(const std::string& s) {
  if (s == "zero") return Method::kZero;
  if (s == "ph-direct") return Method::kPhaseDirect;
  if (s == "if-only") return Method::kIfOnly;
  if (s == "rpu") return Method::kRpu;
  throw UsageError("unknown method '" + s + "' (expected rpu, if-only, zero or ph-direct)");
}

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m = {Method::kZero, Method::kPhaseDirect,
                                        Method::kIfOnly, Method::kRpu};
  return m;
}

// Sorted .wav files of a directory.
inline std::vector<fs::path> list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// gen-corpus

// Writes <out>/train/*.wav and <out>/test/*.wav.
inline std::vector<fs::path> gen_corpus(const fs::path& out_dir, const RunConfig& cfg) {
  std::vector<fs::path> written;
  fs::create_directories(out_dir / "train");
  fs::create_directories(out_dir / "test");
  for (const auto& s : generate_corpus(cfg.seed, cfg.stft.sample_rate)) {
    const fs::path p = out_dir / (s.held_out ? "test" : "train") / (s.name + ".wav");
    write_wav(p, s.wave);
    written.push_back(p);
  }
  return written;
}

// ---------------------------------------------------------------------------
// analyze / synthesize

inline Waveform load_wav_checked(const fs::path& path, const StftConfig& cfg) {
  Waveform w = read_wav(path);
  if (w.sample_rate != cfg.sample_rate) {
    throw ConfigError(path.string() + ": sample rate " + std::to_string(w.sample_rate) +
                      " Hz does not match the configured " +
                      std::to_string(cfg.sample_rate) + " Hz (no resampling)");
  }
  return w;
}

struct Analysis {
  AmplitudeSpectrogram amplitude;
  PhaseSpectrogram phase;
};

inline Analysis analyze(const Waveform& wave, const StftConfig& cfg) {
  const ComplexSpectrogram spec = stft(wave, cfg);
  return {amplitude(spec), phase(spec)};
}

inline Analysis analyze_command(const fs::path& wav, const fs::path& amp_out,
                                const fs::path& phase_out, const RunConfig& cfg) {
  Analysis a = analyze(load_wav_checked(wav, cfg.stft), cfg.stft);
  write_spg(amp_out, to_spg(a.amplitude));
  write_spg(phase_out, to_spg(a.phase));
  return a;
}

inline Waveform synthesize(const AmplitudeSpectrogram& amp, const PhaseSpectrogram& ph) {
  return istft(compose(amp, ph));
}

inline Waveform synthesize_command(const fs::path& amp_spg, const fs::path& phase_spg,
                                   const fs::path& out_wav) {
  const AmplitudeSpectrogram amp = amplitude_from_spg(read_spg(amp_spg));
  const PhaseSpectrogram ph = phase_from_spg(read_spg(phase_spg));
  if (!(amp.config == ph.config)) {
    throw DomainError("amplitude and phase were analyzed with different settings");
  }
  Waveform w = synthesize(amp, ph);
  write_wav(out_wav, w);
  return w;
}

// ---------------------------------------------------------------------------
// train

inline std::vector<TrainingExample> load_training_corpus(const fs::path& dir,
                                                         const StftConfig& cfg) {
  const auto wavs = list_wavs(dir);
  if (wavs.empty()) throw UsageError("no .wav files in " + dir.string());
  std::vector<TrainingExample> out;
  for (const auto& p : wavs) {
    Analysis a = analyze(load_wav_checked(p, cfg), cfg);
    out.push_back({std::move(a.amplitude), std::move(a.phase)});
  }
  return out;
}

inline void write_loss_history(std::ostream& out, const std::vector<double>& history) {
  write_csv_row(out, {"epoch", "loss"});
  for (size_t i = 0; i < history.size(); ++i) {
    write_csv_row(out, {std::to_string(i), format_number(history[i])});
  }
}

inline TrainResult train_command(const fs::path& corpus_dir, TargetKind kind,
                                 const RunConfig& cfg, const fs::path& model_out,
                                 const std::optional<fs::path>& history_out,
                                 const EpochCallback& on_epoch = {}) {
  const auto corpus = load_training_corpus(corpus_dir, cfg.stft);
  TrainResult r = train(corpus, kind, cfg.train, cfg.feature, on_epoch);
  write_model(model_out, r.model);
  if (history_out) {
    std::ofstream out(*history_out, std::ios::binary);
    if (!out) throw IoError("cannot create " + history_out->string());
    write_loss_history(out, r.loss_history);
  }
  return r;
}

// ---------------------------------------------------------------------------
// reconstruct

struct Estimators {
  std::optional<EstimatorModel<float>> if_model;
  std::optional<EstimatorModel<float>> gd_model;
  std::optional<EstimatorModel<float>> phase_model;

  static Estimators load(const std::optional<fs::path>& if_path,
                         const std::optional<fs::path>& gd_path,
                         const std::optional<fs::path>& phase_path) {
    Estimators e;
    if (if_path) e.if_model = read_model(*if_path);
    if (gd_path) e.gd_model = read_model(*gd_path);
    if (phase_path) e.phase_model = read_model(*phase_path);
    return e;
  }

  std::unique_ptr<DerivativeSource> derivative_source(const FeatureConfig& f) const {
    if (!if_model || !gd_model) return nullptr;
    return std::make_unique<LearnedDerivativeSource>(*if_model, *gd_model, f);
  }
};

// Everything needed to reconstruct one utterance. Either `oracle_phase` or
// the learned models provide the phase information.
struct ReconstructionInputs {
  AmplitudeSpectrogram amplitude;
  std::optional<PhaseSpectrogram> oracle_phase;
  std::optional<PhaseSpectrogram> reference_phase;
  std::optional<Waveform> reference_wave;
};

inline RpuOptions rpu_options(const RunConfig& cfg,
                              const std::optional<PhaseSpectrogram>& oracle) {
  RpuOptions opts;
  opts.wrap_each_frame = cfg.wrap_each_frame;
  switch (cfg.initial_frame) {
    case InitialFrameKind::kZeros:
      opts.initial_frame = ZeroInitialFrame{};
      break;
    case InitialFrameKind::kIntegrateGroupDelay:
      opts.initial_frame = GroupDelayInitialFrame{};
      break;
    case InitialFrameKind::kGivenOracle:
      if (!oracle) throw UsageError("initial_frame 'given' requires an oracle phase");
      opts.initial_frame = GivenInitialFrame{oracle->data.col(0)};
      break;
  }
  return opts;
}

// Phase estimate of `method` before any Griffin-Lim post-processing.
inline PhaseSpectrogram initial_estimate(Method method, const ReconstructionInputs& in,
                                         const Estimators& models, const RunConfig& cfg) {
  const auto& amp = in.amplitude;
  auto derivative_field = [&]() -> DerivativeField {
    if (in.oracle_phase) return OracleDerivativeSource(*in.oracle_phase).derive(amp);
    const auto source = models.derivative_source(cfg.feature);
    if (!source) throw UsageError(to_string(method) + " needs IF and GD models or an oracle");
    return source->derive(amp);
  };
  switch (method) {
    case Method::kZero:
      return zero_phase(amp);
    case Method::kPhaseDirect:
      if (in.oracle_phase) return *in.oracle_phase;
      if (!models.phase_model) throw UsageError("ph-direct needs a phase model");
      return estimate_phase(*models.phase_model, amp, cfg.feature);
    case Method::kIfOnly: {
      const DerivativeField d = derivative_field();
      return integrate_if(initial_frame(d, rpu_options(cfg, in.oracle_phase)), d.if_field,
                          amp.config);
    }
    case Method::kRpu:
      return rpu_reconstruct(amp, derivative_field(), rpu_options(cfg, in.oracle_phase));
  }
  throw UsageError("unknown method");
}

struct Reconstruction {
  PhaseSpectrogram phase;
  Waveform wave;
  ReconstructionReport report;
};

inline Reconstruction finish_reconstruction(const ReconstructionInputs& in,
                                            PhaseSpectrogram phase, std::string utterance,
                                            Method method, int gla_iterations) {
  Reconstruction r{std::move(phase), {}, {}};
  const ComplexSpectrogram spec = compose(in.amplitude, r.phase);
  r.wave = istft(spec);
  r.report.utterance = std::move(utterance);
  r.report.method = to_string(method);
  r.report.gla_iterations = gla_iterations;
  r.report.spectral_convergence = spectral_convergence(spec, in.amplitude);
  if (in.reference_phase) {
    r.report.cosine_accuracy = cosine_accuracy(r.phase.data, in.reference_phase->data);
  }
  if (in.reference_wave) {
    r.report.snr_db = snr_db(r.wave, *in.reference_wave, in.amplitude.config.hop_length);
  }
  return r;
}

// Reconstructions for several GLA iteration counts, sharing one Griffin-Lim
// run (snapshots are identical to independent runs).
inline std::vector<Reconstruction> reconstruct(const ReconstructionInputs& in, Method method,
                                               const Estimators& models, const RunConfig& cfg,
                                               std::vector<int> gla_iterations,
                                               const std::string& utterance) {
  PhaseSpectrogram phase = initial_estimate(method, in, models, cfg);
  std::vector<int> order = gla_iterations;
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::vector<std::pair<int, Reconstruction>> done;
  int applied = 0;
  for (int target : order) {
    phase = griffin_lim(in.amplitude, phase, {target - applied, false}).phase;
    applied = target;
    done.emplace_back(target, finish_reconstruction(in, phase, utterance, method, target));
  }
  std::vector<Reconstruction> out;
  for (int g : gla_iterations) {
    for (const auto& [k, rec] : done) {
      if (k == g) {
        out.push_back(rec);
        break;
      }
    }
  }
  return out;
}

struct ReconstructRequest {
  fs::path amplitude_spg;
  Method method = Method::kRpu;
  std::optional<fs::path> oracle_phase_spg;
  std::optional<fs::path> if_model;
  std::optional<fs::path> gd_model;
  std::optional<fs::path> phase_model;
  std::optional<fs::path> reference_wav;
  int gla_iterations = 0;
  fs::path out_wav;
  std::optional<fs::path> report_csv;  // appended to; header written when new
  std::string utterance;
};

inline ReconstructionReport reconstruct_command(const ReconstructRequest& req,
                                                const RunConfig& cfg) {
  ReconstructionInputs in{amplitude_from_spg(read_spg(req.amplitude_spg)), {}, {}, {}};
  if (req.oracle_phase_spg) {
    in.oracle_phase = phase_from_spg(read_spg(*req.oracle_phase_spg));
    in.reference_phase = in.oracle_phase;
  }
  if (!in.oracle_phase) {
    const bool needs_derivs = req.method == Method::kRpu || req.method == Method::kIfOnly;
    if (needs_derivs && (!req.if_model || !req.gd_model)) {
      throw UsageError(to_string(req.method) + " needs --oracle or both --if-model and --gd-model");
    }
    if (req.method == Method::kPhaseDirect && !req.phase_model) {
      throw UsageError("ph-direct needs --oracle or --ph-model");
    }
  }
  if (req.reference_wav) in.reference_wave = load_wav_checked(*req.reference_wav, cfg.stft);
  const Estimators models = Estimators::load(req.if_model, req.gd_model, req.phase_model);
  const std::string name =
      req.utterance.empty() ? req.amplitude_spg.stem().string() : req.utterance;
  Reconstruction r =
      std::move(reconstruct(in, req.method, models, cfg, {req.gla_iterations}, name).front());
  write_wav(req.out_wav, r.wave);
  if (req.report_csv) {
    const bool fresh = !fs::exists(*req.report_csv) || fs::file_size(*req.report_csv) == 0;
    std::ofstream out(*req.report_csv, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open " + req.report_csv->string());
    if (fresh) write_csv_row(out, report_csv_header());
    write_report_row(out, r.report);
  }
  return r.report;
}

// ---------------------------------------------------------------------------
// compare

struct ComparisonResult {
  std::vector<ReconstructionReport> rows;
  std::vector<MethodSummary> summary;
};

// Scores every utterance with {zero, ph-direct, if-only, rpu} x GLA counts.
// Utterances run in parallel; rows come out in (utterance, method, gla)
// order regardless of completion order. A failing method is recorded in the
// row status and the run continues.
inline ComparisonResult compare(const std::vector<std::pair<std::string, Waveform>>& corpus,
                                const Estimators& models, const RunConfig& cfg,
                                unsigned threads = 0) {
  if (corpus.empty()) throw UsageError("compare: empty corpus");
  std::vector<std::vector<ReconstructionReport>> per_utt(corpus.size());
  auto work = [&](size_t i) {
    const auto& [name, wave] = corpus[i];
    Analysis a = analyze(wave, cfg.stft);
    ReconstructionInputs in{a.amplitude, std::nullopt, a.phase, wave};
    for (Method m : all_methods()) {
      try {
        for (auto& rec : reconstruct(in, m, models, cfg, cfg.gla_iterations, name)) {
          per_utt[i].push_back(std::move(rec.report));
        }
      } catch (const Error& e) {
        for (int g : cfg.gla_iterations) {
          ReconstructionReport row;
          row.utterance = name;
          row.method = to_string(m);
          row.gla_iterations = g;
          row.status = std::string("failed: ") + e.what();
          per_utt[i].push_back(std::move(row));
        }
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(corpus.size()));
  if (threads <= 1) {
    for (size_t i = 0; i < corpus.size(); ++i) work(i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (size_t i = t; i < corpus.size(); i += threads) work(i);
      });
    }
  }
  ComparisonResult result;
  for (auto& rows : per_utt) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  result.summary = summarize(result.rows);
  return result;
}

inline ComparisonResult compare_command(const fs::path& corpus_dir, const Estimators& models,
                                        const RunConfig& cfg, const fs::path& csv_out,
                                        const std::optional<fs::path>& summary_out) {
  std::vector<std::pair<std::string, Waveform>> corpus;
  for (const auto& p : list_wavs(corpus_dir)) {
    corpus.emplace_back(p.stem().string(), load_wav_checked(p, cfg.stft));
  }
  if (corpus.empty()) throw UsageError("no .wav files in " + corpus_dir.string());
  ComparisonResult r = compare(corpus, models, cfg);
  {
    std::ofstream out(csv_out, std::ios::binary);
    if (!out) throw IoError("cannot create " + csv_out.string());
    write_report_csv(out, r.rows);
  }
  if (summary_out) {
    std::ofstream out(*summary_out, std::ios::binary);
    if (!out) throw IoError("cannot create " + summary_out->string());
    write_summary_text(out, r.summary);
  }
  return r;
}

// ---------------------------------------------------------------------------
// shift-demo

struct ShiftDemo {
  int shift_samples = 0;
  bool rounded = false;  // shift_ms was not a whole number of samples
  ShiftSensitivity report;
};

inline ShiftDemo shift_demo(const Waveform& wave, double shift_ms, const StftConfig& cfg) {
  const double exact = shift_ms * 1e-3 * cfg.sample_rate;
  ShiftDemo d;
  d.shift_samples = static_cast<int>(std::lround(exact));
  d.rounded = std::abs(exact - d.shift_samples) > 1e-9;
  if (d.shift_samples < 0 || d.shift_samples >= cfg.hop_length) {
    throw UsageError("shift of " + std::to_string(d.shift_samples) +
                     " samples must lie in [0, hop_length)");
  }
  d.report = shift_sensitivity_report(wave, d.shift_samples, cfg);
  return d;
}

inline std::string format_shift_demo(const ShiftDemo& d) {
  std::ostringstream out;
  out << "shift_samples " << d.shift_samples << "\n"
      << "amp_rel_diff " << format_number(d.report.amp_rel_diff) << "\n"
      << "phase_mean_abs_diff " << format_number(d.report.phase_mean_abs_diff) << "\n"
      << "if_mean_abs_diff " << format_number(d.report.if_mean_abs_diff) << "\n";
  return out.str();
}

}  // namespace rpu
