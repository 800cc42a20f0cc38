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

// Command-line front end: gen-corpus, analyze, synthesize, train,
// reconstruct, compare and shift-demo.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rpu/pipeline.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string init;
  std::vector<int> gla;
};

rpu::RunConfig resolve_config(const CommonOptions& opts) {
  rpu::RunConfig cfg = opts.config_path.empty() ? rpu::RunConfig{}
                                                : rpu::load_run_config(opts.config_path);
  rpu::apply_environment(cfg);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.train.seed = *opts.seed;
  }
  if (!opts.init.empty()) cfg.initial_frame = rpu::parse_initial_frame(opts.init);
  if (!opts.gla.empty()) cfg.gla_iterations = opts.gla;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "JSON run configuration");
  cmd->add_option("--seed", opts.seed, "Override the configured seed");
}

// "oracle:<phase.spg>", "models:<if.mdl>,<gd.mdl>" or "models:<ph.mdl>".
void parse_source(const std::string& source, rpu::ReconstructRequest& req) {
  if (source.rfind("oracle:", 0) == 0) {
    req.oracle_phase_spg = source.substr(7);
    return;
  }
  if (source.rfind("models:", 0) == 0) {
    const std::string list = source.substr(7);
    const auto comma = list.find(',');
    if (comma == std::string::npos) {
      req.phase_model = list;
    } else {
      req.if_model = list.substr(0, comma);
      req.gd_model = list.substr(comma + 1);
    }
    return;
  }
  throw rpu::UsageError("--source must be oracle:<phase.spg> or models:<files>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase reconstruction from amplitude spectrograms"};
  app.require_subcommand(1);
  CommonOptions common;

  // gen-corpus
  std::string corpus_out;
  auto* gen = app.add_subcommand("gen-corpus", "Write the synthetic desk corpus");
  gen->add_option("--out", corpus_out, "Output directory")->required();
  add_common(gen, common);

  // analyze
  std::string wav_in, amp_out, phase_out;
  auto* analyze = app.add_subcommand("analyze", "WAV -> amplitude and phase .spg");
  analyze->add_option("wav", wav_in, "Input WAV (PCM16 mono)")->required();
  analyze->add_option("--amp", amp_out, "Amplitude .spg output")->required();
  analyze->add_option("--phase", phase_out, "Phase .spg output")->required();
  add_common(analyze, common);

  // synthesize
  std::string syn_amp, syn_phase, syn_out;
  auto* synth = app.add_subcommand("synthesize", "Amplitude + phase .spg -> WAV");
  synth->add_option("--amp", syn_amp)->required();
  synth->add_option("--phase", syn_phase)->required();
  synth->add_option("--out", syn_out)->required();

  // train
  std::string train_corpus, train_kind, model_out, history_out;
  auto* train = app.add_subcommand("train", "Train a phase / IF / GD estimator");
  train->add_option("--corpus", train_corpus, "Directory of training WAVs")->required();
  train->add_option("--kind", train_kind, "phase, if or gd")->required();
  train->add_option("--out", model_out, "Model file (.mdl)")->required();
  train->add_option("--history", history_out, "Loss history CSV");
  bool verbose = false;
  train->add_flag("-v,--verbose", verbose, "Print the loss every 50 epochs");
  add_common(train, common);

  // reconstruct
  rpu::ReconstructRequest req;
  std::string method = "rpu", source, report_csv, ref_wav;
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct phase and synthesize");
  recon->add_option("--amp", req.amplitude_spg, "Amplitude .spg")->required();
  recon->add_option("--method", method, "rpu, if-only, zero or ph-direct");
  recon->add_option("--source", source, "oracle:<phase.spg> | models:<if,gd> | models:<ph>");
  recon->add_option("--gla", req.gla_iterations, "Griffin-Lim post-processing iterations");
  recon->add_option("--out", req.out_wav, "Output WAV")->required();
  recon->add_option("--report", report_csv, "CSV report to append to");
  recon->add_option("--ref-wav", ref_wav, "Reference WAV for SNR");
  recon->add_option("--init", common.init, "Initial frame: zeros, integrate_gd or given");
  add_common(recon, common);

  // compare
  std::string cmp_corpus, model_dir, if_model, gd_model, ph_model, cmp_csv, cmp_summary;
  auto* cmp = app.add_subcommand("compare", "Score all methods over a corpus");
  cmp->add_option("--corpus", cmp_corpus, "Directory of evaluation WAVs")->required();
  cmp->add_option("--model-dir", model_dir, "Directory holding if.mdl, gd.mdl, phase.mdl");
  cmp->add_option("--if-model", if_model);
  cmp->add_option("--gd-model", gd_model);
  cmp->add_option("--ph-model", ph_model);
  cmp->add_option("--csv", cmp_csv, "Per-row CSV output")->required();
  cmp->add_option("--summary", cmp_summary, "Median summary table");
  cmp->add_option("--gla", common.gla, "GLA iteration counts");
  cmp->add_option("--init", common.init, "Initial frame: zeros or integrate_gd");
  add_common(cmp, common);

  // shift-demo
  std::string shift_wav;
  double shift_ms = 0.5;
  auto* shift = app.add_subcommand("shift-demo", "Phase vs IF sensitivity to a small shift");
  shift->add_option("wav", shift_wav)->required();
  shift->add_option("--shift-ms", shift_ms, "Shift in milliseconds");
  add_common(shift, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const rpu::RunConfig cfg = resolve_config(common);
    if (*gen) {
      for (const auto& p : rpu::gen_corpus(corpus_out, cfg)) std::cout << p.string() << "\n";
    } else if (*analyze) {
      const auto a = rpu::analyze_command(wav_in, amp_out, phase_out, cfg);
      std::cout << "K=" << a.amplitude.bins() << " T=" << a.amplitude.frames() << "\n";
    } else if (*synth) {
      const auto w = rpu::synthesize_command(syn_amp, syn_phase, syn_out);
      std::cout << w.size() << " samples\n";
    } else if (*train) {
      const auto kind = rpu::parse_target_kind(train_kind);
      rpu::EpochCallback cb;
      if (verbose) {
        cb = [](int epoch, double loss) {
          if (epoch % 50 == 0) std::cerr << "epoch " << epoch << " loss " << loss << "\n";
        };
      }
      const auto r = rpu::train_command(
          train_corpus, kind, cfg, model_out,
          history_out.empty() ? std::nullopt : std::optional<fs::path>(history_out), cb);
      if (!r.loss_history.empty()) {
        std::cout << "final loss " << rpu::format_number(r.loss_history.back()) << "\n";
      }
    } else if (*recon) {
      req.method = rpu::parse_method(method);
      if (!source.empty()) parse_source(source, req);
      if (!report_csv.empty()) req.report_csv = report_csv;
      if (!ref_wav.empty()) req.reference_wav = ref_wav;
      const auto row = rpu::reconstruct_command(req, cfg);
      rpu::write_csv_row(std::cout, rpu::report_csv_header());
      rpu::write_report_row(std::cout, row);
    } else if (*cmp) {
      auto pick = [&](const std::string& explicit_path, const char* file)
          -> std::optional<fs::path> {
        if (!explicit_path.empty()) return fs::path(explicit_path);
        if (!model_dir.empty() && fs::exists(fs::path(model_dir) / file)) {
          return fs::path(model_dir) / file;
        }
        return std::nullopt;
      };
      const auto models = rpu::Estimators::load(pick(if_model, "if.mdl"),
                                                pick(gd_model, "gd.mdl"),
                                                pick(ph_model, "phase.mdl"));
      const auto r = rpu::compare_command(
          cmp_corpus, models, cfg, cmp_csv,
          cmp_summary.empty() ? std::nullopt : std::optional<fs::path>(cmp_summary));
      rpu::write_summary_text(std::cout, r.summary);
    } else if (*shift) {
      const auto d = rpu::shift_demo(rpu::load_wav_checked(shift_wav, cfg.stft), shift_ms,
                                     cfg.stft);
      if (d.rounded) {
        std::cerr << "warning: shift rounded to " << d.shift_samples << " samples\n";
      }
      std::cout << rpu::format_shift_demo(d);
    }
  } catch (const rpu::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const rpu::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const rpu::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
