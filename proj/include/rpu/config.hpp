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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "rpu/error.hpp"
#include "rpu/estimator/features.hpp"
#include "rpu/estimator/train.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

enum class InitialFrameKind { kZeros, kIntegrateGroupDelay, kGivenOracle };

inline std::string to_string(InitialFrameKind k) {
  switch (k) {
    case InitialFrameKind::kZeros:
      return "zeros";
    case InitialFrameKind::kIntegrateGroupDelay:
      return "integrate_gd";
    case InitialFrameKind::kGivenOracle:
      return "given";
  }
  return "zeros";
}

inline InitialFrameKind parse_initial_frame(const std::string& s) {
  if (s == "zeros") return InitialFrameKind::kZeros;
  if (s == "integrate_gd") return InitialFrameKind::kIntegrateGroupDelay;
  if (s == "given") return InitialFrameKind::kGivenOracle;
  throw ConfigError("unknown initial_frame '" + s +
                    "' (expected zeros, integrate_gd or given)");
}

struct RunConfig {
  std::uint64_t seed = 2020;
  StftConfig stft;
  FeatureConfig feature;
  TrainConfig train = TrainConfig::desk(seed);
  InitialFrameKind initial_frame = InitialFrameKind::kZeros;
  bool wrap_each_frame = true;
  std::vector<int> gla_iterations = {0, 10, 100};
  std::filesystem::path input_dir;
  std::filesystem::path model_dir;
  std::filesystem::path output_dir;

  void validate() const {
    stft.validate();
    feature.validate();
    train.validate();
    for (int g : gla_iterations) {
      if (g < 0) throw ConfigError("gla_iterations entries must be >= 0");
    }
  }
};

namespace config_detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

}  // namespace config_detail

// Strict schema: unknown keys are errors; absent keys keep their defaults.
// train.profile ("desk" or "full") selects the base training preset.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  using config_detail::read;
  using config_detail::reject_unknown;
  RunConfig c;
  reject_unknown(j, {"stft", "feature", "train", "rpu", "gla_iterations", "paths", "seed"},
                 "config");
  if (j.contains("stft")) {
    const auto& s = j["stft"];
    reject_unknown(s, {"sample_rate", "window_length", "hop_length", "fft_size", "window"},
                   "stft");
    read(s, "sample_rate", c.stft.sample_rate, "stft");
    read(s, "window_length", c.stft.window_length, "stft");
    read(s, "hop_length", c.stft.hop_length, "stft");
    read(s, "fft_size", c.stft.fft_size, "stft");
    std::string window = "hann";
    read(s, "window", window, "stft");
    if (window != "hann") throw ConfigError("only the hann window is supported");
  }
  if (j.contains("feature")) {
    const auto& f = j["feature"];
    reject_unknown(f, {"context", "amplitude_floor", "normalization"}, "feature");
    read(f, "context", c.feature.context, "feature");
    read(f, "amplitude_floor", c.feature.amplitude_floor, "feature");
    std::string norm = "per_utterance_log_mean_var";
    read(f, "normalization", norm, "feature");
    if (norm != "per_utterance_log_mean_var") {
      throw ConfigError("unsupported feature normalization '" + norm + "'");
    }
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    reject_unknown(t, {"profile", "initial_lr", "lr_halving_period", "epochs",
                       "segment_seconds", "batch_size", "hidden_layers", "hidden_width",
                       "beta1", "beta2", "epsilon"},
                   "train");
    std::string profile = "desk";
    read(t, "profile", profile, "train");
    if (profile == "full") {
      c.train = TrainConfig::full();
    } else if (profile != "desk") {
      throw ConfigError("unknown train profile '" + profile + "'");
    }
    read(t, "initial_lr", c.train.initial_lr, "train");
    read(t, "lr_halving_period", c.train.lr_halving_period, "train");
    read(t, "epochs", c.train.epochs, "train");
    read(t, "segment_seconds", c.train.segment_seconds, "train");
    read(t, "batch_size", c.train.batch_size, "train");
    read(t, "hidden_layers", c.train.hidden_layers, "train");
    read(t, "hidden_width", c.train.hidden_width, "train");
    read(t, "beta1", c.train.beta1, "train");
    read(t, "beta2", c.train.beta2, "train");
    read(t, "epsilon", c.train.epsilon, "train");
  }
  if (j.contains("rpu")) {
    const auto& r = j["rpu"];
    reject_unknown(r, {"initial_frame", "wrap_each_frame"}, "rpu");
    std::string init = to_string(c.initial_frame);
    read(r, "initial_frame", init, "rpu");
    c.initial_frame = parse_initial_frame(init);
    read(r, "wrap_each_frame", c.wrap_each_frame, "rpu");
  }
  read(j, "gla_iterations", c.gla_iterations, "config");
  if (j.contains("paths")) {
    const auto& p = j["paths"];
    reject_unknown(p, {"input_dir", "model_dir", "output_dir"}, "paths");
    std::string s;
    if (p.contains("input_dir")) { read(p, "input_dir", s, "paths"); c.input_dir = s; }
    if (p.contains("model_dir")) { read(p, "model_dir", s, "paths"); c.model_dir = s; }
    if (p.contains("output_dir")) { read(p, "output_dir", s, "paths"); c.output_dir = s; }
  }
  read(j, "seed", c.seed, "config");
  c.train.seed = c.seed;
  c.validate();
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {
      {"stft",
       {{"sample_rate", c.stft.sample_rate},
        {"window_length", c.stft.window_length},
        {"hop_length", c.stft.hop_length},
        {"fft_size", c.stft.fft_size},
        {"window", "hann"}}},
      {"feature",
       {{"context", c.feature.context},
        {"amplitude_floor", c.feature.amplitude_floor},
        {"normalization", "per_utterance_log_mean_var"}}},
      {"train",
       {{"initial_lr", c.train.initial_lr},
        {"lr_halving_period", c.train.lr_halving_period},
        {"epochs", c.train.epochs},
        {"segment_seconds", c.train.segment_seconds},
        {"batch_size", c.train.batch_size},
        {"hidden_layers", c.train.hidden_layers},
        {"hidden_width", c.train.hidden_width},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon}}},
      {"rpu",
       {{"initial_frame", to_string(c.initial_frame)},
        {"wrap_each_frame", c.wrap_each_frame}}},
      {"gla_iterations", c.gla_iterations},
      {"paths",
       {{"input_dir", c.input_dir.string()},
        {"model_dir", c.model_dir.string()},
        {"output_dir", c.output_dir.string()}}},
      {"seed", c.seed},
  };
}

// RPU_SEED, when set, overrides the configured seed.
inline void apply_environment(RunConfig& c) {
  if (const char* env = std::getenv("RPU_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError(std::string("RPU_SEED is not an unsigned integer: ") + env);
    }
    c.seed = v;
    c.train.seed = v;
  }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace rpu
