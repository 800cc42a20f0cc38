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
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rpu/error.hpp"
#include "rpu/phasediff.hpp"
#include "rpu/spectral.hpp"

namespace rpu {

inline constexpr double kSnrCapDb = 300.0;

// Mean of cos(est - ref) over all bins and frames, in [-1, 1].
inline double cosine_accuracy(const Eigen::MatrixXd& est, const Eigen::MatrixXd& ref) {
  if (est.rows() != ref.rows() || est.cols() != ref.cols()) {
    throw DomainError("cosine_accuracy: shapes differ");
  }
  if (est.size() == 0) throw DomainError("cosine_accuracy: empty input");
  return (ref - est).array().cos().mean();
}

// || |stft(istft(est))| - ref || / ||ref||
inline double spectral_convergence(const ComplexSpectrogram& est,
                                   const AmplitudeSpectrogram& ref) {
  if (est.data.rows() != ref.data.rows() || est.data.cols() != ref.data.cols()) {
    throw DomainError("spectral_convergence: shapes differ");
  }
  const double ref_norm = ref.data.norm();
  if (!(ref_norm > 0.0)) throw DomainError("spectral_convergence: zero reference");
  const ComplexSpectrogram consistent = stft(istft(est), est.config);
  return (consistent.data.cwiseAbs() - ref.data).norm() / ref_norm;
}

// 10 log10(|ref|^2 / |ref - est|^2) after choosing the global shift in
// [-max_shift, max_shift] and sign that minimize the error. Capped at 300 dB.
inline double snr_db(const Waveform& est, const Waveform& ref, int max_shift) {
  const auto n_est = static_cast<std::ptrdiff_t>(est.size());
  const auto n_ref = static_cast<std::ptrdiff_t>(ref.size());
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::ptrdiff_t shift = -max_shift; shift <= max_shift; ++shift) {
    // est[n + shift] is compared with ref[n]
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
    const std::ptrdiff_t hi = std::min(n_ref, n_est - shift);
    if (hi - lo < 1) continue;
    double energy = 0.0, err_pos = 0.0, err_neg = 0.0;
    for (std::ptrdiff_t n = lo; n < hi; ++n) {
      const double r = ref.samples[static_cast<size_t>(n)];
      const double e = est.samples[static_cast<size_t>(n + shift)];
      energy += r * r;
      err_pos += (r - e) * (r - e);
      err_neg += (r + e) * (r + e);
    }
    if (!(energy > 0.0)) continue;
    any = true;
    const double err = std::min(err_pos, err_neg);
    const double snr = err > 0.0 ? 10.0 * std::log10(energy / err) : kSnrCapDb;
    best = std::max(best, std::min(snr, kSnrCapDb));
  }
  if (!any) throw DomainError("snr_db: reference has no energy in the overlap");
  return best;
}

// y[n] = x[n - shift], same length, zeros shifted in.
inline Waveform delay(const Waveform& wave, int shift) {
  Waveform out{std::vector<double>(wave.size(), 0.0), wave.sample_rate};
  for (size_t n = static_cast<size_t>(std::max(shift, 0)); n < wave.size(); ++n) {
    out.samples[n] = wave.samples[n - static_cast<size_t>(shift)];
  }
  return out;
}

struct ShiftSensitivity {
  double amp_rel_diff = 0.0;
  double phase_mean_abs_diff = 0.0;
  double if_mean_abs_diff = 0.0;
};

// Compares the analyses of a signal and its delayed copy. Phase and IF
// differences are averaged with |X|^2 weights of the original, ignoring bins
// more than 60 dB below the peak.
inline ShiftSensitivity shift_sensitivity_report(const Waveform& wave, int shift,
                                                 const StftConfig& cfg) {
  if (shift < 0 || shift >= cfg.hop_length) {
    throw DomainError("shift must lie in [0, hop_length)");
  }
  const ComplexSpectrogram a = stft(wave, cfg);
  const ComplexSpectrogram b = stft(delay(wave, shift), cfg);
  const Eigen::MatrixXd amp_a = a.data.cwiseAbs();
  const Eigen::MatrixXd amp_b = b.data.cwiseAbs();

  ShiftSensitivity r;
  const double norm = amp_a.norm();
  r.amp_rel_diff = norm > 0.0 ? (amp_a - amp_b).norm() / norm : 0.0;

  Eigen::MatrixXd weight = amp_a.array().square();
  const double floor = weight.maxCoeff() * 1e-6;
  if (floor > 0.0) weight = (weight.array() >= floor).select(weight, 0.0);

  const Eigen::MatrixXd phase_a = phase(a).data;
  const Eigen::MatrixXd phase_b = phase(b).data;
  const double wsum = weight.sum();
  if (wsum > 0.0) {
    r.phase_mean_abs_diff =
        (weight.array() * wrap(phase_a - phase_b).array().abs()).sum() / wsum;
  }
  if (a.frames() >= 2) {
    const Eigen::Index t = a.frames();
    const Eigen::MatrixXd w_if = weight.leftCols(t - 1).cwiseMin(weight.rightCols(t - 1));
    const double w_if_sum = w_if.sum();
    if (w_if_sum > 0.0) {
      const Eigen::MatrixXd d = wrap(instantaneous_frequency(phase_a) -
                                     instantaneous_frequency(phase_b));
      r.if_mean_abs_diff = (w_if.array() * d.array().abs()).sum() / w_if_sum;
    }
  }
  return r;
}

struct ReconstructionReport {
  std::string utterance;
  std::string method;
  int gla_iterations = 0;
  double cosine_accuracy = std::numeric_limits<double>::quiet_NaN();
  double spectral_convergence = std::numeric_limits<double>::quiet_NaN();
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
};

// Shortest round-trip decimal form; "nan"/"inf" spelled out.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\r\n";
}

inline const std::vector<std::string>& report_csv_header() {
  static const std::vector<std::string> header = {
      "utterance", "method", "gla_iterations", "cosine_accuracy",
      "spectral_convergence", "snr_db", "status"};
  return header;
}

inline void write_report_row(std::ostream& out, const ReconstructionReport& r) {
  write_csv_row(out, {r.utterance, r.method, std::to_string(r.gla_iterations),
                      format_number(r.cosine_accuracy),
                      format_number(r.spectral_convergence), format_number(r.snr_db),
                      r.status});
}

inline void write_report_csv(std::ostream& out,
                             const std::vector<ReconstructionReport>& rows) {
  write_csv_row(out, report_csv_header());
  for (const auto& r : rows) write_report_row(out, r);
}

// Median of the finite values; NaN if there are none.
inline double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return !std::isfinite(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct MethodSummary {
  std::string method;
  int gla_iterations = 0;
  size_t count = 0;
  double median_cosine_accuracy = 0.0;
  double median_spectral_convergence = 0.0;
  double median_snr_db = 0.0;
};

// Per (method, GLA iterations) medians, in first-appearance order.
inline std::vector<MethodSummary> summarize(const std::vector<ReconstructionReport>& rows) {
  std::vector<MethodSummary> out;
  for (const auto& r : rows) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const MethodSummary& s) {
      return s.method == r.method && s.gla_iterations == r.gla_iterations;
    });
    if (seen) continue;
    std::vector<double> ca, sc, snr;
    size_t count = 0;
    for (const auto& q : rows) {
      if (q.method != r.method || q.gla_iterations != r.gla_iterations || q.status != "ok") {
        continue;
      }
      ++count;
      ca.push_back(q.cosine_accuracy);
      sc.push_back(q.spectral_convergence);
      snr.push_back(q.snr_db);
    }
    out.push_back({r.method, r.gla_iterations, count, median(ca), median(sc), median(snr)});
  }
  return out;
}

inline void write_summary_text(std::ostream& out, const std::vector<MethodSummary>& s) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %5s %5s %12s %12s %10s\n", "method", "gla",
                "n", "cos_acc", "spec_conv", "snr_db");
  out << line;
  for (const auto& m : s) {
    std::snprintf(line, sizeof(line), "%-10s %5d %5zu %12.4f %12.4f %10.2f\n",
                  m.method.c_str(), m.gla_iterations, m.count, m.median_cosine_accuracy,
                  m.median_spectral_convergence, m.median_snr_db);
    out << line;
  }
}

}  // namespace rpu
