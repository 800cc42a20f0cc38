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

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstring>
#include <mutex>
#include <new>
#include <span>
#include <utility>

#include "rpu/error.hpp"

namespace rpu {

// One-sided real FFT of a fixed size backed by FFTW. Plans are created once
// and executed on private buffers, so a RealFft instance must not be shared
// between threads, but distinct instances may run concurrently.
class RealFft {
 public:
  explicit RealFft(int size) : size_(size) {
    if (size < 1) throw DomainError("FFT size must be positive");
    time_ = fftw_alloc_real(static_cast<size_t>(size));
    freq_ = fftw_alloc_complex(static_cast<size_t>(bins()));
    if (time_ == nullptr || freq_ == nullptr) {
      release();
      throw std::bad_alloc();
    }
    // FFTW's planner is not reentrant.
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(size, time_, freq_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(size, freq_, time_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept { *this = std::move(other); }
  RealFft& operator=(RealFft&& other) noexcept {
    if (this != &other) {
      release();
      size_ = std::exchange(other.size_, 0);
      time_ = std::exchange(other.time_, nullptr);
      freq_ = std::exchange(other.freq_, nullptr);
      forward_ = std::exchange(other.forward_, nullptr);
      inverse_ = std::exchange(other.inverse_, nullptr);
    }
    return *this;
  }
  ~RealFft() { release(); }

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // out[k] = sum_n in[n] exp(-2 pi i k n / size), k = 0..size/2. Input
  // shorter than size is zero-padded.
  void forward(std::span<const double> in,
               std::span<std::complex<double>> out) {
    const size_t n = std::min(in.size(), static_cast<size_t>(size_));
    std::memcpy(time_, in.data(), n * sizeof(double));
    std::fill(time_ + n, time_ + size_, 0.0);
    fftw_execute(forward_);
    for (int k = 0; k < bins(); ++k) {
      out[static_cast<size_t>(k)] = {freq_[k][0], freq_[k][1]};
    }
  }

  // Normalized inverse of forward() assuming Hermitian symmetry; the
  // imaginary parts of the DC and Nyquist bins are ignored.
  void inverse(std::span<const std::complex<double>> in,
               std::span<double> out) {
    for (int k = 0; k < bins(); ++k) {
      freq_[k][0] = in[static_cast<size_t>(k)].real();
      freq_[k][1] = in[static_cast<size_t>(k)].imag();
    }
    fftw_execute(inverse_);
    const double scale = 1.0 / size_;
    const size_t n = std::min(out.size(), static_cast<size_t>(size_));
    for (size_t i = 0; i < n; ++i) out[i] = time_[i] * scale;
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex mutex;
    return mutex;
  }

  void release() {
    if (forward_ != nullptr || inverse_ != nullptr) {
      std::lock_guard<std::mutex> lock(planner_mutex());
      if (forward_ != nullptr) fftw_destroy_plan(forward_);
      if (inverse_ != nullptr) fftw_destroy_plan(inverse_);
    }
    if (time_ != nullptr) fftw_free(time_);
    if (freq_ != nullptr) fftw_free(freq_);
    forward_ = inverse_ = nullptr;
    time_ = nullptr;
    freq_ = nullptr;
  }

  int size_ = 0;
  double* time_ = nullptr;
  fftw_complex* freq_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

}  // namespace rpu
