// rattle/mfcc.h

// Copyright 2026  Rattle Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rattle/audio.h"

namespace rattle {

// Mel Frequency Cepstral Coefficients: per frame, windowed FFT power
// spectrum -> triangular mel filterbank -> log(energy + floor) ->
// orthonormal DCT-II, keeping the first n_coeffs coefficients (index 0
// included).

enum class WindowFunction { kHamming, kHann, kRectangular };

WindowFunction window_function_from_string(const std::string& s);
std::string to_string(WindowFunction w);

// O'Shaughnessy mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

struct MfccConfig {
  double window_ms = 30.0;
  double step_ms = 15.0;
  int n_coeffs = 21;        // 21 for material classification, 27 for weighing
  int n_mel_filters = 40;
  int fft_size = 0;         // 0 = smallest power of two >= window samples
  double log_floor = 1e-10;
  WindowFunction window = WindowFunction::kHamming;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;     // 0 = rate / 2

  int window_samples(int rate) const;
  int step_samples(int rate) const;
  int resolved_fft_size(int rate) const;
  double resolved_fmax(int rate) const;

  // Throws InvalidConfig when step > window, n_coeffs > n_mel_filters,
  // explicit fft_size is not a power of two or is shorter than the window,
  // or fmax > rate/2.
  void validate(int rate) const;

  // Stable fingerprint over every field plus the sample rate; guards feature
  // caches and checkpoints against config mismatches.
  std::uint64_t digest(int rate) const;
};

struct MfccSequence {
  Eigen::MatrixXd frames;           // n_frames x n_coeffs
  std::vector<double> frame_times;  // frame start offsets, seconds

  int n_frames() const { return static_cast<int>(frames.rows()); }
  int n_coeffs() const { return static_cast<int>(frames.cols()); }
};

// Triangular filters, centers equally spaced on the mel axis; rows are
// filters, columns FFT bins 0..fft_size/2. Throws TooManyFilters when a
// filter would cover no FFT bin.
Eigen::MatrixXd build_mel_filterbank(const MfccConfig& config, int rate);

// clip must be mono and at least one window long.
MfccSequence compute_mfcc(const AudioClip& clip, const MfccConfig& config);

// Channel handling on top of compute_mfcc: kMix/kLeft/kRight downmix first;
// kStack computes per-channel coefficients and concatenates them per frame.
MfccSequence extract_features(const AudioClip& clip, const MfccConfig& config,
                              ChannelPolicy policy);

// Digest of the full feature pipeline (mfcc config + channel policy).
std::uint64_t feature_digest(const MfccConfig& config, int rate,
                             ChannelPolicy policy);

// Binary feature cache, one matrix per file (format documented in README):
// magic "RKFM", u32 version, u64 digest, u32 n_frames, u32 n_coeffs,
// f64 frame step seconds, then row-major f64 coefficients.
void save_features(const MfccSequence& seq, std::uint64_t digest,
                   const std::string& path);
MfccSequence load_features(const std::string& path,
                           std::uint64_t expected_digest);

}  // namespace rattle
