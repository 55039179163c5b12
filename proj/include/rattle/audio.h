// rattle/audio.h

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

#include <cstddef>
#include <string>
#include <vector>

namespace rattle {

// A sampled waveform: 1 or 2 channels of equal length, amplitudes nominally
// in [-1, 1]. All operations on clips are pure; they never mutate the input.
struct AudioClip {
  std::vector<std::vector<double>> channels;
  int sample_rate = 0;

  int num_channels() const { return static_cast<int>(channels.size()); }
  std::size_t num_samples() const {
    return channels.empty() ? 0 : channels.front().size();
  }
  // Max |sample| over all channels.
  double peak() const;

  static AudioClip mono(std::vector<double> samples, int rate);
  static AudioClip stereo(std::vector<double> left, std::vector<double> right,
                          int rate);

  // Throws Error if channel lengths differ, rate <= 0, or channel count is
  // not 1 or 2.
  void validate() const;
};

enum class ChannelPolicy { kMix, kLeft, kRight, kStack };

ChannelPolicy channel_policy_from_string(const std::string& s);
std::string to_string(ChannelPolicy p);

// Signal/noise mixing weights; signal_gain is defined as 1 - noise_gain so
// the two always sum to exactly 1.
struct GainMix {
  double signal_gain;
  double noise_gain;

  static GainMix from_noise_gain(double noise_gain);
};

// Scale so the global peak is exactly 1. Throws SilentClip on all-zero input.
AudioClip normalize_peak(const AudioClip& clip);

// Truncate or zero-pad (at the end) to round(target_ms/1000 * rate) samples.
// Throws RateMismatch when the clip is not at required_rate; resampling is
// not supported.
AudioClip conform(const AudioClip& clip, double target_ms = 625.0,
                  int required_rate = 48000);

// Reduce to mono. kMix averages channels, kLeft/kRight selects one; mono
// input is returned unchanged. kStack is a feature-level policy and is
// rejected here.
AudioClip downmix(const AudioClip& clip, ChannelPolicy policy = ChannelPolicy::kMix);

// out[i] = (1 - noise_gain) * signal[i] + noise_gain * noise[i].
// Both inputs are expected peak-normalized; the noise is tiled or truncated
// to the signal length.
AudioClip mix_noise(const AudioClip& signal, const AudioClip& noise,
                    double noise_gain);

}  // namespace rattle
