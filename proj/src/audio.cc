// src/audio.cc

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

#include "rattle/audio.h"

#include <algorithm>
#include <cmath>

#include "rattle/error.h"

namespace rattle {

double AudioClip::peak() const {
  double p = 0.0;
  for (const auto& ch : channels)
    for (double s : ch) p = std::max(p, std::fabs(s));
  return p;
}

AudioClip AudioClip::mono(std::vector<double> samples, int rate) {
  AudioClip clip;
  clip.channels.push_back(std::move(samples));
  clip.sample_rate = rate;
  return clip;
}

AudioClip AudioClip::stereo(std::vector<double> left, std::vector<double> right,
                            int rate) {
  AudioClip clip;
  clip.channels.push_back(std::move(left));
  clip.channels.push_back(std::move(right));
  clip.sample_rate = rate;
  return clip;
}

void AudioClip::validate() const {
  if (sample_rate <= 0) throw Error("AudioClip: sample_rate must be positive");
  if (channels.empty() || channels.size() > 2)
    throw ChannelMismatch("AudioClip: expected 1 or 2 channels, got " +
                          std::to_string(channels.size()));
  for (const auto& ch : channels)
    if (ch.size() != channels.front().size())
      throw Error("AudioClip: channels differ in length");
}

ChannelPolicy channel_policy_from_string(const std::string& s) {
  if (s == "mix") return ChannelPolicy::kMix;
  if (s == "left") return ChannelPolicy::kLeft;
  if (s == "right") return ChannelPolicy::kRight;
  if (s == "stack") return ChannelPolicy::kStack;
  throw InvalidConfig("unknown channel policy: " + s);
}

std::string to_string(ChannelPolicy p) {
  switch (p) {
    case ChannelPolicy::kMix: return "mix";
    case ChannelPolicy::kLeft: return "left";
    case ChannelPolicy::kRight: return "right";
    case ChannelPolicy::kStack: return "stack";
  }
  return "?";
}

GainMix GainMix::from_noise_gain(double noise_gain) {
  if (!(noise_gain >= 0.0 && noise_gain <= 1.0))
    throw InvalidConfig("noise_gain must be in [0, 1], got " +
                        std::to_string(noise_gain));
  return GainMix{1.0 - noise_gain, noise_gain};
}

AudioClip normalize_peak(const AudioClip& clip) {
  clip.validate();
  double p = clip.peak();
  if (p == 0.0) throw SilentClip("normalize_peak: clip is all zeros");
  AudioClip out = clip;
  // Divide rather than multiply by a reciprocal so the loudest sample maps
  // to exactly +-1.0 and peak() == 1.0 holds bit-exactly afterwards.
  for (auto& ch : out.channels)
    for (double& s : ch) s /= p;
  return out;
}

AudioClip conform(const AudioClip& clip, double target_ms, int required_rate) {
  clip.validate();
  if (clip.sample_rate != required_rate)
    throw RateMismatch("conform: clip rate " +
                       std::to_string(clip.sample_rate) + " != required " +
                       std::to_string(required_rate) +
                       " (resampling unsupported)");
  auto target = static_cast<std::size_t>(
      std::llround(target_ms / 1000.0 * required_rate));
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  for (const auto& ch : clip.channels) {
    std::vector<double> v(ch.begin(),
                          ch.begin() + std::min(target, ch.size()));
    v.resize(target, 0.0);
    out.channels.push_back(std::move(v));
  }
  return out;
}

AudioClip downmix(const AudioClip& clip, ChannelPolicy policy) {
  clip.validate();
  if (policy == ChannelPolicy::kStack)
    throw InvalidConfig("downmix: 'stack' applies to feature extraction, not waveforms");
  if (clip.num_channels() == 1) return clip;
  const auto& l = clip.channels[0];
  const auto& r = clip.channels[1];
  std::vector<double> out(l.size());
  switch (policy) {
    case ChannelPolicy::kMix:
      for (std::size_t i = 0; i < l.size(); ++i) out[i] = 0.5 * (l[i] + r[i]);
      break;
    case ChannelPolicy::kLeft: out = l; break;
    case ChannelPolicy::kRight: out = r; break;
    default: break;
  }
  return AudioClip::mono(std::move(out), clip.sample_rate);
}

AudioClip mix_noise(const AudioClip& signal, const AudioClip& noise,
                    double noise_gain) {
  signal.validate();
  noise.validate();
  if (signal.sample_rate != noise.sample_rate)
    throw RateMismatch("mix_noise: sample rates differ");
  if (signal.num_channels() != noise.num_channels())
    throw ChannelMismatch("mix_noise: channel counts differ");
  GainMix g = GainMix::from_noise_gain(noise_gain);

  AudioClip out = signal;
  std::size_t n = signal.num_samples();
  std::size_t m = noise.num_samples();
  if (m == 0) throw Error("mix_noise: empty noise clip");
  for (int c = 0; c < signal.num_channels(); ++c) {
    const auto& s = signal.channels[c];
    const auto& v = noise.channels[c];
    auto& o = out.channels[c];
    for (std::size_t i = 0; i < n; ++i)
      o[i] = g.signal_gain * s[i] + g.noise_gain * v[i % m];  // tile short noise
  }
  return out;
}

}  // namespace rattle
