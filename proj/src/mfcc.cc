// src/mfcc.cc

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

#include "rattle/mfcc.h"

#include <cmath>
#include <cstring>
#include <fstream>

#include "rattle/error.h"
#include "rattle/fft.h"

namespace rattle {

namespace {

constexpr std::uint32_t kFeatureVersion = 1;
constexpr char kFeatureMagic[4] = {'R', 'K', 'F', 'M'};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<double> make_window(WindowFunction w, int n) {
  std::vector<double> win(n, 1.0);
  switch (w) {
    case WindowFunction::kRectangular:
      break;
    case WindowFunction::kHamming:
      for (int i = 0; i < n; ++i)
        win[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n - 1));
      break;
    case WindowFunction::kHann:
      for (int i = 0; i < n; ++i)
        win[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / (n - 1)));
      break;
  }
  return win;
}

}  // namespace

WindowFunction window_function_from_string(const std::string& s) {
  if (s == "hamming") return WindowFunction::kHamming;
  if (s == "hann") return WindowFunction::kHann;
  if (s == "rectangular") return WindowFunction::kRectangular;
  throw InvalidConfig("unknown window function: " + s);
}

std::string to_string(WindowFunction w) {
  switch (w) {
    case WindowFunction::kHamming: return "hamming";
    case WindowFunction::kHann: return "hann";
    case WindowFunction::kRectangular: return "rectangular";
  }
  return "?";
}

double hz_to_mel(double hz) {
  if (hz < 0.0) throw NegativeFrequency("hz_to_mel: negative frequency");
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double mel_to_hz(double mel) {
  if (mel < 0.0) throw NegativeFrequency("mel_to_hz: negative mel value");
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int MfccConfig::window_samples(int rate) const {
  return static_cast<int>(std::llround(window_ms / 1000.0 * rate));
}

int MfccConfig::step_samples(int rate) const {
  return static_cast<int>(std::llround(step_ms / 1000.0 * rate));
}

int MfccConfig::resolved_fft_size(int rate) const {
  if (fft_size > 0) return fft_size;
  return static_cast<int>(
      next_power_of_two(static_cast<std::size_t>(window_samples(rate))));
}

double MfccConfig::resolved_fmax(int rate) const {
  return fmax_hz > 0.0 ? fmax_hz : rate / 2.0;
}

void MfccConfig::validate(int rate) const {
  if (rate <= 0) throw InvalidConfig("mfcc: sample rate must be positive");
  if (!(step_ms > 0.0) || step_ms > window_ms)
    throw InvalidConfig("mfcc: need 0 < step_ms <= window_ms");
  if (n_coeffs < 1 || n_coeffs > n_mel_filters)
    throw InvalidConfig("mfcc: need 1 <= n_coeffs <= n_mel_filters");
  if (n_mel_filters < 1) throw InvalidConfig("mfcc: need at least one filter");
  if (!(log_floor > 0.0)) throw InvalidConfig("mfcc: log floor must be > 0");
  int win = window_samples(rate);
  if (win < 2) throw InvalidConfig("mfcc: window shorter than two samples");
  if (fft_size > 0) {
    if (!is_power_of_two(static_cast<std::size_t>(fft_size)))
      throw InvalidConfig("mfcc: fft_size must be a power of two");
    if (fft_size < win)
      throw InvalidConfig("mfcc: fft_size smaller than the analysis window");
  }
  if (fmin_hz < 0.0) throw InvalidConfig("mfcc: fmin must be >= 0");
  double fmax = resolved_fmax(rate);
  if (fmax <= fmin_hz) throw InvalidConfig("mfcc: fmax must exceed fmin");
  if (fmax > rate / 2.0 + 1e-9)
    throw InvalidConfig("mfcc: fmax above Nyquist");
}

std::uint64_t MfccConfig::digest(int rate) const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "mfcc:v1;%g;%g;%d;%d;%d;%g;%s;%g;%g;%d",
                window_ms, step_ms, n_coeffs, n_mel_filters,
                resolved_fft_size(rate), log_floor,
                to_string(window).c_str(), fmin_hz, resolved_fmax(rate), rate);
  return fnv1a(buf);
}

Eigen::MatrixXd build_mel_filterbank(const MfccConfig& config, int rate) {
  config.validate(rate);
  const int n_filters = config.n_mel_filters;
  const int fft = config.resolved_fft_size(rate);
  const int n_bins = fft / 2 + 1;
  const double mel_lo = hz_to_mel(config.fmin_hz);
  const double mel_hi = hz_to_mel(config.resolved_fmax(rate));

  // n_filters + 2 mel-equidistant edge points; filter m spans [m-1, m+1].
  std::vector<double> edges_hz(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i)
    edges_hz[i] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_filters + 1));

  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(n_filters, n_bins);
  const double bin_hz = static_cast<double>(rate) / fft;
  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
    bool any = false;
    for (int b = 0; b < n_bins; ++b) {
      const double f = b * bin_hz;
      double w = 0.0;
      if (f > lo && f < mid)
        w = (f - lo) / (mid - lo);
      else if (f >= mid && f < hi)
        w = (hi - f) / (hi - mid);
      if (w > 0.0) {
        bank(m, b) = w;
        any = true;
      }
    }
    if (!any)
      throw TooManyFilters("mel filter " + std::to_string(m) +
                           " covers no FFT bin; reduce n_mel_filters or "
                           "increase fft_size");
  }
  return bank;
}

MfccSequence compute_mfcc(const AudioClip& clip, const MfccConfig& config) {
  clip.validate();
  if (clip.num_channels() != 1)
    throw ChannelMismatch("compute_mfcc: expected a mono clip");
  config.validate(clip.sample_rate);

  const int rate = clip.sample_rate;
  const int win = config.window_samples(rate);
  const int step = config.step_samples(rate);
  const int fft = config.resolved_fft_size(rate);
  const auto& x = clip.channels[0];
  if (static_cast<int>(x.size()) < win)
    throw ClipTooShort("compute_mfcc: clip shorter than one analysis window");

  const int n_frames = (static_cast<int>(x.size()) - win) / step + 1;
  const Eigen::MatrixXd bank = build_mel_filterbank(config, rate);
  const Dct2 dct(config.n_mel_filters);
  const std::vector<double> window = make_window(config.window, win);

  MfccSequence seq;
  seq.frames.resize(n_frames, config.n_coeffs);
  seq.frame_times.resize(n_frames);

  std::vector<double> frame(win);
  Eigen::VectorXd power(fft / 2 + 1);
  for (int t = 0; t < n_frames; ++t) {
    const int off = t * step;
    for (int i = 0; i < win; ++i) frame[i] = x[off + i] * window[i];
    std::vector<double> p = power_spectrum(frame, static_cast<std::size_t>(fft));
    for (std::size_t k = 0; k < p.size(); ++k) power(static_cast<int>(k)) = p[k];

    Eigen::VectorXd energies = bank * power;
    Eigen::VectorXd log_e =
        (energies.array() + config.log_floor).log().matrix();
    Eigen::VectorXd cepstrum = dct.forward(log_e);
    seq.frames.row(t) = cepstrum.head(config.n_coeffs).transpose();
    seq.frame_times[t] = static_cast<double>(off) / rate;
  }
  return seq;
}

MfccSequence extract_features(const AudioClip& clip, const MfccConfig& config,
                              ChannelPolicy policy) {
  if (policy != ChannelPolicy::kStack)
    return compute_mfcc(downmix(clip, policy), config);

  clip.validate();
  if (clip.num_channels() == 1) return compute_mfcc(clip, config);
  MfccSequence left =
      compute_mfcc(AudioClip::mono(clip.channels[0], clip.sample_rate), config);
  MfccSequence right =
      compute_mfcc(AudioClip::mono(clip.channels[1], clip.sample_rate), config);
  MfccSequence out;
  out.frame_times = left.frame_times;
  out.frames.resize(left.frames.rows(), left.frames.cols() * 2);
  out.frames << left.frames, right.frames;
  return out;
}

std::uint64_t feature_digest(const MfccConfig& config, int rate,
                             ChannelPolicy policy) {
  return config.digest(rate) ^ fnv1a("channels:" + to_string(policy));
}

namespace {

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoFailure("feature cache: unexpected end of file");
}

}  // namespace

void save_features(const MfccSequence& seq, std::uint64_t digest,
                   const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path + " for writing");
  out.write(kFeatureMagic, 4);
  write_pod(out, kFeatureVersion);
  write_pod(out, digest);
  write_pod(out, static_cast<std::uint32_t>(seq.n_frames()));
  write_pod(out, static_cast<std::uint32_t>(seq.n_coeffs()));
  double step_s = seq.frame_times.size() > 1
                      ? seq.frame_times[1] - seq.frame_times[0]
                      : 0.0;
  write_pod(out, step_s);
  for (int t = 0; t < seq.n_frames(); ++t)
    for (int c = 0; c < seq.n_coeffs(); ++c) write_pod(out, seq.frames(t, c));
  if (!out) throw IoFailure("short write to " + path);
}

MfccSequence load_features(const std::string& path,
                           std::uint64_t expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kFeatureMagic, 4) != 0)
    throw IoFailure("feature cache: bad magic in " + path);
  std::uint32_t version;
  read_pod(in, version);
  if (version != kFeatureVersion)
    throw VersionMismatch("feature cache: version " + std::to_string(version));
  std::uint64_t digest;
  read_pod(in, digest);
  if (digest != expected_digest)
    throw InvalidConfig("feature cache: config digest mismatch in " + path);
  std::uint32_t n_frames, n_coeffs;
  read_pod(in, n_frames);
  read_pod(in, n_coeffs);
  double step_s;
  read_pod(in, step_s);
  MfccSequence seq;
  seq.frames.resize(n_frames, n_coeffs);
  seq.frame_times.resize(n_frames);
  for (std::uint32_t t = 0; t < n_frames; ++t) {
    seq.frame_times[t] = t * step_s;
    for (std::uint32_t c = 0; c < n_coeffs; ++c) read_pod(in, seq.frames(t, c));
  }
  return seq;
}

}  // namespace rattle
