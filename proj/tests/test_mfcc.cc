// test_mfcc.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <vector>

#include "rattle/audio.h"
#include "rattle/error.h"
#include "rattle/fft.h"
#include "rattle/mfcc.h"
#include "rattle/rng.h"

using namespace rattle;

namespace {

constexpr double kPi = 3.14159265358979323846;

// O(n^2) reference transform, kept deliberately naive and separate from the
// radix-2 implementation under test.
std::vector<std::complex<double>> dft_oracle(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      double angle = -2.0 * kPi * static_cast<double>(k * m) / n;
      acc += x[m] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

AudioClip sine_clip(double freq, double amplitude, int n, int rate) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i)
    v[i] = amplitude * std::sin(2.0 * kPi * freq * i / rate);
  return AudioClip::mono(std::move(v), rate);
}

}  // namespace

TEST_CASE("power-of-two helpers") {
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(2048));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(1440));
  CHECK(next_power_of_two(1440) == 2048);
  CHECK(next_power_of_two(2048) == 2048);
  CHECK(next_power_of_two(1) == 1);
}

TEST_CASE("fft matches the direct DFT oracle on random frames") {
  Rng rng(91);
  for (int trial = 0; trial < 25; ++trial) {
    std::size_t n = 1ull << (4 + trial % 5);  // 16 .. 256
    std::vector<double> frame(n);
    for (auto& v : frame) v = rng.uniform(-1.0, 1.0);

    std::vector<std::complex<double>> a(frame.begin(), frame.end());
    fft_inplace(a);
    auto oracle = dft_oracle(frame);

    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double denom = std::max(std::abs(oracle[k]), 1e-12);
      worst = std::max(worst, std::abs(a[k] - oracle[k]) / denom);
    }
    CHECK(worst < 1e-9);
  }
  std::vector<std::complex<double>> bad(3);
  CHECK_THROWS_AS(fft_inplace(bad), Error);
}

TEST_CASE("power spectrum of a pure tone concentrates at the right bin") {
  const int rate = 48000;
  const std::size_t fft = 2048;
  // Pick a frequency exactly on bin 100 so leakage is zero.
  const double freq = 100.0 * rate / static_cast<double>(fft);
  AudioClip clip = sine_clip(freq, 1.0, static_cast<int>(fft), rate);
  auto spectrum = power_spectrum(clip.channels[0], fft);
  REQUIRE(spectrum.size() == fft / 2 + 1);
  // |X[k]|^2 of a unit sine over a full window is (N/2)^2 at the bin.
  CHECK(spectrum[100] ==
        doctest::Approx(1024.0 * 1024.0).epsilon(1e-9));
  CHECK(spectrum[99] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(spectrum[250] == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("Parseval ties the power spectrum to frame energy") {
  Rng rng(17);
  std::vector<double> frame(512);
  for (auto& v : frame) v = rng.uniform(-1.0, 1.0);
  auto spectrum = power_spectrum(frame, 512);
  // sum |X[k]|^2 over the full circle = N * sum x^2; fold the half spectrum.
  double full = spectrum.front() + spectrum.back();
  for (std::size_t k = 1; k + 1 < spectrum.size(); ++k) full += 2.0 * spectrum[k];
  double energy = 0.0;
  for (double v : frame) energy += v * v;
  CHECK(full == doctest::Approx(512.0 * energy).epsilon(1e-10));
}

TEST_CASE("orthonormal DCT-II round trips and preserves norms") {
  Rng rng(33);
  Dct2 dct(40);
  Eigen::VectorXd x(40);
  for (int i = 0; i < 40; ++i) x(i) = rng.uniform(-5.0, 5.0);
  Eigen::VectorXd y = dct.forward(x);
  CHECK((dct.inverse(y) - x).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(y.norm() == doctest::Approx(x.norm()).epsilon(1e-12));
  // First basis vector is the scaled constant: y0 = sqrt(1/n) * sum(x).
  CHECK(y(0) == doctest::Approx(x.sum() / std::sqrt(40.0)).epsilon(1e-12));
}

TEST_CASE("mel scale round trips and hits the classic anchor") {
  CHECK(hz_to_mel(0.0) == 0.0);
  // 1000 Hz sits a hair under 1000 mel on this variant of the formula.
  CHECK(hz_to_mel(1000.0) == doctest::Approx(999.9855371396244).epsilon(1e-12));
  for (double hz : {50.0, 440.0, 1000.0, 8000.0, 20000.0})
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-10));
}

TEST_CASE("mel filterbank geometry") {
  MfccConfig config;
  const int rate = 48000;
  Eigen::MatrixXd bank = build_mel_filterbank(config, rate);
  REQUIRE(bank.rows() == 40);
  REQUIRE(bank.cols() == 2048 / 2 + 1);

  // Filters are nonnegative, each one nonempty, peaks near 1 at the center.
  for (int f = 0; f < 40; ++f) {
    CHECK(bank.row(f).minCoeff() >= 0.0);
    CHECK(bank.row(f).maxCoeff() > 0.0);
    CHECK(bank.row(f).maxCoeff() <= 1.0 + 1e-12);
  }

  // Recompute the triangle edges independently: 42 points equally spaced in
  // mel between 0 and the Nyquist mel.
  const double mel_max = hz_to_mel(rate / 2.0);
  for (int f = 0; f < 40; ++f) {
    double center_hz = mel_to_hz(mel_max * (f + 1) / 41.0);
    double lo_hz = mel_to_hz(mel_max * f / 41.0);
    double hi_hz = mel_to_hz(mel_max * (f + 2) / 41.0);
    // The filter's peak bin sits within one bin of the analytic center.
    Eigen::Index peak_bin = 0;
    bank.row(f).maxCoeff(&peak_bin);
    double bin_hz = rate / 2048.0;
    CHECK(std::fabs(peak_bin * bin_hz - center_hz) <= 1.5 * bin_hz);
    // Response at the far edges is zero.
    auto lo_bin = static_cast<Eigen::Index>(std::floor(lo_hz / bin_hz));
    auto hi_bin = static_cast<Eigen::Index>(std::ceil(hi_hz / bin_hz));
    if (lo_bin >= 1) CHECK(bank(f, lo_bin - 1) == 0.0);
    if (hi_bin + 1 < bank.cols()) CHECK(bank(f, hi_bin + 1) == 0.0);
  }

  MfccConfig too_many = config;
  too_many.n_mel_filters = 1500;  // more filters than usable bins
  CHECK_THROWS_AS(build_mel_filterbank(too_many, rate), TooManyFilters);
}

TEST_CASE("mfcc of 625 ms at 48 kHz yields 40 frames of 21 coefficients") {
  MfccConfig config;
  AudioClip clip = sine_clip(1000.0, 0.5, 30000, 48000);
  MfccSequence seq = compute_mfcc(clip, config);
  CHECK(seq.n_frames() == 40);   // 1 + (30000 - 1440) / 720
  CHECK(seq.n_coeffs() == 21);
  REQUIRE(seq.frame_times.size() == 40);
  CHECK(seq.frame_times[0] == 0.0);
  CHECK(seq.frame_times[1] == doctest::Approx(0.015));
}

TEST_CASE("mfcc of pure silence is the log-floor constant vector") {
  MfccConfig config;
  AudioClip clip = AudioClip::mono(std::vector<double>(30000, 0.0), 48000);
  MfccSequence seq = compute_mfcc(clip, config);
  // log(0 + 1e-10) everywhere -> only the DCT's constant coefficient is
  // nonzero: c0 = sqrt(40) * ln(1e-10).
  const double c0 = std::sqrt(40.0) * std::log(1e-10);
  CHECK(seq.frames(0, 0) == doctest::Approx(c0).epsilon(1e-12));
  CHECK(seq.frames(0, 0) == doctest::Approx(-145.62826800423602).epsilon(1e-12));
  for (int k = 1; k < seq.n_coeffs(); ++k)
    CHECK(seq.frames(0, k) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("mfcc is shift-invariant for a hop-commensurate tone") {
  // 1000 Hz at 48 kHz completes exactly 15 cycles per 720-sample hop, so
  // every analysis window sees identical samples and every frame must agree
  // to rounding error. (Tones incommensurate with the hop legitimately
  // differ: phase-dependent sidelobe leakage lands in near-floor mel bands
  // where the log is steep.)
  MfccConfig config;
  AudioClip clip = sine_clip(1000.0, 0.5, 32000, 48000);
  MfccSequence seq = compute_mfcc(clip, config);
  Eigen::VectorXd mid1 = seq.frames.row(10);
  Eigen::VectorXd mid2 = seq.frames.row(20);
  CHECK((mid1 - mid2).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("scaling the waveform shifts only the zeroth coefficient") {
  // log energies shift by a constant under gain; the orthonormal DCT maps a
  // constant onto coefficient zero, so higher coefficients are untouched.
  MfccConfig config;
  AudioClip clip = sine_clip(2500.0, 0.3, 30000, 48000);
  AudioClip loud = clip;
  for (double& v : loud.channels[0]) v *= 4.0;
  MfccSequence soft_seq = compute_mfcc(clip, config);
  MfccSequence loud_seq = compute_mfcc(loud, config);
  // The tone dominates the floor in every band it touches... at bands the
  // tone misses, energy sits at the floor and does not scale. So compare
  // only c1..: their change is far smaller than c0's.
  double c0_shift = std::fabs(loud_seq.frames(5, 0) - soft_seq.frames(5, 0));
  double rest_shift = 0.0;
  for (int k = 1; k < 21; ++k)
    rest_shift = std::max(
        rest_shift, std::fabs(loud_seq.frames(5, k) - soft_seq.frames(5, k)));
  CHECK(c0_shift > 1.0);
  CHECK(rest_shift < c0_shift);
}

TEST_CASE("config validation and digests") {
  MfccConfig config;
  CHECK_NOTHROW(config.validate(48000));
  CHECK(config.window_samples(48000) == 1440);
  CHECK(config.step_samples(48000) == 720);
  CHECK(config.resolved_fft_size(48000) == 2048);
  CHECK(config.resolved_fmax(48000) == 24000.0);

  MfccConfig bad = config;
  bad.n_coeffs = 80;  // more coefficients than mel filters
  CHECK_THROWS_AS(bad.validate(48000), InvalidConfig);
  bad = config;
  bad.step_ms = 0.0;
  CHECK_THROWS_AS(bad.validate(48000), InvalidConfig);
  bad = config;
  bad.fft_size = 1000;  // not a power of two
  CHECK_THROWS_AS(bad.validate(48000), InvalidConfig);

  MfccConfig other = config;
  other.n_coeffs = 27;
  CHECK(config.digest(48000) != other.digest(48000));
  CHECK(config.digest(48000) != config.digest(44100));
  CHECK(feature_digest(config, 48000, ChannelPolicy::kMix) !=
        feature_digest(config, 48000, ChannelPolicy::kStack));
}

TEST_CASE("channel policies drive feature width") {
  MfccConfig config;
  Rng rng(5);
  std::vector<double> left(30000), right(30000);
  for (auto& v : left) v = 0.3 * rng.uniform(-1.0, 1.0);
  for (auto& v : right) v = 0.3 * rng.uniform(-1.0, 1.0);
  AudioClip clip = AudioClip::stereo(left, right, 48000);

  MfccSequence mixed = extract_features(clip, config, ChannelPolicy::kMix);
  CHECK(mixed.n_coeffs() == 21);
  MfccSequence stacked = extract_features(clip, config, ChannelPolicy::kStack);
  CHECK(stacked.n_coeffs() == 42);
  CHECK(stacked.n_frames() == mixed.n_frames());

  MfccSequence left_only = extract_features(clip, config, ChannelPolicy::kLeft);
  MfccSequence right_only =
      extract_features(clip, config, ChannelPolicy::kRight);
  // The stacked matrix is exactly [left | right].
  CHECK((stacked.frames.leftCols(21) - left_only.frames).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(
      (stacked.frames.rightCols(21) - right_only.frames).cwiseAbs().maxCoeff() ==
      0.0);
}

TEST_CASE("truncating coefficients equals computing fewer") {
  MfccConfig wide;
  wide.n_coeffs = 40;
  MfccConfig narrow;
  narrow.n_coeffs = 21;
  AudioClip clip = sine_clip(3000.0, 0.4, 30000, 48000);
  MfccSequence w = compute_mfcc(clip, wide);
  MfccSequence n = compute_mfcc(clip, narrow);
  CHECK((w.frames.leftCols(21) - n.frames).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("feature cache round trips and checks its digest") {
  std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "rattle_mfcc_test";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "clip.mfcc").string();

  MfccConfig config;
  AudioClip clip = sine_clip(1234.0, 0.4, 30000, 48000);
  MfccSequence seq = extract_features(clip, config, ChannelPolicy::kMix);
  const std::uint64_t digest =
      feature_digest(config, 48000, ChannelPolicy::kMix);
  save_features(seq, digest, path);

  MfccSequence loaded = load_features(path, digest);
  CHECK((loaded.frames - seq.frames).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(loaded.frame_times.size() == seq.frame_times.size());
  CHECK(loaded.frame_times[7] == seq.frame_times[7]);

  CHECK_THROWS_AS(load_features(path, digest + 1), InvalidConfig);
  std::filesystem::remove_all(dir);
}

TEST_CASE("clip shorter than one window is rejected") {
  MfccConfig config;
  AudioClip tiny = AudioClip::mono(std::vector<double>(100, 0.1), 48000);
  CHECK_THROWS_AS(compute_mfcc(tiny, config), ClipTooShort);
}
