// synth.cc

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

#include "rattle/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "rattle/error.h"
#include "rattle/rng.h"
#include "rattle/wav.h"

namespace rattle::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FNV-1a, matching the fingerprint style used for feature configs.
std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// One rendered impact waveform, peak-normalized so placements control level.
std::vector<double> render_grain_prototype(double center_hz, double bandwidth_hz,
                                           double decay_ms, int rate, Rng& rng) {
  const double tau = decay_ms / 1000.0;  // seconds
  int length = std::max(48, static_cast<int>(std::lround(6.0 * tau * rate)));
  length = std::min(length, rate / 4);  // cap pathological decays at 250 ms

  // Second-order all-pole resonator driven by enveloped white noise:
  //   y[n] = 2 r cos(theta) y[n-1] - r^2 y[n-2] + x[n].
  const double theta = 2.0 * kPi * center_hz / rate;
  const double r = std::exp(-kPi * bandwidth_hz / rate);
  const double a1 = 2.0 * r * std::cos(theta);
  const double a2 = -r * r;
  std::vector<double> grain(length, 0.0);
  double y1 = 0.0, y2 = 0.0;
  for (int n = 0; n < length; ++n) {
    double env = std::exp(-n / (tau * rate));
    double x = rng.uniform(-1.0, 1.0) * env;
    double y = a1 * y1 + a2 * y2 + x;
    grain[n] = y;
    y2 = y1;
    y1 = y;
  }
  double peak = 0.0;
  for (double v : grain) peak = std::max(peak, std::fabs(v));
  if (peak > 0.0)
    for (double& v : grain) v /= peak;
  return grain;
}

void add_scaled(std::vector<double>& dest, const std::vector<double>& src,
                int offset, double scale) {
  if (offset >= static_cast<int>(dest.size())) return;
  int start = std::max(0, -offset);
  int stop = std::min(static_cast<int>(src.size()),
                      static_cast<int>(dest.size()) - offset);
  for (int i = start; i < stop; ++i) dest[offset + i] += scale * src[i];
}

struct GrainEvent {
  int onset;        // left-channel onset, samples
  int proto;        // prototype index
  double amp;       // left-channel amplitude
  int right_shift;  // extra right-channel onset delay, samples
  double right_amp; // right-channel amplitude
};

}  // namespace

void MaterialProfile::validate() const {
  if (name.empty()) throw InvalidSpec("material profile needs a name");
  if (grain_mass <= 0.0) throw InvalidSpec(name + ": grain_mass must be > 0");
  if (impact_center_freq < 20.0 || impact_center_freq > 20000.0)
    throw InvalidSpec(name + ": impact_center_freq outside [20, 20000] Hz");
  if (impact_bandwidth <= 0.0)
    throw InvalidSpec(name + ": impact_bandwidth must be > 0");
  if (decay_ms <= 0.0) throw InvalidSpec(name + ": decay_ms must be > 0");
  if (amplitude_per_gram <= 0.0)
    throw InvalidSpec(name + ": amplitude_per_gram must be > 0");
}

const std::vector<MaterialProfile>& default_materials() {
  // name, grain g, center Hz, bandwidth Hz, decay ms, amplitude/g.
  // Sand and sugar differ only marginally; everything else is well spread
  // over the band so the class structure mirrors one hard pair among easy
  // classes.
  static const std::vector<MaterialProfile> kMaterials = {
      {"coins",   5.0,    2600.0, 300.0,  60.0, 0.050},
      {"glass",   2.0,    4200.0, 500.0,  45.0, 0.090},
      {"gravel",  2.5,    1200.0, 900.0,  18.0, 0.070},
      {"herbs",   0.02,   7800.0, 2500.0,  6.0, 3.0},
      {"nuts",    1.2,     900.0, 400.0,  30.0, 0.130},
      {"plastic", 0.4,    3300.0, 1400.0, 10.0, 0.450},
      {"rice",    0.03,   5200.0, 1800.0,  4.0, 2.2},
      {"sand",    0.004,  6300.0, 3000.0,  2.5, 11.0},
      {"stone",   2.2,     600.0, 250.0,  40.0, 0.080},
      {"sugar",   0.0045, 6500.0, 3100.0,  2.3, 10.5},
  };
  return kMaterials;
}

const std::vector<std::vector<double>>& default_weights() {
  static const std::vector<std::vector<double>> kWeights = {
      {20.7, 39.1, 61.8},  // coins
      {6.3, 12.6, 18.9},   // glass
      {10.4, 20.4, 29.9},  // gravel
      {1.0, 2.0, 3.0},     // herbs
      {9.9, 20.1, 30.1},   // nuts
      {1.7, 3.4, 5.2},     // plastic
      {4.5, 9.0, 13.5},    // rice
      {8.0, 16.0, 24.1},   // sand
      {4.5, 7.3, 10.8},    // stone
      {4.0, 8.0, 12.0},    // sugar
  };
  return kWeights;
}

char procedure_code(Procedure p) { return p == Procedure::kA ? 'A' : 'B'; }

Procedure procedure_from_code(char c) {
  if (c == 'A') return Procedure::kA;
  if (c == 'B') return Procedure::kB;
  throw InvalidSpec(std::string("unknown procedure code: ") + c);
}

void CapsuleSpec::validate() const {
  material.validate();
  if (fill_mass <= 0.0) throw InvalidSpec("fill_mass must be > 0");
  if (shake_freq_hz <= 0.0) throw InvalidSpec("shake_freq_hz must be > 0");
}

std::uint64_t GeneratorConfig::digest() const {
  std::string canon = "rate:" + std::to_string(sample_rate) +
                      ";clip_ms:" + std::to_string(clip_ms) +
                      ";takes:" + std::to_string(takes_per_capsule) +
                      ";floor_db:" + std::to_string(noise_floor_db) +
                      ";hum:" + std::to_string(servo_hum ? 1 : 0) +
                      ";protos:" + std::to_string(prototypes_per_clip);
  return fnv1a(canon);
}

void GeneratorConfig::validate() const {
  if (sample_rate <= 0) throw InvalidSpec("sample_rate must be > 0");
  if (clip_ms <= 0.0) throw InvalidSpec("clip_ms must be > 0");
  if (takes_per_capsule <= 0) throw InvalidSpec("takes_per_capsule must be > 0");
  if (prototypes_per_clip <= 0)
    throw InvalidSpec("prototypes_per_clip must be > 0");
}

AudioClip synth_shake_clip_raw(const CapsuleSpec& capsule,
                               const GeneratorConfig& config,
                               std::uint64_t seed) {
  capsule.validate();
  config.validate();
  const int rate = config.sample_rate;
  const auto n =
      static_cast<int>(std::llround(config.clip_ms / 1000.0 * rate));
  Rng rng(seed);

  // Per-take physical variation: no two shakes excite the capsule equally.
  const MaterialProfile& mat = capsule.material;
  const double center = mat.impact_center_freq * (1.0 + rng.uniform(-0.04, 0.04));
  const double bandwidth = mat.impact_bandwidth * (1.0 + rng.uniform(-0.10, 0.10));
  const double decay = mat.decay_ms * (1.0 + rng.uniform(-0.15, 0.15));

  std::vector<std::vector<double>> protos(config.prototypes_per_clip);
  for (auto& p : protos)
    p = render_grain_prototype(center, bandwidth, decay, rate, rng);

  // Deceleration times inside the window. Procedure A catches two direction
  // changes of the ~1 Hz shake; procedure B lands one harder hit mid-clip.
  const double half_period = 0.5 / capsule.shake_freq_hz;
  std::vector<std::pair<double, double>> bursts;  // (onset seconds, intensity)
  if (capsule.procedure == Procedure::kA) {
    bursts.push_back({0.10, 1.0});
    bursts.push_back({0.10 + std::min(half_period, 0.42), 0.9});
  } else {
    bursts.push_back({0.26, 1.35});
  }

  const int grains_per_burst =
      std::max(1, static_cast<int>(std::lround(capsule.fill_mass / mat.grain_mass)));
  // Heavier fills keep rattling longer after the shell stops.
  const double spread_s =
      std::min(0.160, 0.035 + 0.014 * std::sqrt(capsule.fill_mass));

  std::vector<double> left(n, 0.0), right(n, 0.0);
  for (const auto& [burst_time, intensity] : bursts) {
    const double onset_jitter = rng.uniform(-0.020, 0.020);
    const double t0 = burst_time + onset_jitter;
    for (int g = 0; g < grains_per_burst; ++g) {
      GrainEvent ev;
      // Impacts bunch just after the deceleration and thin out.
      double u = rng.uniform();
      ev.onset = static_cast<int>(std::lround((t0 + spread_s * u * u) * rate));
      ev.proto = rng.uniform_int(config.prototypes_per_clip);
      ev.amp = mat.amplitude_per_gram * mat.grain_mass * intensity *
               rng.uniform(0.6, 1.4);
      ev.right_shift = rng.uniform_int(49) - 24;  // within ±0.5 ms
      ev.right_amp = ev.amp * rng.uniform(0.92, 1.08);
      add_scaled(left, protos[ev.proto], ev.onset, ev.amp);
      add_scaled(right, protos[ev.proto], ev.onset + ev.right_shift,
                 ev.right_amp);
    }
  }

  // Background: broadband floor, independent per channel, plus an optional
  // motor-like tonal hum shared by both.
  const double floor_amp = std::pow(10.0, config.noise_floor_db / 20.0);
  for (int i = 0; i < n; ++i) left[i] += floor_amp * rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i) right[i] += floor_amp * rng.uniform(-1.0, 1.0);
  if (config.servo_hum) {
    const double hum_f = 120.0 * (1.0 + rng.uniform(-0.01, 0.01));
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double hum_amp = 0.4 * floor_amp;
    for (int i = 0; i < n; ++i) {
      double t = static_cast<double>(i) / rate;
      double s = hum_amp * (std::sin(2.0 * kPi * hum_f * t + phase) +
                            0.5 * std::sin(2.0 * kPi * 2.0 * hum_f * t + phase) +
                            0.25 * std::sin(2.0 * kPi * 3.0 * hum_f * t + phase));
      left[i] += s;
      right[i] += s;
    }
  }
  return AudioClip::stereo(std::move(left), std::move(right), rate);
}

AudioClip synth_shake_clip(const CapsuleSpec& capsule,
                           const GeneratorConfig& config, std::uint64_t seed) {
  return normalize_peak(synth_shake_clip_raw(capsule, config, seed));
}

const std::vector<NoiseKind>& all_noise_kinds() {
  static const std::vector<NoiseKind> kKinds = {
      NoiseKind::kWhite, NoiseKind::kPink,  NoiseKind::kBrown,
      NoiseKind::kBabble, NoiseKind::kHum,  NoiseKind::kTraffic};
  return kKinds;
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::kWhite: return "white";
    case NoiseKind::kPink: return "pink";
    case NoiseKind::kBrown: return "brown";
    case NoiseKind::kBabble: return "babble";
    case NoiseKind::kHum: return "hum";
    case NoiseKind::kTraffic: return "traffic";
  }
  throw InvalidSpec("unknown noise kind");
}

namespace {

std::vector<double> render_noise_channel(NoiseKind kind, int n, int rate,
                                         Rng& rng) {
  std::vector<double> out(n, 0.0);
  switch (kind) {
    case NoiseKind::kWhite: {
      for (int i = 0; i < n; ++i) out[i] = rng.uniform(-1.0, 1.0);
      break;
    }
    case NoiseKind::kPink: {
      // Paul Kellet's economy pink filter over white noise.
      double b0 = 0, b1 = 0, b2 = 0;
      for (int i = 0; i < n; ++i) {
        double w = rng.uniform(-1.0, 1.0);
        b0 = 0.99765 * b0 + w * 0.0990460;
        b1 = 0.96300 * b1 + w * 0.2965164;
        b2 = 0.57000 * b2 + w * 1.0526913;
        out[i] = b0 + b1 + b2 + w * 0.1848;
      }
      break;
    }
    case NoiseKind::kBrown: {
      double y = 0.0;
      for (int i = 0; i < n; ++i) {
        y = 0.999 * y + 0.05 * rng.uniform(-1.0, 1.0);
        out[i] = y;
      }
      break;
    }
    case NoiseKind::kBabble: {
      // Speech-band noise with two formant-style resonances and
      // syllable-rate amplitude modulation. The upper formant keeps real
      // energy in the kilohertz region where rattle impacts live.
      const double theta_lo = 2.0 * kPi * 700.0 / rate;
      const double r_lo = std::exp(-kPi * 500.0 / rate);
      const double a1_lo = 2.0 * r_lo * std::cos(theta_lo), a2_lo = -r_lo * r_lo;
      const double theta_hi = 2.0 * kPi * 2400.0 / rate;
      const double r_hi = std::exp(-kPi * 900.0 / rate);
      const double a1_hi = 2.0 * r_hi * std::cos(theta_hi), a2_hi = -r_hi * r_hi;
      double lo1 = 0, lo2 = 0, hi1 = 0, hi2 = 0;
      const double mod_f = rng.uniform(3.0, 5.0);
      const double mod_phase = rng.uniform(0.0, 2.0 * kPi);
      for (int i = 0; i < n; ++i) {
        double lo = a1_lo * lo1 + a2_lo * lo2 + rng.uniform(-1.0, 1.0);
        lo2 = lo1;
        lo1 = lo;
        double hi = a1_hi * hi1 + a2_hi * hi2 + rng.uniform(-1.0, 1.0);
        hi2 = hi1;
        hi1 = hi;
        double t = static_cast<double>(i) / rate;
        double am = 0.55 + 0.45 * std::sin(2.0 * kPi * mod_f * t + mod_phase);
        out[i] = (0.8 * lo + 1.8 * hi) * am;
      }
      break;
    }
    case NoiseKind::kHum: {
      const double phase = rng.uniform(0.0, 2.0 * kPi);
      for (int i = 0; i < n; ++i) {
        double t = static_cast<double>(i) / rate;
        out[i] = std::sin(2.0 * kPi * 50.0 * t + phase) +
                 0.5 * std::sin(2.0 * kPi * 100.0 * t + phase) +
                 0.35 * std::sin(2.0 * kPi * 150.0 * t + phase) +
                 0.15 * std::sin(2.0 * kPi * 250.0 * t + phase) +
                 0.02 * rng.uniform(-1.0, 1.0);
      }
      break;
    }
    case NoiseKind::kTraffic: {
      // Slow rumble plus broadband tire hiss, both under sub-hertz swells.
      const double theta = 2.0 * kPi * 4500.0 / rate;
      const double r = std::exp(-kPi * 3000.0 / rate);
      const double a1 = 2.0 * r * std::cos(theta), a2 = -r * r;
      double y = 0.0, h1 = 0, h2 = 0;
      const double swell_f = rng.uniform(0.15, 0.4);
      const double swell_phase = rng.uniform(0.0, 2.0 * kPi);
      for (int i = 0; i < n; ++i) {
        y = 0.9995 * y + 0.03 * rng.uniform(-1.0, 1.0);
        double h = a1 * h1 + a2 * h2 + rng.uniform(-1.0, 1.0);
        h2 = h1;
        h1 = h;
        double t = static_cast<double>(i) / rate;
        double swell =
            0.6 + 0.4 * std::sin(2.0 * kPi * swell_f * t + swell_phase);
        out[i] = (y + 0.65 * h) * swell;
      }
      break;
    }
  }
  return out;
}

}  // namespace

AudioClip synth_noise_clip(NoiseKind kind, double duration_ms, int rate,
                           std::uint64_t seed) {
  if (duration_ms <= 0.0) throw InvalidSpec("noise duration must be > 0");
  if (rate <= 0) throw InvalidSpec("sample rate must be > 0");
  const auto n = static_cast<int>(std::llround(duration_ms / 1000.0 * rate));
  Rng rng(seed);
  std::vector<double> left = render_noise_channel(kind, n, rate, rng);
  std::vector<double> right = render_noise_channel(kind, n, rate, rng);
  return normalize_peak(AudioClip::stereo(std::move(left), std::move(right), rate));
}

DatasetManifest generate_dataset(const std::vector<MaterialProfile>& materials,
                                 const std::vector<std::vector<double>>& weights,
                                 int takes_per_capsule,
                                 const std::string& out_dir, std::uint64_t seed,
                                 const GeneratorConfig& config, int jobs) {
  if (materials.empty()) throw InvalidSpec("no materials");
  if (weights.size() != materials.size())
    throw InvalidSpec("weights must align with materials");
  GeneratorConfig cfg = config;
  cfg.takes_per_capsule = takes_per_capsule;
  cfg.validate();
  std::filesystem::create_directories(out_dir);

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.config_digest = cfg.digest();
  manifest.sample_rate = cfg.sample_rate;
  manifest.clip_ms = cfg.clip_ms;

  std::vector<CapsuleSpec> capsules;  // parallel to manifest.entries
  std::size_t capsule_index = 0;      // running count across all materials
  for (std::size_t m = 0; m < materials.size(); ++m) {
    materials[m].validate();
    for (std::size_t f = 0; f < weights[m].size(); ++f, ++capsule_index) {
      const std::string capsule_id =
          materials[m].name + "_" + std::to_string(f + 1);
      for (int take = 0; take < takes_per_capsule; ++take) {
        CapsuleSpec spec;
        spec.material = materials[m];
        spec.fill_mass = weights[m][f];
        // First half of the takes on procedure A, second half on B.
        spec.procedure =
            (take < takes_per_capsule - takes_per_capsule / 2) ? Procedure::kA
                                                               : Procedure::kB;
        ManifestEntry entry;
        entry.label = materials[m].name;
        entry.weight_grams = spec.fill_mass;
        entry.capsule_id = capsule_id;
        entry.procedure = procedure_code(spec.procedure);
        entry.take = take;
        entry.seed = derive_seed(seed, {capsule_index, static_cast<std::uint64_t>(take)});
        entry.path = capsule_id + "_" + entry.procedure + "_" +
                     std::to_string(take) + ".wav";
        manifest.entries.push_back(std::move(entry));
        capsules.push_back(std::move(spec));
      }
    }
  }

  const std::size_t count = manifest.entries.size();
  const int workers = std::max(1, jobs);
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto render_range = [&](std::size_t begin, std::size_t end) {
    try {
      for (std::size_t i = begin; i < end; ++i) {
        AudioClip clip = synth_shake_clip(capsules[i], cfg,
                                          manifest.entries[i].seed);
        save_wav(clip, out_dir + "/" + manifest.entries[i].path);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };
  if (workers == 1) {
    render_range(0, count);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      std::size_t begin = std::min(count, w * chunk);
      std::size_t end = std::min(count, begin + chunk);
      if (begin < end) pool.emplace_back(render_range, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  nlohmann::json doc;
  doc["seed"] = manifest.seed;
  doc["config_digest"] = manifest.config_digest;
  doc["sample_rate"] = manifest.sample_rate;
  doc["clip_ms"] = manifest.clip_ms;
  nlohmann::json entries = nlohmann::json::array();
  for (const ManifestEntry& e : manifest.entries) {
    entries.push_back({{"path", e.path},
                       {"label", e.label},
                       {"weight_grams", e.weight_grams},
                       {"capsule_id", e.capsule_id},
                       {"procedure", std::string(1, e.procedure)},
                       {"take", e.take},
                       {"seed", e.seed}});
  }
  doc["entries"] = std::move(entries);
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << doc.dump(2) << "\n";
  if (!os) throw IoFailure("short write: " + path);
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoFailure("cannot open for reading: " + path);
  nlohmann::json doc;
  try {
    is >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoFailure("unparseable manifest " + path + ": " + e.what());
  }
  DatasetManifest manifest;
  manifest.seed = doc.at("seed").get<std::uint64_t>();
  manifest.config_digest = doc.at("config_digest").get<std::uint64_t>();
  manifest.sample_rate = doc.at("sample_rate").get<int>();
  manifest.clip_ms = doc.at("clip_ms").get<double>();
  for (const nlohmann::json& e : doc.at("entries")) {
    ManifestEntry entry;
    entry.path = e.at("path").get<std::string>();
    entry.label = e.at("label").get<std::string>();
    entry.weight_grams = e.at("weight_grams").get<double>();
    entry.capsule_id = e.at("capsule_id").get<std::string>();
    entry.procedure = e.at("procedure").get<std::string>().at(0);
    entry.take = e.at("take").get<int>();
    entry.seed = e.at("seed").get<std::uint64_t>();
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

int material_index(const std::string& label) {
  const auto& materials = default_materials();
  for (std::size_t i = 0; i < materials.size(); ++i)
    if (materials[i].name == label) return static_cast<int>(i);
  throw InvalidSpec("unknown material label: " + label);
}

}  // namespace rattle::synth
