// rattle/synth.h

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

#include "rattle/audio.h"

namespace rattle::synth {

// Deterministic granular-impact synthesis of "capsule shake" recordings:
// a capsule filled with some material is shaken at roughly 1 Hz, and each
// deceleration makes the fill grains rattle against the shell. Impacts are
// modelled as exponentially decaying band-passed noise whose band, decay and
// per-grain loudness come from a per-material profile.

struct MaterialProfile {
  std::string name;
  double grain_mass = 0.0;          // grams per grain
  double impact_center_freq = 0.0;  // Hz
  double impact_bandwidth = 0.0;    // Hz
  double decay_ms = 0.0;            // impact envelope time constant
  double amplitude_per_gram = 0.0;  // relative loudness scale

  void validate() const;  // throws InvalidSpec
};

// The ten material classes, alphabetical. Coarse heavy fills ring low and
// slow with few grains; fine fills hiss high and fast with many. Sand and
// sugar are deliberately near-twins so the hardest class pair survives the
// move to synthetic audio.
const std::vector<MaterialProfile>& default_materials();

// Per-material fill masses in grams, three capsules each, aligned with
// default_materials(). Mean over all 30 entries ≈ 13.9 g.
const std::vector<std::vector<double>>& default_weights();

enum class Procedure { kA, kB };

char procedure_code(Procedure p);
Procedure procedure_from_code(char c);

struct CapsuleSpec {
  MaterialProfile material;
  double fill_mass = 0.0;  // grams
  Procedure procedure = Procedure::kA;
  double shake_freq_hz = 1.0;

  void validate() const;  // throws InvalidSpec
};

struct GeneratorConfig {
  int sample_rate = 48000;
  double clip_ms = 625.0;
  int takes_per_capsule = 36;    // split evenly across procedures A and B
  double noise_floor_db = -40.0; // background white-noise level, dBFS
  bool servo_hum = true;         // motor-like tonal component in the floor
  int prototypes_per_clip = 8;   // distinct grain waveforms rendered per clip

  std::uint64_t digest() const;
  void validate() const;  // throws InvalidSpec
};

// Renders one stereo shake clip. Procedure A shakes through two
// decelerations inside the window; procedure B lands a single harder one.
// Deterministic in (capsule, config, seed); the output is peak-normalized.
AudioClip synth_shake_clip(const CapsuleSpec& capsule,
                           const GeneratorConfig& config, std::uint64_t seed);

// The same render before peak normalization, for level analysis.
AudioClip synth_shake_clip_raw(const CapsuleSpec& capsule,
                               const GeneratorConfig& config,
                               std::uint64_t seed);

// Interference sources for robustness experiments. All are stereo,
// peak-normalized and deterministic in the seed.
enum class NoiseKind { kWhite, kPink, kBrown, kBabble, kHum, kTraffic };

const std::vector<NoiseKind>& all_noise_kinds();
std::string to_string(NoiseKind k);

AudioClip synth_noise_clip(NoiseKind kind, double duration_ms, int rate,
                           std::uint64_t seed);

struct ManifestEntry {
  std::string path;        // WAV file, relative to the manifest's directory
  std::string label;       // material name
  double weight_grams = 0.0;
  std::string capsule_id;  // e.g. "coins_2" (material + fill level 1..3)
  char procedure = 'A';
  int take = 0;            // take index within the capsule, 0-based
  std::uint64_t seed = 0;  // per-clip stream seed
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t config_digest = 0;
  std::uint64_t seed = 0;
  int sample_rate = 48000;
  double clip_ms = 625.0;

  std::size_t size() const { return entries.size(); }
};

// Writes every capsule/take combination to out_dir as WAV plus a manifest
// object. Per-clip seeds are derived from the master seed and the entry's
// (capsule, take) coordinates, so any generation order — including parallel
// generation with `jobs` workers — produces identical files.
DatasetManifest generate_dataset(const std::vector<MaterialProfile>& materials,
                                 const std::vector<std::vector<double>>& weights,
                                 int takes_per_capsule,
                                 const std::string& out_dir, std::uint64_t seed,
                                 const GeneratorConfig& config = {},
                                 int jobs = 1);

void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Index of `label` in default_materials() order; throws InvalidSpec for an
// unknown label.
int material_index(const std::string& label);

}  // namespace rattle::synth
