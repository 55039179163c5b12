// test_synth.cc

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
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <vector>

#include "rattle/error.h"
#include "rattle/mfcc.h"
#include "rattle/rng.h"
#include "rattle/synth.h"
#include "rattle/wav.h"

using namespace rattle;

namespace {

double clip_peak(const AudioClip& clip) {
  double peak = 0.0;
  for (const auto& ch : clip.channels)
    for (double v : ch) peak = std::max(peak, std::fabs(v));
  return peak;
}

double clip_rms(const AudioClip& clip) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ch : clip.channels) {
    for (double v : ch) sum += v * v;
    count += ch.size();
  }
  return std::sqrt(sum / static_cast<double>(count));
}

bool clips_equal(const AudioClip& a, const AudioClip& b) {
  if (a.sample_rate != b.sample_rate) return false;
  if (a.channels != b.channels) return false;
  return true;
}

synth::CapsuleSpec capsule_for(int material, double fill,
                               synth::Procedure proc = synth::Procedure::kA) {
  synth::CapsuleSpec spec;
  spec.material = synth::default_materials()[material];
  spec.fill_mass = fill;
  spec.procedure = proc;
  return spec;
}

std::string temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("the material table is complete and alphabetical") {
  const auto& materials = synth::default_materials();
  REQUIRE(materials.size() == 10);
  const std::vector<std::string> expected = {
      "coins", "glass", "gravel", "herbs",   "nuts",
      "plastic", "rice", "sand",  "stone", "sugar"};
  for (std::size_t i = 0; i < materials.size(); ++i) {
    CHECK(materials[i].name == expected[i]);
    CHECK_NOTHROW(materials[i].validate());
    CHECK(synth::material_index(materials[i].name) == static_cast<int>(i));
  }
  CHECK_THROWS_AS(synth::material_index("velvet"), InvalidSpec);
}

TEST_CASE("the capsule weights transcribe the fill table") {
  const auto& weights = synth::default_weights();
  REQUIRE(weights.size() == 10);
  double total = 0.0;
  int count = 0;
  for (const auto& row : weights) {
    REQUIRE(row.size() == 3);
    // Three distinct, increasing fill levels per material.
    CHECK(row[0] < row[1]);
    CHECK(row[1] < row[2]);
    for (double w : row) {
      CHECK(w > 0.0);
      total += w;
      ++count;
    }
  }
  CHECK(count == 30);
  // The thirty fills sum to 418.2 g, i.e. a 13.94 g mean.
  CHECK(total == doctest::Approx(418.2).epsilon(1e-12));
  CHECK(total / count == doctest::Approx(418.2 / 30.0).epsilon(1e-12));
}

TEST_CASE("procedure codes round-trip") {
  CHECK(synth::procedure_code(synth::Procedure::kA) == 'A');
  CHECK(synth::procedure_code(synth::Procedure::kB) == 'B');
  CHECK(synth::procedure_from_code('A') == synth::Procedure::kA);
  CHECK(synth::procedure_from_code('B') == synth::Procedure::kB);
  CHECK_THROWS_AS(synth::procedure_from_code('C'), InvalidSpec);
}

TEST_CASE("profile and config validation reject nonsense") {
  synth::MaterialProfile p = synth::default_materials()[0];
  p.grain_mass = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidSpec);
  p = synth::default_materials()[0];
  p.impact_center_freq = 30000.0;
  CHECK_THROWS_AS(p.validate(), InvalidSpec);
  p = synth::default_materials()[0];
  p.decay_ms = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidSpec);

  synth::CapsuleSpec spec = capsule_for(0, 20.7);
  CHECK_NOTHROW(spec.validate());
  spec.fill_mass = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);
  spec = capsule_for(0, 20.7);
  spec.shake_freq_hz = 0.0;
  CHECK_THROWS_AS(spec.validate(), InvalidSpec);

  synth::GeneratorConfig config;
  CHECK_NOTHROW(config.validate());
  config.clip_ms = 0.0;
  CHECK_THROWS_AS(config.validate(), InvalidSpec);
  config = {};
  config.takes_per_capsule = 0;
  CHECK_THROWS_AS(config.validate(), InvalidSpec);
}

TEST_CASE("shake clips have the recording-rig shape") {
  synth::GeneratorConfig config;
  for (synth::Procedure proc : {synth::Procedure::kA, synth::Procedure::kB}) {
    AudioClip clip = synth::synth_shake_clip(capsule_for(2, 20.4, proc),
                                             config, 77);
    CHECK(clip.sample_rate == 48000);
    CHECK(clip.num_channels() == 2);
    // 625 ms at 48 kHz.
    CHECK(clip.num_samples() == 30000);
    CHECK(clip_peak(clip) == 1.0);
  }
}

TEST_CASE("shake clips are deterministic in the seed") {
  synth::GeneratorConfig config;
  synth::CapsuleSpec spec = capsule_for(4, 20.1);
  AudioClip a = synth::synth_shake_clip(spec, config, 1234);
  AudioClip b = synth::synth_shake_clip(spec, config, 1234);
  AudioClip c = synth::synth_shake_clip(spec, config, 1235);
  CHECK(clips_equal(a, b));
  CHECK_FALSE(clips_equal(a, c));
}

TEST_CASE("the stereo channels are decorrelated but matched") {
  AudioClip clip =
      synth::synth_shake_clip(capsule_for(1, 12.6), {}, 99);
  REQUIRE(clip.num_channels() == 2);
  CHECK_FALSE(clip.channels[0] == clip.channels[1]);
  // Same scene in both ears: comparable energy.
  double rms_l = 0.0, rms_r = 0.0;
  for (double v : clip.channels[0]) rms_l += v * v;
  for (double v : clip.channels[1]) rms_r += v * v;
  rms_l = std::sqrt(rms_l / clip.num_samples());
  rms_r = std::sqrt(rms_r / clip.num_samples());
  CHECK(rms_l / rms_r > 0.5);
  CHECK(rms_l / rms_r < 2.0);
}

TEST_CASE("raw impact energy rises with the fill mass") {
  // More fill means more grains per deceleration, so the un-normalized
  // render carries more energy. This is the physical cue the weight
  // regressor has to find, so it must survive averaging over takes.
  const auto& weights = synth::default_weights();
  synth::GeneratorConfig config;
  for (int m = 0; m < 10; ++m) {
    CAPTURE(synth::default_materials()[m].name);
    std::vector<double> rms(3, 0.0);
    const int kTakes = 4;
    for (int f = 0; f < 3; ++f) {
      for (int take = 0; take < kTakes; ++take) {
        AudioClip raw = synth::synth_shake_clip_raw(
            capsule_for(m, weights[m][f]), config,
            derive_seed(17, {static_cast<std::uint64_t>(m),
                             static_cast<std::uint64_t>(f),
                             static_cast<std::uint64_t>(take)}));
        rms[f] += clip_rms(raw) / kTakes;
      }
    }
    CHECK(rms[0] < rms[1]);
    CHECK(rms[1] < rms[2]);
  }
}

TEST_CASE("every capsule's impacts clear the background floor") {
  const auto& weights = synth::default_weights();
  synth::GeneratorConfig config;
  const double floor_amp = std::pow(10.0, config.noise_floor_db / 20.0);
  for (int m = 0; m < 10; ++m) {
    for (int f = 0; f < 3; ++f) {
      for (synth::Procedure proc :
           {synth::Procedure::kA, synth::Procedure::kB}) {
        AudioClip raw = synth::synth_shake_clip_raw(
            capsule_for(m, weights[m][f], proc), config,
            derive_seed(18, {static_cast<std::uint64_t>(m * 3 + f),
                             proc == synth::Procedure::kA ? 0ull : 1ull}));
        CAPTURE(m);
        CAPTURE(f);
        CHECK(clip_peak(raw) > 3.0 * floor_amp);
      }
    }
  }
}

TEST_CASE("materials are spectrally separable with sand and sugar hardest") {
  // Mean MFCC vectors per material, a few takes each. Every pair must be
  // distinguishable, and the deliberately near-twin sand/sugar profiles
  // should be the closest pair in feature space.
  MfccConfig mfcc;
  const auto& weights = synth::default_weights();
  std::vector<Eigen::VectorXd> centroid(10);
  for (int m = 0; m < 10; ++m) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(mfcc.n_coeffs);
    int count = 0;
    for (int f = 0; f < 3; ++f) {
      for (int take = 0; take < 2; ++take) {
        AudioClip clip = synth::synth_shake_clip(
            capsule_for(m, weights[m][f]), {},
            derive_seed(19, {static_cast<std::uint64_t>(m * 3 + f),
                             static_cast<std::uint64_t>(take)}));
        MfccSequence seq = extract_features(clip, mfcc, ChannelPolicy::kMix);
        acc += seq.frames.colwise().mean().transpose();
        ++count;
      }
    }
    centroid[m] = acc / count;
  }

  const int kSand = synth::material_index("sand");
  const int kSugar = synth::material_index("sugar");
  double min_dist = 1e300;
  int min_a = -1, min_b = -1;
  for (int a = 0; a < 10; ++a) {
    for (int b = a + 1; b < 10; ++b) {
      double d = (centroid[a] - centroid[b]).norm();
      CHECK(d > 1e-6);  // no two classes collapse
      if (d < min_dist) {
        min_dist = d;
        min_a = a;
        min_b = b;
      }
    }
  }
  CHECK(min_a == kSand);
  CHECK(min_b == kSugar);
}

TEST_CASE("noise clips cover all kinds, normalized and deterministic") {
  REQUIRE(synth::all_noise_kinds().size() == 6);
  std::set<std::string> names;
  for (synth::NoiseKind kind : synth::all_noise_kinds()) {
    CAPTURE(synth::to_string(kind));
    names.insert(synth::to_string(kind));
    AudioClip a = synth::synth_noise_clip(kind, 625.0, 48000, 7);
    AudioClip b = synth::synth_noise_clip(kind, 625.0, 48000, 7);
    CHECK(a.num_channels() == 2);
    CHECK(a.num_samples() == 30000);
    CHECK(clip_peak(a) == 1.0);
    CHECK(clips_equal(a, b));
  }
  CHECK(names.size() == 6);
  CHECK_THROWS_AS(synth::synth_noise_clip(synth::NoiseKind::kWhite, 0.0, 48000, 1),
                  InvalidSpec);
  CHECK_THROWS_AS(synth::synth_noise_clip(synth::NoiseKind::kWhite, 625.0, 0, 1),
                  InvalidSpec);
}

TEST_CASE("different noise kinds produce different audio") {
  AudioClip white = synth::synth_noise_clip(synth::NoiseKind::kWhite, 100.0,
                                            48000, 7);
  AudioClip pink = synth::synth_noise_clip(synth::NoiseKind::kPink, 100.0,
                                           48000, 7);
  CHECK_FALSE(clips_equal(white, pink));
}

TEST_CASE("generate_dataset writes every capsule and take") {
  const std::string dir = temp_dir("rattle_test_gen");
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[0], synth::default_materials()[1]};
  std::vector<std::vector<double>> weights = {{5.0, 10.0}, {3.0}};
  synth::GeneratorConfig config;
  config.takes_per_capsule = 2;  // the digest describes the effective config

  synth::DatasetManifest manifest =
      synth::generate_dataset(materials, weights, 2, dir, 42, config);
  REQUIRE(manifest.size() == 6);  // (2 + 1) capsules x 2 takes
  CHECK(manifest.seed == 42);
  CHECK(manifest.config_digest == config.digest());

  std::set<std::string> capsule_ids;
  for (const synth::ManifestEntry& entry : manifest.entries) {
    capsule_ids.insert(entry.capsule_id);
    // Two takes split one A, one B.
    CHECK(entry.procedure == (entry.take == 0 ? 'A' : 'B'));
    CHECK(entry.path == entry.capsule_id + "_" + entry.procedure + "_" +
                            std::to_string(entry.take) + ".wav");
    AudioClip clip = load_wav(dir + "/" + entry.path);
    CHECK(clip.sample_rate == 48000);
    CHECK(clip.num_channels() == 2);
    CHECK(clip.num_samples() == 30000);
    // Rendering the entry's seed directly reproduces the file's content.
    synth::CapsuleSpec spec;
    spec.material = materials[entry.label == "coins" ? 0 : 1];
    spec.fill_mass = entry.weight_grams;
    spec.procedure = synth::procedure_from_code(entry.procedure);
    AudioClip expected = synth::synth_shake_clip(spec, config, entry.seed);
    // The WAV round trip quantizes to 16 bits.
    for (int ch = 0; ch < 2; ++ch)
      for (int i = 0; i < clip.num_samples(); ++i)
        CHECK(std::fabs(clip.channels[ch][i] - expected.channels[ch][i]) <=
              1.0 / 32768.0);
  }
  CHECK(capsule_ids ==
        std::set<std::string>{"coins_1", "coins_2", "glass_1"});
  std::filesystem::remove_all(dir);
}

TEST_CASE("parallel generation produces identical files") {
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[3], synth::default_materials()[7]};
  std::vector<std::vector<double>> weights = {{1.0, 2.0}, {8.0}};
  const std::string dir1 = temp_dir("rattle_test_gen_serial");
  const std::string dir2 = temp_dir("rattle_test_gen_parallel");
  synth::DatasetManifest m1 =
      synth::generate_dataset(materials, weights, 3, dir1, 7, {}, 1);
  synth::DatasetManifest m2 =
      synth::generate_dataset(materials, weights, 3, dir2, 7, {}, 4);
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1.entries[i].path == m2.entries[i].path);
    CHECK(m1.entries[i].seed == m2.entries[i].seed);
    std::ifstream f1(dir1 + "/" + m1.entries[i].path, std::ios::binary);
    std::ifstream f2(dir2 + "/" + m2.entries[i].path, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)),
                   std::istreambuf_iterator<char>());
    std::string b2((std::istreambuf_iterator<char>(f2)),
                   std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    CHECK_FALSE(b1.empty());
  }
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("a single take lands on procedure A") {
  const std::string dir = temp_dir("rattle_test_gen_single");
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[5]};
  synth::DatasetManifest manifest =
      synth::generate_dataset(materials, {{3.4}}, 1, dir, 11);
  REQUIRE(manifest.size() == 1);
  CHECK(manifest.entries[0].procedure == 'A');
  CHECK(manifest.entries[0].take == 0);
  CHECK(manifest.entries[0].capsule_id == "plastic_1");
  std::filesystem::remove_all(dir);
}

TEST_CASE("the take split favors procedure A for odd counts") {
  const std::string dir = temp_dir("rattle_test_gen_odd");
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[6]};
  synth::DatasetManifest manifest =
      synth::generate_dataset(materials, {{9.0}}, 5, dir, 13);
  REQUIRE(manifest.size() == 5);
  int a_count = 0;
  for (const auto& entry : manifest.entries)
    if (entry.procedure == 'A') ++a_count;
  CHECK(a_count == 3);
  // A takes come first.
  CHECK(manifest.entries[0].procedure == 'A');
  CHECK(manifest.entries[4].procedure == 'B');
  std::filesystem::remove_all(dir);
}

TEST_CASE("manifests round-trip through JSON") {
  const std::string dir = temp_dir("rattle_test_manifest");
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[8]};
  synth::DatasetManifest manifest =
      synth::generate_dataset(materials, {{4.5, 7.3}}, 2, dir, 21);
  const std::string path = dir + "/manifest.json";
  synth::save_manifest(manifest, path);
  synth::DatasetManifest loaded = synth::load_manifest(path);
  CHECK(loaded.seed == manifest.seed);
  CHECK(loaded.config_digest == manifest.config_digest);
  CHECK(loaded.sample_rate == manifest.sample_rate);
  CHECK(loaded.clip_ms == manifest.clip_ms);
  REQUIRE(loaded.size() == manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    CHECK(loaded.entries[i].path == manifest.entries[i].path);
    CHECK(loaded.entries[i].label == manifest.entries[i].label);
    CHECK(loaded.entries[i].weight_grams == manifest.entries[i].weight_grams);
    CHECK(loaded.entries[i].capsule_id == manifest.entries[i].capsule_id);
    CHECK(loaded.entries[i].procedure == manifest.entries[i].procedure);
    CHECK(loaded.entries[i].take == manifest.entries[i].take);
    CHECK(loaded.entries[i].seed == manifest.entries[i].seed);
  }

  std::ofstream(path, std::ios::trunc) << "not json";
  CHECK_THROWS_AS(synth::load_manifest(path), IoFailure);
  CHECK_THROWS_AS(synth::load_manifest(dir + "/missing.json"), IoFailure);
  std::filesystem::remove_all(dir);
}

TEST_CASE("generate_dataset validates its inputs") {
  const std::string dir = temp_dir("rattle_test_gen_bad");
  CHECK_THROWS_AS(synth::generate_dataset({}, {}, 2, dir, 1), InvalidSpec);
  std::vector<synth::MaterialProfile> materials = {
      synth::default_materials()[0]};
  CHECK_THROWS_AS(
      synth::generate_dataset(materials, {{1.0}, {2.0}}, 2, dir, 1),
      InvalidSpec);
  CHECK_THROWS_AS(synth::generate_dataset(materials, {{1.0}}, 0, dir, 1),
                  InvalidSpec);
  std::filesystem::remove_all(dir);
}
