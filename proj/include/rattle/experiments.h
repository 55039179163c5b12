// rattle/experiments.h

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
#include "rattle/mfcc.h"
#include "rattle/nn.h"
#include "rattle/synth.h"
#include "rattle/train.h"

namespace rattle::experiments {

// Experimental protocol: repeated random train/test splits, averaged
// confusion matrices, per-material weight error tables against a
// mean-predictor baseline, a noise-gain robustness sweep, and random
// hyperparameter search. Every run is a pure function of the master seed.

// Tags for deriving independent child seed streams from one master seed.
enum SeedStream : std::uint64_t {
  kSeedSplits = 1,
  kSeedClassify = 2,
  kSeedRegress = 3,
  kSeedNoise = 4,
  kSeedSearch = 5,
};

struct SplitPlan {
  int n_splits = 15;
  int n_test = 80;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> train_ids;  // per split, sorted
  std::vector<std::vector<int>> test_ids;   // per split, sorted
};

// Uniformly random disjoint train/test partitions; deterministic in seed.
// Throws TooFewSamples unless manifest size > n_test.
SplitPlan make_splits(const synth::DatasetManifest& manifest, int n_splits,
                      int n_test, std::uint64_t seed);

// All features for one corpus, in manifest order, held in memory so the
// repeated splits never recompute them.
struct FeatureSet {
  std::vector<Eigen::MatrixXd> features;  // per entry: frames x coefficients
  std::vector<int> labels;                // material index, alphabetical
  std::vector<double> weights;            // grams
  std::uint64_t digest = 0;

  int width() const {
    return features.empty() ? 0 : static_cast<int>(features.front().cols());
  }
  std::size_t size() const { return features.size(); }
};

// Loads every clip, conforms it, optionally overlays noise at `noise_gain`
// (pairing each entry with a noise clip drawn from `noise` by a stream keyed
// on pairing_seed and the entry index — the pairing is gain-independent),
// then extracts features. gain 0 bypasses mixing entirely, so its features
// are bit-identical to the clean ones.
FeatureSet prepare_features(const synth::DatasetManifest& manifest,
                            const std::string& data_dir,
                            const MfccConfig& config, ChannelPolicy channels,
                            const std::vector<AudioClip>* noise,
                            double noise_gain, std::uint64_t pairing_seed,
                            int jobs);

// Everything one protocol run needs besides the data itself. The master
// seed fixes splits, initialization, shuffling, and noise pairing.
struct ProtocolConfig {
  MfccConfig classify_mfcc;               // n_coeffs 21 by default
  MfccConfig regress_mfcc;                // n_coeffs 27 by default
  std::vector<nn::LayerSpec> classify_spec;
  std::vector<nn::LayerSpec> regress_spec;
  train::TrainConfig train_config;        // per-split seeds are derived
  ChannelPolicy channels = ChannelPolicy::kMix;
  int jobs = 1;
  std::uint64_t seed = 0;
};

// Published configuration: GRU 491/99 with 21 coefficients for material
// classification, LSTM 376/69 with 27 for weighing, 15 splits.
ProtocolConfig full_protocol(std::uint64_t seed);
// Reduced models (GRU 64/16 and LSTM 64/16) and 3 splits for fast runs.
ProtocolConfig desk_protocol(std::uint64_t seed);

int protocol_splits(bool desk_scale);  // 15, or 3 at desk scale

struct ConfusionMatrix {
  Eigen::MatrixXd matrix;       // 10x10, mean of per-split row-normalized
  Eigen::VectorXd support;      // true-class counts pooled over splits
  double overall_accuracy = 0;  // mean of per-split accuracies
  std::vector<double> per_split_accuracy;
};

struct RegressionReport {
  std::vector<std::string> materials;
  std::vector<double> mae;          // grams, pooled across splits
  std::vector<double> percent;      // mae / mean material weight x 100
  std::vector<double> mean_weight;  // corpus mean weight per material
  double overall_mae = 0;           // pooled over all test predictions
  double overall_percent = 0;       // mean of per-material percents
  double baseline_mae = 0;          // mean-predictor on the same splits
  std::vector<double> per_split_mae;
};

// Trains one classifier per split and averages row-normalized confusions.
ConfusionMatrix run_classification(const FeatureSet& features,
                                   const SplitPlan& splits,
                                   const ProtocolConfig& protocol);

// Trains one regressor per split. Targets are standardized by the training
// split's mean and deviation; predictions are mapped back to grams before
// any error is measured.
RegressionReport run_regression(const FeatureSet& features,
                                const SplitPlan& splits,
                                const ProtocolConfig& protocol);

// Always-predict-the-training-mean reference: test MAE averaged over splits.
double mean_baseline(const std::vector<double>& targets,
                     const SplitPlan& splits);

// Percent-error table arithmetic, shared by reports and tests:
// column = mae / mean_weight * 100.
std::vector<double> percent_errors(const std::vector<double>& mae,
                                   const std::vector<double>& mean_weight);

struct SweepPoint {
  double gain = 0;
  double accuracy = 0;
  double mae = 0;
};

struct NoiseSweepResult {
  std::vector<SweepPoint> points;  // gain ascending from 0
};

// One gain setting: overlay, re-extract features, rerun both experiments.
// Noise clips must be peak-normalized and at least one clip long; an empty
// list throws NoNoiseClips.
SweepPoint run_noise_point(const synth::DatasetManifest& manifest,
                           const std::string& data_dir, const SplitPlan& splits,
                           const std::vector<AudioClip>& noise, double gain,
                           const ProtocolConfig& protocol);

// Grid {0, step, 2 step, ... <= max_gain}. The gain-0 point uses the same
// derived seeds as the clean experiments and therefore matches them exactly.
NoiseSweepResult run_noise_sweep(const synth::DatasetManifest& manifest,
                                 const std::string& data_dir,
                                 const SplitPlan& splits,
                                 const std::vector<AudioClip>& noise,
                                 double max_gain, double step,
                                 const ProtocolConfig& protocol);

// The six stock interference sources, 2 s each, for run_noise_sweep.
std::vector<AudioClip> make_default_noise_set(int rate, std::uint64_t seed);

// Random hyperparameter search over cell kind, layer widths, coefficient
// count and learning rate, replacing model-based samplers for simplicity.
struct SearchSpace {
  std::vector<nn::LayerKind> cells = {nn::LayerKind::kSrn, nn::LayerKind::kLstm,
                                      nn::LayerKind::kGru};
  int layer1_min = 300, layer1_max = 700;
  int layer2_min = 50, layer2_max = 100;
  int coeffs_min = 13, coeffs_max = 40;
  double lr_min = 1e-4, lr_max = 1e-2;

  void validate() const;  // throws EmptySpace
  bool contains(nn::LayerKind cell, int units1, int units2, int n_coeffs,
                double learning_rate) const;
};

struct SearchTrial {
  nn::LayerKind cell = nn::LayerKind::kGru;
  int layer1 = 0;
  int layer2 = 0;
  int n_coeffs = 0;
  double learning_rate = 0;
  double val_loss = 0;
};

struct SearchResult {
  std::vector<SearchTrial> leaderboard;  // in sampling order
  SearchTrial best;                      // minimum validation loss
};

// Samples `budget` configurations uniformly, trains each on the plan's
// first split only (the reduced evaluation), and returns the best by
// validation loss. `features` must be at least coeffs_max wide: trials take
// leading-coefficient slices, which equal direct extraction at that width.
SearchResult random_search(const FeatureSet& features, const SplitPlan& splits,
                           bool classify, const SearchSpace& space, int budget,
                           const train::TrainConfig& base_config,
                           std::uint64_t seed);

// Report files. All numbers are written with fixed %.6f formatting so
// identical runs produce identical bytes.
void write_confusion_csv(const ConfusionMatrix& cm,
                         const std::vector<std::string>& labels,
                         const std::string& path);
void write_regression_csv(const RegressionReport& report,
                          const std::string& path);
void write_sweep_csv(const NoiseSweepResult& result, const std::string& path);
void write_summary_json(const ConfusionMatrix* cm,
                        const RegressionReport* report,
                        const NoiseSweepResult* sweep, std::uint64_t seed,
                        const std::string& path);
void write_train_log_csv(const train::TrainHistory& history,
                         const std::string& path);

}  // namespace rattle::experiments
