// experiments.cc

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

#include "rattle/experiments.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>

#include "json.hpp"
#include "rattle/error.h"
#include "rattle/rng.h"
#include "rattle/wav.h"

namespace rattle::experiments {

namespace {

// Runs fn(0..n-1) across up to `jobs` workers. Work items only write their
// own slot of pre-sized result vectors, so the outcome does not depend on
// scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int num_classes() {
  return static_cast<int>(synth::default_materials().size());
}

std::vector<nn::LabeledSequence> gather(const FeatureSet& fs,
                                        const std::vector<int>& ids,
                                        bool classify) {
  std::vector<nn::LabeledSequence> set;
  set.reserve(ids.size());
  for (int id : ids)
    set.push_back({&fs.features[id], classify
                                         ? static_cast<double>(fs.labels[id])
                                         : fs.weights[id]});
  return set;
}

int argmax(const Eigen::VectorXd& v) {
  Eigen::Index idx = 0;
  v.maxCoeff(&idx);
  return static_cast<int>(idx);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string format_gain(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void check_noise_preconditions(const std::vector<AudioClip>& noise,
                               const synth::DatasetManifest& manifest) {
  if (noise.empty()) throw NoNoiseClips("noise clip list is empty");
  const auto min_samples = static_cast<std::size_t>(
      std::llround(manifest.clip_ms / 1000.0 * manifest.sample_rate));
  for (const AudioClip& clip : noise) {
    clip.validate();
    if (clip.sample_rate != manifest.sample_rate)
      throw RateMismatch("noise clip rate differs from the corpus rate");
    if (clip.num_samples() < min_samples)
      throw InvalidConfig("noise clip shorter than one corpus clip");
    if (std::fabs(clip.peak() - 1.0) > 1e-6)
      throw InvalidConfig("noise clips must be peak-normalized");
  }
}

}  // namespace

SplitPlan make_splits(const synth::DatasetManifest& manifest, int n_splits,
                      int n_test, std::uint64_t seed) {
  const int n = static_cast<int>(manifest.size());
  if (n_splits <= 0) throw InvalidConfig("n_splits must be positive");
  if (n_test <= 0) throw InvalidConfig("n_test must be positive");
  if (n <= n_test)
    throw TooFewSamples("need more than " + std::to_string(n_test) +
                        " manifest entries, have " + std::to_string(n));
  SplitPlan plan;
  plan.n_splits = n_splits;
  plan.n_test = n_test;
  plan.seed = seed;
  for (int s = 0; s < n_splits; ++s) {
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(derive_seed(seed, {kSeedSplits, static_cast<std::uint64_t>(s)}));
    rng.shuffle(ids);
    std::vector<int> test(ids.begin(), ids.begin() + n_test);
    std::vector<int> train(ids.begin() + n_test, ids.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    plan.test_ids.push_back(std::move(test));
    plan.train_ids.push_back(std::move(train));
  }
  return plan;
}

FeatureSet prepare_features(const synth::DatasetManifest& manifest,
                            const std::string& data_dir,
                            const MfccConfig& config, ChannelPolicy channels,
                            const std::vector<AudioClip>* noise,
                            double noise_gain, std::uint64_t pairing_seed,
                            int jobs) {
  if (manifest.entries.empty()) throw EmptyDataset("manifest has no entries");
  const bool mixing = noise != nullptr && noise_gain > 0.0;
  if (mixing) check_noise_preconditions(*noise, manifest);

  FeatureSet fs;
  fs.digest = feature_digest(config, manifest.sample_rate, channels);
  const int n = static_cast<int>(manifest.entries.size());
  fs.features.resize(n);
  fs.labels.resize(n);
  fs.weights.resize(n);
  parallel_for(n, jobs, [&](int i) {
    const synth::ManifestEntry& entry = manifest.entries[i];
    AudioClip clip = load_wav(data_dir + "/" + entry.path);
    clip = conform(clip, manifest.clip_ms, manifest.sample_rate);
    if (mixing) {
      const std::size_t pick =
          derive_seed(pairing_seed, {static_cast<std::uint64_t>(i)}) %
          noise->size();
      clip = mix_noise(clip, (*noise)[pick], noise_gain);
    }
    fs.features[i] = extract_features(clip, config, channels).frames;
    fs.labels[i] = synth::material_index(entry.label);
    fs.weights[i] = entry.weight_grams;
  });
  return fs;
}

ProtocolConfig full_protocol(std::uint64_t seed) {
  ProtocolConfig pc;
  pc.classify_mfcc.n_coeffs = 21;
  pc.regress_mfcc.n_coeffs = 27;
  pc.classify_spec = nn::make_spec(nn::LayerKind::kGru, 491, 99,
                                   nn::LayerKind::kDenseSoftmax, num_classes());
  pc.regress_spec = nn::make_spec(nn::LayerKind::kLstm, 376, 69,
                                  nn::LayerKind::kDenseLinear, 1);
  pc.seed = seed;
  return pc;
}

ProtocolConfig desk_protocol(std::uint64_t seed) {
  ProtocolConfig pc = full_protocol(seed);
  pc.classify_spec = nn::make_spec(nn::LayerKind::kGru, 64, 16,
                                   nn::LayerKind::kDenseSoftmax, num_classes());
  pc.regress_spec = nn::make_spec(nn::LayerKind::kLstm, 64, 16,
                                  nn::LayerKind::kDenseLinear, 1);
  pc.train_config.max_epochs = 60;
  return pc;
}

int protocol_splits(bool desk_scale) { return desk_scale ? 3 : 15; }

ConfusionMatrix run_classification(const FeatureSet& fs,
                                   const SplitPlan& splits,
                                   const ProtocolConfig& protocol) {
  const int k = num_classes();
  const int n_splits = splits.n_splits;
  std::vector<Eigen::MatrixXd> normalized(n_splits);
  std::vector<Eigen::VectorXd> supports(n_splits);
  std::vector<double> accuracies(n_splits);

  parallel_for(n_splits, protocol.jobs, [&](int s) {
    auto train_set = gather(fs, splits.train_ids[s], /*classify=*/true);
    auto test_set = gather(fs, splits.test_ids[s], /*classify=*/true);
    nn::NetworkModel model = nn::init_model(
        protocol.classify_spec, fs.width(),
        derive_seed(protocol.seed, {kSeedClassify, static_cast<std::uint64_t>(s), 0}));
    train::TrainConfig cfg = protocol.train_config;
    cfg.seed =
        derive_seed(protocol.seed, {kSeedClassify, static_cast<std::uint64_t>(s), 1});
    train::train(model, train_set, test_set, cfg);

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    int correct = 0;
    for (const nn::LabeledSequence& example : test_set) {
      const int truth = static_cast<int>(example.target);
      const int pred = argmax(nn::forward(model, *example.features));
      counts(truth, pred) += 1.0;
      if (pred == truth) ++correct;
    }
    Eigen::MatrixXd norm = Eigen::MatrixXd::Zero(k, k);
    for (int r = 0; r < k; ++r) {
      double row = counts.row(r).sum();
      if (row > 0.0) norm.row(r) = counts.row(r) / row;
    }
    normalized[s] = norm;
    supports[s] = counts.rowwise().sum();
    accuracies[s] =
        static_cast<double>(correct) / static_cast<double>(test_set.size());
  });

  ConfusionMatrix cm;
  cm.matrix = Eigen::MatrixXd::Zero(k, k);
  cm.support = Eigen::VectorXd::Zero(k);
  for (int s = 0; s < n_splits; ++s) {
    cm.matrix += normalized[s];
    cm.support += supports[s];
    cm.per_split_accuracy.push_back(accuracies[s]);
  }
  cm.matrix /= static_cast<double>(n_splits);
  cm.overall_accuracy =
      std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n_splits;
  return cm;
}

RegressionReport run_regression(const FeatureSet& fs, const SplitPlan& splits,
                                const ProtocolConfig& protocol) {
  const int k = num_classes();
  const int n_splits = splits.n_splits;
  // abs_errors[s] holds (material, |error| grams) per test prediction.
  std::vector<std::vector<std::pair<int, double>>> abs_errors(n_splits);

  parallel_for(n_splits, protocol.jobs, [&](int s) {
    auto train_set = gather(fs, splits.train_ids[s], /*classify=*/false);
    auto test_set = gather(fs, splits.test_ids[s], /*classify=*/false);

    // Standardize targets on the training split; grams come back out when
    // predictions are un-standardized below.
    double mean = 0.0;
    for (const auto& e : train_set) mean += e.target;
    mean /= static_cast<double>(train_set.size());
    double var = 0.0;
    for (const auto& e : train_set) var += (e.target - mean) * (e.target - mean);
    double stddev = std::sqrt(var / static_cast<double>(train_set.size()));
    if (stddev <= 0.0) stddev = 1.0;
    auto standardized = train_set;
    for (auto& e : standardized) e.target = (e.target - mean) / stddev;
    auto val = test_set;
    for (auto& e : val) e.target = (e.target - mean) / stddev;

    nn::NetworkModel model = nn::init_model(
        protocol.regress_spec, fs.width(),
        derive_seed(protocol.seed, {kSeedRegress, static_cast<std::uint64_t>(s), 0}));
    train::TrainConfig cfg = protocol.train_config;
    cfg.seed =
        derive_seed(protocol.seed, {kSeedRegress, static_cast<std::uint64_t>(s), 1});
    train::train(model, standardized, val, cfg);

    std::vector<std::pair<int, double>> errors;
    errors.reserve(test_set.size());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      const int id = splits.test_ids[s][i];
      double z = nn::forward(model, *test_set[i].features)(0);
      double grams = z * stddev + mean;
      errors.push_back({fs.labels[id], std::fabs(grams - test_set[i].target)});
    }
    abs_errors[s] = std::move(errors);
  });

  RegressionReport report;
  for (const auto& m : synth::default_materials()) report.materials.push_back(m.name);
  std::vector<double> err_sum(k, 0.0);
  std::vector<int> err_count(k, 0);
  double pooled_sum = 0.0;
  int pooled_count = 0;
  for (int s = 0; s < n_splits; ++s) {
    double split_sum = 0.0;
    for (const auto& [material, err] : abs_errors[s]) {
      err_sum[material] += err;
      err_count[material] += 1;
      pooled_sum += err;
      ++pooled_count;
      split_sum += err;
    }
    report.per_split_mae.push_back(split_sum /
                                   static_cast<double>(abs_errors[s].size()));
  }
  std::vector<double> weight_sum(k, 0.0);
  std::vector<int> weight_count(k, 0);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    weight_sum[fs.labels[i]] += fs.weights[i];
    weight_count[fs.labels[i]] += 1;
  }
  for (int m = 0; m < k; ++m) {
    report.mae.push_back(err_count[m] > 0 ? err_sum[m] / err_count[m] : 0.0);
    report.mean_weight.push_back(
        weight_count[m] > 0 ? weight_sum[m] / weight_count[m] : 0.0);
  }
  // Materials absent from the corpus report zero; the overall percent
  // averages only the materials that actually have samples.
  report.percent.assign(k, 0.0);
  double percent_sum = 0.0;
  int present = 0;
  for (int m = 0; m < k; ++m) {
    if (weight_count[m] > 0 && report.mean_weight[m] > 0.0) {
      report.percent[m] = report.mae[m] / report.mean_weight[m] * 100.0;
      percent_sum += report.percent[m];
      ++present;
    }
  }
  report.overall_mae = pooled_count > 0 ? pooled_sum / pooled_count : 0.0;
  report.overall_percent = present > 0 ? percent_sum / present : 0.0;
  report.baseline_mae = mean_baseline(fs.weights, splits);
  return report;
}

double mean_baseline(const std::vector<double>& targets,
                     const SplitPlan& splits) {
  if (targets.empty()) throw EmptyDataset("no targets");
  double total = 0.0;
  for (int s = 0; s < splits.n_splits; ++s) {
    double mean = 0.0;
    for (int id : splits.train_ids[s]) mean += targets[id];
    mean /= static_cast<double>(splits.train_ids[s].size());
    double mae = 0.0;
    for (int id : splits.test_ids[s]) mae += std::fabs(targets[id] - mean);
    total += mae / static_cast<double>(splits.test_ids[s].size());
  }
  return total / static_cast<double>(splits.n_splits);
}

std::vector<double> percent_errors(const std::vector<double>& mae,
                                   const std::vector<double>& mean_weight) {
  if (mae.size() != mean_weight.size())
    throw ShapeMismatch("percent_errors: column lengths differ");
  std::vector<double> out;
  out.reserve(mae.size());
  for (std::size_t i = 0; i < mae.size(); ++i) {
    if (mean_weight[i] <= 0.0)
      throw InvalidConfig("percent_errors: mean weight must be positive");
    out.push_back(mae[i] / mean_weight[i] * 100.0);
  }
  return out;
}

SweepPoint run_noise_point(const synth::DatasetManifest& manifest,
                           const std::string& data_dir, const SplitPlan& splits,
                           const std::vector<AudioClip>& noise, double gain,
                           const ProtocolConfig& protocol) {
  check_noise_preconditions(noise, manifest);
  const std::uint64_t pairing = derive_seed(protocol.seed, {kSeedNoise});
  FeatureSet cf = prepare_features(manifest, data_dir, protocol.classify_mfcc,
                                   protocol.channels, &noise, gain, pairing,
                                   protocol.jobs);
  FeatureSet rf = prepare_features(manifest, data_dir, protocol.regress_mfcc,
                                   protocol.channels, &noise, gain, pairing,
                                   protocol.jobs);
  SweepPoint point;
  point.gain = gain;
  point.accuracy = run_classification(cf, splits, protocol).overall_accuracy;
  point.mae = run_regression(rf, splits, protocol).overall_mae;
  return point;
}

NoiseSweepResult run_noise_sweep(const synth::DatasetManifest& manifest,
                                 const std::string& data_dir,
                                 const SplitPlan& splits,
                                 const std::vector<AudioClip>& noise,
                                 double max_gain, double step,
                                 const ProtocolConfig& protocol) {
  if (step <= 0.0) throw InvalidConfig("sweep step must be positive");
  if (max_gain < 0.0) throw InvalidConfig("sweep max gain must be >= 0");
  NoiseSweepResult result;
  for (int i = 0;; ++i) {
    double gain = i * step;
    if (gain > max_gain + 1e-9) break;
    result.points.push_back(
        run_noise_point(manifest, data_dir, splits, noise, gain, protocol));
  }
  return result;
}

std::vector<AudioClip> make_default_noise_set(int rate, std::uint64_t seed) {
  std::vector<AudioClip> noise;
  std::uint64_t k = 0;
  for (synth::NoiseKind kind : synth::all_noise_kinds()) {
    noise.push_back(synth::synth_noise_clip(
        kind, 2000.0, rate, derive_seed(seed, {kSeedNoise, 100, k})));
    ++k;
  }
  return noise;
}

void SearchSpace::validate() const {
  if (cells.empty() || layer1_min > layer1_max || layer2_min > layer2_max ||
      coeffs_min > coeffs_max || lr_min > lr_max || lr_min <= 0.0 ||
      layer1_min <= 0 || layer2_min <= 0 || coeffs_min <= 0)
    throw EmptySpace("hyperparameter space is empty or inverted");
}

bool SearchSpace::contains(nn::LayerKind cell, int units1, int units2,
                           int n_coeffs, double learning_rate) const {
  return std::find(cells.begin(), cells.end(), cell) != cells.end() &&
         units1 >= layer1_min && units1 <= layer1_max &&
         units2 >= layer2_min && units2 <= layer2_max &&
         n_coeffs >= coeffs_min && n_coeffs <= coeffs_max &&
         learning_rate >= lr_min && learning_rate <= lr_max;
}

SearchResult random_search(const FeatureSet& fs, const SplitPlan& splits,
                           bool classify, const SearchSpace& space, int budget,
                           const train::TrainConfig& base_config,
                           std::uint64_t seed) {
  space.validate();
  if (budget < 1) throw InvalidConfig("search budget must be >= 1");
  if (fs.width() < space.coeffs_max)
    throw InvalidConfig(
        "feature width must cover the space's coefficient maximum");
  if (splits.train_ids.empty()) throw TooFewSamples("empty split plan");

  Rng rng(derive_seed(seed, {kSeedSearch}));
  SearchResult result;
  for (int t = 0; t < budget; ++t) {
    SearchTrial trial;
    trial.cell = space.cells[rng.uniform_int(static_cast<int>(space.cells.size()))];
    trial.layer1 = space.layer1_min +
                   rng.uniform_int(space.layer1_max - space.layer1_min + 1);
    trial.layer2 = space.layer2_min +
                   rng.uniform_int(space.layer2_max - space.layer2_min + 1);
    trial.n_coeffs = space.coeffs_min +
                     rng.uniform_int(space.coeffs_max - space.coeffs_min + 1);
    trial.learning_rate =
        std::exp(rng.uniform(std::log(space.lr_min), std::log(space.lr_max)));

    // Reduced evaluation: first split only, leading-coefficient slice.
    std::vector<Eigen::MatrixXd> sliced;
    std::vector<nn::LabeledSequence> train_set, val_set;
    for (int id : splits.train_ids[0]) {
      sliced.push_back(fs.features[id].leftCols(trial.n_coeffs));
      train_set.push_back({nullptr, classify ? static_cast<double>(fs.labels[id])
                                             : fs.weights[id]});
    }
    for (int id : splits.test_ids[0]) {
      sliced.push_back(fs.features[id].leftCols(trial.n_coeffs));
      val_set.push_back({nullptr, classify ? static_cast<double>(fs.labels[id])
                                           : fs.weights[id]});
    }
    // Addresses are taken only after the slice vector stops growing.
    for (std::size_t i = 0; i < train_set.size(); ++i)
      train_set[i].features = &sliced[i];
    for (std::size_t i = 0; i < val_set.size(); ++i)
      val_set[i].features = &sliced[train_set.size() + i];

    double target_mean = 0.0, target_std = 1.0;
    if (!classify) {
      for (const auto& e : train_set) target_mean += e.target;
      target_mean /= static_cast<double>(train_set.size());
      double var = 0.0;
      for (const auto& e : train_set)
        var += (e.target - target_mean) * (e.target - target_mean);
      target_std = std::sqrt(var / static_cast<double>(train_set.size()));
      if (target_std <= 0.0) target_std = 1.0;
      for (auto& e : train_set) e.target = (e.target - target_mean) / target_std;
      for (auto& e : val_set) e.target = (e.target - target_mean) / target_std;
    }

    std::vector<nn::LayerSpec> spec =
        classify ? nn::make_spec(trial.cell, trial.layer1, trial.layer2,
                                 nn::LayerKind::kDenseSoftmax, num_classes())
                 : nn::make_spec(trial.cell, trial.layer1, trial.layer2,
                                 nn::LayerKind::kDenseLinear, 1);
    nn::NetworkModel model = nn::init_model(
        spec, trial.n_coeffs,
        derive_seed(seed, {kSeedSearch, static_cast<std::uint64_t>(t), 0}));
    train::TrainConfig cfg = base_config;
    cfg.learning_rate = trial.learning_rate;
    cfg.seed =
        derive_seed(seed, {kSeedSearch, static_cast<std::uint64_t>(t), 1});
    train::TrainHistory history = train::train(model, train_set, val_set, cfg);
    trial.val_loss = history.val_loss[history.best_epoch - 1];
    result.leaderboard.push_back(trial);
  }
  result.best = *std::min_element(
      result.leaderboard.begin(), result.leaderboard.end(),
      [](const SearchTrial& a, const SearchTrial& b) {
        return a.val_loss < b.val_loss;
      });
  return result;
}

void write_confusion_csv(const ConfusionMatrix& cm,
                         const std::vector<std::string>& labels,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "material";
  for (const std::string& label : labels) os << "," << label;
  os << "\n";
  for (Eigen::Index r = 0; r < cm.matrix.rows(); ++r) {
    os << labels[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < cm.matrix.cols(); ++c)
      os << "," << format_double(cm.matrix(r, c));
    os << "\n";
  }
  if (!os) throw IoFailure("short write: " + path);
}

void write_regression_csv(const RegressionReport& report,
                          const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "material,mae_g,percent,mean_weight_g\n";
  for (std::size_t m = 0; m < report.materials.size(); ++m)
    os << report.materials[m] << "," << format_double(report.mae[m]) << ","
       << format_double(report.percent[m]) << ","
       << format_double(report.mean_weight[m]) << "\n";
  const double corpus_mean =
      std::accumulate(report.mean_weight.begin(), report.mean_weight.end(),
                      0.0) /
      static_cast<double>(report.mean_weight.size());
  os << "overall," << format_double(report.overall_mae) << ","
     << format_double(report.overall_percent) << ","
     << format_double(corpus_mean) << "\n";
  os << "baseline," << format_double(report.baseline_mae) << ","
     << format_double(report.baseline_mae / corpus_mean * 100.0) << ","
     << format_double(corpus_mean) << "\n";
  if (!os) throw IoFailure("short write: " + path);
}

void write_sweep_csv(const NoiseSweepResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "gain,accuracy,mae\n";
  for (const SweepPoint& p : result.points)
    os << format_gain(p.gain) << "," << format_double(p.accuracy) << ","
       << format_double(p.mae) << "\n";
  if (!os) throw IoFailure("short write: " + path);
}

void write_summary_json(const ConfusionMatrix* cm,
                        const RegressionReport* report,
                        const NoiseSweepResult* sweep, std::uint64_t seed,
                        const std::string& path) {
  nlohmann::json doc;
  doc["seed"] = seed;
  if (cm != nullptr) {
    doc["classification"]["overall_accuracy"] = cm->overall_accuracy;
    doc["classification"]["per_split_accuracy"] = cm->per_split_accuracy;
  }
  if (report != nullptr) {
    doc["regression"]["overall_mae_g"] = report->overall_mae;
    doc["regression"]["baseline_mae_g"] = report->baseline_mae;
    doc["regression"]["per_split_mae_g"] = report->per_split_mae;
  }
  if (sweep != nullptr) {
    nlohmann::json points = nlohmann::json::array();
    for (const SweepPoint& p : sweep->points)
      points.push_back(
          {{"gain", p.gain}, {"accuracy", p.accuracy}, {"mae", p.mae}});
    doc["sweep"] = std::move(points);
  }
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << doc.dump(2) << "\n";
  if (!os) throw IoFailure("short write: " + path);
}

void write_train_log_csv(const train::TrainHistory& history,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os << "epoch,train_loss,val_loss,seconds\n";
  for (std::size_t e = 0; e < history.train_loss.size(); ++e)
    os << (e + 1) << "," << format_double(history.train_loss[e]) << ","
       << format_double(history.val_loss[e]) << ","
       << format_double(history.seconds[e]) << "\n";
  if (!os) throw IoFailure("short write: " + path);
}

}  // namespace rattle::experiments
