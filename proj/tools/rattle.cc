// rattle.cc

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

// Command-line front end: generate a synthetic corpus, extract features,
// train and evaluate models, run the noise-robustness sweep and the random
// hyperparameter search. Settings resolve as defaults <- config file <-
// flags, and every subcommand echoes its resolved configuration into the
// output directory so a run can be reproduced from that file alone.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rattle/error.h"
#include "rattle/experiments.h"
#include "rattle/mfcc.h"
#include "rattle/rng.h"
#include "rattle/synth.h"
#include "rattle/wav.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

json default_config(bool desk_scale) {
  json j;
  j["seed"] = 0;
  j["jobs"] = 1;
  j["task"] = "classify";
  j["channels"] = "mix";
  j["desk_scale"] = desk_scale;
  j["takes_per_capsule"] = desk_scale ? 9 : 36;
  j["n_splits"] = rattle::experiments::protocol_splits(desk_scale);
  j["n_test"] = 80;
  j["noise_max"] = 0.5;
  j["noise_step"] = 0.05;
  j["budget"] = 8;
  j["mfcc"] = {{"window_ms", 30.0},  {"step_ms", 15.0},
               {"n_mel_filters", 40}, {"fft_size", 0},
               {"log_floor", 1e-10},  {"window", "hamming"},
               {"fmin_hz", 0.0},      {"fmax_hz", 0.0},
               {"n_coeffs_classify", 21}, {"n_coeffs_weigh", 27}};
  j["train"] = {{"batch_size", 16},
                {"max_epochs", desk_scale ? 60 : 200},
                {"patience", 2},
                {"learning_rate", 1e-3},
                {"beta1", 0.9},
                {"beta2", 0.999},
                {"epsilon", 1e-8},
                {"clip_norm", 5.0}};
  auto spec_json = [](const std::vector<rattle::nn::LayerSpec>& spec) {
    json arr = json::array();
    for (const auto& layer : spec)
      arr.push_back({{"kind", rattle::nn::to_string(layer.kind)},
                     {"units", layer.units}});
    return arr;
  };
  rattle::experiments::ProtocolConfig pc =
      desk_scale ? rattle::experiments::desk_protocol(0)
                 : rattle::experiments::full_protocol(0);
  j["classify_spec"] = spec_json(pc.classify_spec);
  j["regress_spec"] = spec_json(pc.regress_spec);
  return j;
}

// Flags that were actually passed override the config file, which overrides
// the defaults.
struct FlagValues {
  std::string config_path;
  std::string data = "data";
  std::string out = "out";
  std::string model;
  std::string task;
  std::string channels;
  std::uint64_t seed = 0;
  int jobs = 0;
  int takes = 0;
  int budget = 0;
  double noise_max = -1.0;
  double noise_step = -1.0;
  bool desk_scale = false;
};

// count() that tolerates options registered on other subcommands only.
std::size_t flag_count(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt == nullptr ? 0 : opt->count();
}

json resolve_config(const CLI::App* cmd, const FlagValues& flags) {
  json from_file = json::object();
  if (!flags.config_path.empty()) {
    std::ifstream is(flags.config_path);
    if (!is) throw rattle::InvalidConfig("cannot read config file: " + flags.config_path);
    try {
      is >> from_file;
    } catch (const json::exception& e) {
      throw rattle::InvalidConfig(std::string("unparseable config file: ") + e.what());
    }
  }
  bool desk = flags.desk_scale;
  if (flag_count(cmd, "--desk-scale") == 0 && from_file.contains("desk_scale"))
    desk = from_file["desk_scale"].get<bool>();
  json cfg = default_config(desk);
  cfg.update(from_file, /*merge_objects=*/true);
  cfg["desk_scale"] = desk;

  if (flag_count(cmd, "--seed")) cfg["seed"] = flags.seed;
  if (flag_count(cmd, "--jobs")) cfg["jobs"] = flags.jobs;
  if (flag_count(cmd, "--task")) cfg["task"] = flags.task;
  if (flag_count(cmd, "--channels")) cfg["channels"] = flags.channels;
  if (flag_count(cmd, "--takes")) cfg["takes_per_capsule"] = flags.takes;
  if (flag_count(cmd, "--budget")) cfg["budget"] = flags.budget;
  if (flag_count(cmd, "--noise-max")) cfg["noise_max"] = flags.noise_max;
  if (flag_count(cmd, "--noise-step")) cfg["noise_step"] = flags.noise_step;
  cfg["data"] = flags.data;
  cfg["out"] = flags.out;
  if (!flags.model.empty()) cfg["model"] = flags.model;

  if (cfg["task"] != "classify" && cfg["task"] != "weigh")
    throw rattle::InvalidConfig("task must be 'classify' or 'weigh'");
  if (cfg["jobs"].get<int>() < 1)
    throw rattle::InvalidConfig("--jobs must be >= 1");
  return cfg;
}

rattle::MfccConfig mfcc_from_config(const json& cfg, const std::string& task) {
  const json& m = cfg.at("mfcc");
  rattle::MfccConfig out;
  out.window_ms = m.at("window_ms").get<double>();
  out.step_ms = m.at("step_ms").get<double>();
  out.n_mel_filters = m.at("n_mel_filters").get<int>();
  out.fft_size = m.at("fft_size").get<int>();
  out.log_floor = m.at("log_floor").get<double>();
  out.window = rattle::window_function_from_string(m.at("window").get<std::string>());
  out.fmin_hz = m.at("fmin_hz").get<double>();
  out.fmax_hz = m.at("fmax_hz").get<double>();
  out.n_coeffs = task == "classify" ? m.at("n_coeffs_classify").get<int>()
                                    : m.at("n_coeffs_weigh").get<int>();
  return out;
}

std::vector<rattle::nn::LayerSpec> spec_from_config(const json& cfg,
                                                    const std::string& key) {
  std::vector<rattle::nn::LayerSpec> spec;
  for (const json& layer : cfg.at(key))
    spec.push_back({rattle::nn::layer_kind_from_string(
                        layer.at("kind").get<std::string>()),
                    layer.at("units").get<int>()});
  return spec;
}

rattle::train::TrainConfig train_from_config(const json& cfg) {
  const json& t = cfg.at("train");
  rattle::train::TrainConfig out;
  out.batch_size = t.at("batch_size").get<int>();
  out.max_epochs = t.at("max_epochs").get<int>();
  out.patience = t.at("patience").get<int>();
  out.learning_rate = t.at("learning_rate").get<double>();
  out.beta1 = t.at("beta1").get<double>();
  out.beta2 = t.at("beta2").get<double>();
  out.epsilon = t.at("epsilon").get<double>();
  out.clip_norm = t.at("clip_norm").get<double>();
  return out;
}

rattle::experiments::ProtocolConfig protocol_from_config(const json& cfg) {
  rattle::experiments::ProtocolConfig pc;
  pc.classify_mfcc = mfcc_from_config(cfg, "classify");
  pc.regress_mfcc = mfcc_from_config(cfg, "weigh");
  pc.classify_spec = spec_from_config(cfg, "classify_spec");
  pc.regress_spec = spec_from_config(cfg, "regress_spec");
  pc.train_config = train_from_config(cfg);
  pc.channels = rattle::channel_policy_from_string(cfg.at("channels").get<std::string>());
  pc.jobs = cfg.at("jobs").get<int>();
  pc.seed = cfg.at("seed").get<std::uint64_t>();
  return pc;
}

void echo_config(const json& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream os(out_dir + "/config.json");
  if (!os) throw rattle::IoFailure("cannot write " + out_dir + "/config.json");
  os << cfg.dump(2) << "\n";
}

rattle::synth::DatasetManifest load_data_manifest(const std::string& data_dir) {
  return rattle::synth::load_manifest(data_dir + "/manifest.json");
}

int cmd_generate(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  echo_config(cfg, out);
  rattle::synth::GeneratorConfig gen;
  gen.takes_per_capsule = cfg.at("takes_per_capsule").get<int>();
  auto manifest = rattle::synth::generate_dataset(
      rattle::synth::default_materials(), rattle::synth::default_weights(),
      gen.takes_per_capsule, out, cfg.at("seed").get<std::uint64_t>(), gen,
      cfg.at("jobs").get<int>());
  rattle::synth::save_manifest(manifest, out + "/manifest.json");
  std::printf("wrote %zu clips and manifest to %s\n", manifest.size(),
              out.c_str());
  return kExitOk;
}

int cmd_features(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  echo_config(cfg, out);
  auto manifest = load_data_manifest(data);
  auto mfcc = mfcc_from_config(cfg, cfg.at("task").get<std::string>());
  auto policy = rattle::channel_policy_from_string(cfg.at("channels").get<std::string>());
  const std::uint64_t digest =
      rattle::feature_digest(mfcc, manifest.sample_rate, policy);
  for (const auto& entry : manifest.entries) {
    rattle::AudioClip clip = rattle::load_wav(data + "/" + entry.path);
    clip = rattle::conform(clip, manifest.clip_ms, manifest.sample_rate);
    auto seq = rattle::extract_features(clip, mfcc, policy);
    std::string name = entry.path.substr(0, entry.path.rfind('.')) + ".mfcc";
    rattle::save_features(seq, digest, out + "/" + name);
  }
  std::printf("wrote %zu feature files to %s\n", manifest.size(), out.c_str());
  return kExitOk;
}

int cmd_train(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  const std::string task = cfg.at("task").get<std::string>();
  const bool classify = task == "classify";
  echo_config(cfg, out);

  auto manifest = load_data_manifest(data);
  auto pc = protocol_from_config(cfg);
  auto splits = rattle::experiments::make_splits(
      manifest, cfg.at("n_splits").get<int>(), cfg.at("n_test").get<int>(),
      pc.seed);
  auto mfcc = classify ? pc.classify_mfcc : pc.regress_mfcc;
  auto fs = rattle::experiments::prepare_features(
      manifest, data, mfcc, pc.channels, nullptr, 0.0, 0, pc.jobs);

  // One model on the plan's first split; the repeated-split protocol lives
  // in `sweep` and in the library calls.
  std::vector<rattle::nn::LabeledSequence> train_set, val_set;
  for (int id : splits.train_ids[0])
    train_set.push_back({&fs.features[id],
                         classify ? static_cast<double>(fs.labels[id])
                                  : fs.weights[id]});
  for (int id : splits.test_ids[0])
    val_set.push_back({&fs.features[id],
                       classify ? static_cast<double>(fs.labels[id])
                                : fs.weights[id]});
  rattle::nn::CheckpointMeta meta;
  meta.feature_digest = fs.digest;
  if (!classify) {
    double mean = 0.0;
    for (const auto& e : train_set) mean += e.target;
    mean /= static_cast<double>(train_set.size());
    double var = 0.0;
    for (const auto& e : train_set) var += (e.target - mean) * (e.target - mean);
    double stddev = std::sqrt(var / static_cast<double>(train_set.size()));
    if (stddev <= 0.0) stddev = 1.0;
    for (auto& e : train_set) e.target = (e.target - mean) / stddev;
    for (auto& e : val_set) e.target = (e.target - mean) / stddev;
    meta.target_mean = mean;
    meta.target_std = stddev;
  }

  auto spec = classify ? pc.classify_spec : pc.regress_spec;
  auto model = rattle::nn::init_model(
      spec, fs.width(),
      rattle::derive_seed(pc.seed,
                          {classify ? rattle::experiments::kSeedClassify
                                    : rattle::experiments::kSeedRegress,
                           0, 0}));
  auto tc = pc.train_config;
  tc.seed = rattle::derive_seed(
      pc.seed, {classify ? rattle::experiments::kSeedClassify
                         : rattle::experiments::kSeedRegress,
                0, 1});
  tc.verbose = true;
  auto history = rattle::train::train(model, train_set, val_set, tc);
  rattle::nn::save_model(model, meta, out + "/model.ckpt");
  rattle::experiments::write_train_log_csv(history, out + "/train_log.csv");
  std::printf("best epoch %d, val loss %.6f; checkpoint at %s/model.ckpt\n",
              history.best_epoch, history.val_loss[history.best_epoch - 1],
              out.c_str());
  return kExitOk;
}

int cmd_eval(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  const std::string task = cfg.at("task").get<std::string>();
  const bool classify = task == "classify";
  if (!cfg.contains("model"))
    throw rattle::InvalidConfig("eval needs --model");
  echo_config(cfg, out);

  rattle::nn::CheckpointMeta meta;
  auto model = rattle::nn::load_model(cfg.at("model").get<std::string>(), &meta);
  auto manifest = load_data_manifest(data);
  auto pc = protocol_from_config(cfg);
  auto mfcc = classify ? pc.classify_mfcc : pc.regress_mfcc;
  auto fs = rattle::experiments::prepare_features(
      manifest, data, mfcc, pc.channels, nullptr, 0.0, 0, pc.jobs);
  if (fs.digest != meta.feature_digest)
    std::fprintf(stderr,
                 "warning: feature configuration differs from the one the "
                 "checkpoint was trained with\n");

  const auto& materials = rattle::synth::default_materials();
  if (classify) {
    const int k = static_cast<int>(materials.size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    int correct = 0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      Eigen::VectorXd probs = rattle::nn::forward(model, fs.features[i]);
      Eigen::Index pred = 0;
      probs.maxCoeff(&pred);
      counts(fs.labels[i], pred) += 1.0;
      if (static_cast<int>(pred) == fs.labels[i]) ++correct;
    }
    rattle::experiments::ConfusionMatrix cm;
    cm.matrix = Eigen::MatrixXd::Zero(k, k);
    for (int r = 0; r < k; ++r) {
      double row = counts.row(r).sum();
      if (row > 0.0) cm.matrix.row(r) = counts.row(r) / row;
    }
    cm.support = counts.rowwise().sum();
    cm.overall_accuracy = static_cast<double>(correct) / fs.size();
    cm.per_split_accuracy = {cm.overall_accuracy};
    std::vector<std::string> labels;
    for (const auto& m : materials) labels.push_back(m.name);
    rattle::experiments::write_confusion_csv(cm, labels, out + "/confusion.csv");
    rattle::experiments::write_summary_json(&cm, nullptr, nullptr,
                                            cfg.at("seed").get<std::uint64_t>(),
                                            out + "/summary.json");
    std::printf("accuracy %.4f over %zu clips\n", cm.overall_accuracy,
                fs.size());
  } else {
    double sum = 0.0;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      double z = rattle::nn::forward(model, fs.features[i])(0);
      double grams = z * meta.target_std + meta.target_mean;
      sum += std::fabs(grams - fs.weights[i]);
    }
    std::printf("mae %.4f g over %zu clips\n", sum / fs.size(), fs.size());
  }
  return kExitOk;
}

int cmd_sweep(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  echo_config(cfg, out);
  auto manifest = load_data_manifest(data);
  auto pc = protocol_from_config(cfg);
  auto splits = rattle::experiments::make_splits(
      manifest, cfg.at("n_splits").get<int>(), cfg.at("n_test").get<int>(),
      pc.seed);
  auto noise = rattle::experiments::make_default_noise_set(
      manifest.sample_rate, pc.seed);
  auto result = rattle::experiments::run_noise_sweep(
      manifest, data, splits, noise, cfg.at("noise_max").get<double>(),
      cfg.at("noise_step").get<double>(), pc);
  rattle::experiments::write_sweep_csv(result, out + "/sweep.csv");
  rattle::experiments::write_summary_json(nullptr, nullptr, &result,
                                          pc.seed, out + "/summary.json");
  std::printf("wrote %zu sweep points to %s/sweep.csv\n",
              result.points.size(), out.c_str());
  return kExitOk;
}

int cmd_search(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  const bool classify = cfg.at("task").get<std::string>() == "classify";
  echo_config(cfg, out);
  auto manifest = load_data_manifest(data);
  auto pc = protocol_from_config(cfg);
  auto splits = rattle::experiments::make_splits(
      manifest, cfg.at("n_splits").get<int>(), cfg.at("n_test").get<int>(),
      pc.seed);
  rattle::experiments::SearchSpace space;
  rattle::MfccConfig wide = pc.classify_mfcc;
  wide.n_coeffs = space.coeffs_max;
  auto fs = rattle::experiments::prepare_features(
      manifest, data, wide, pc.channels, nullptr, 0.0, 0, pc.jobs);
  auto result = rattle::experiments::random_search(
      fs, splits, classify, space, cfg.at("budget").get<int>(),
      pc.train_config, pc.seed);

  std::ofstream os(out + "/leaderboard.csv");
  if (!os) throw rattle::IoFailure("cannot write leaderboard.csv");
  os << "cell,layer1,layer2,n_coeffs,learning_rate,val_loss\n";
  for (const auto& t : result.leaderboard) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%d,%d,%d,%.8f,%.6f\n",
                  rattle::nn::to_string(t.cell).c_str(), t.layer1, t.layer2,
                  t.n_coeffs, t.learning_rate, t.val_loss);
    os << line;
  }
  json best;
  best["cell"] = rattle::nn::to_string(result.best.cell);
  best["layer1"] = result.best.layer1;
  best["layer2"] = result.best.layer2;
  best["n_coeffs"] = result.best.n_coeffs;
  best["learning_rate"] = result.best.learning_rate;
  best["val_loss"] = result.best.val_loss;
  std::ofstream bs(out + "/best.json");
  bs << best.dump(2) << "\n";
  std::printf("best: %s %d/%d, %d coeffs, lr %.2e, val loss %.6f\n",
              rattle::nn::to_string(result.best.cell).c_str(),
              result.best.layer1, result.best.layer2, result.best.n_coeffs,
              result.best.learning_rate, result.best.val_loss);
  return kExitOk;
}

int cmd_report(const json& cfg) {
  const std::string out = cfg.at("out").get<std::string>();
  const std::string data = cfg.at("data").get<std::string>();
  echo_config(cfg, out);
  std::ifstream is(data + "/sweep.csv");
  if (!is) throw rattle::IoFailure("cannot read " + data + "/sweep.csv");
  std::ofstream os(out + "/sweep.dat");
  if (!os) throw rattle::IoFailure("cannot write " + out + "/sweep.dat");
  std::string line;
  std::getline(is, line);  // header
  os << "# gain accuracy mae\n";
  while (std::getline(is, line)) {
    for (char& c : line)
      if (c == ',') c = ' ';
    os << line << "\n";
  }
  std::printf("wrote %s/sweep.dat\n", out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capsule-shake audio: synthesis, features, models, reports"};
  app.require_subcommand(1);

  FlagValues flags;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON configuration file");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--seed", flags.seed, "master seed");
    cmd->add_option("--jobs", flags.jobs, "worker threads");
    cmd->add_option("--task", flags.task, "classify or weigh");
    cmd->add_option("--channels", flags.channels, "mix, left, right or stack");
    cmd->add_flag("--desk-scale", flags.desk_scale,
                  "reduced protocol: 3 splits, small models");
    return cmd;
  };

  CLI::App* generate = add_common(app.add_subcommand(
      "generate", "synthesize the labeled corpus and manifest"));
  generate->add_option("--takes", flags.takes, "takes per capsule");
  CLI::App* features = add_common(app.add_subcommand(
      "features", "extract feature files for every manifest entry"));
  features->add_option("--data", flags.data, "corpus directory");
  CLI::App* train = add_common(
      app.add_subcommand("train", "train one model on the first split"));
  train->add_option("--data", flags.data, "corpus directory");
  CLI::App* eval = add_common(
      app.add_subcommand("eval", "evaluate a checkpoint over a corpus"));
  eval->add_option("--data", flags.data, "corpus directory");
  eval->add_option("--model", flags.model, "checkpoint path");
  CLI::App* sweep = add_common(
      app.add_subcommand("sweep", "noise-gain robustness sweep"));
  sweep->add_option("--data", flags.data, "corpus directory");
  sweep->add_option("--noise-max", flags.noise_max, "sweep ceiling");
  sweep->add_option("--noise-step", flags.noise_step, "sweep step");
  CLI::App* search = add_common(
      app.add_subcommand("search", "random hyperparameter search"));
  search->add_option("--data", flags.data, "corpus directory");
  search->add_option("--budget", flags.budget, "number of sampled configs");
  CLI::App* report = add_common(app.add_subcommand(
      "report", "rewrite sweep.csv as gnuplot-ready columns"));
  report->add_option("--data", flags.data, "run directory with sweep.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    json cfg = resolve_config(cmd, flags);
    if (cmd == generate) return cmd_generate(cfg);
    if (cmd == features) return cmd_features(cfg);
    if (cmd == train) return cmd_train(cfg);
    if (cmd == eval) return cmd_eval(cfg);
    if (cmd == sweep) return cmd_sweep(cfg);
    if (cmd == search) return cmd_search(cfg);
    if (cmd == report) return cmd_report(cfg);
    std::fprintf(stderr, "error: unknown subcommand\n");
    return kExitUsage;
  } catch (const rattle::InvalidConfig& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
