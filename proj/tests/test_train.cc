// test_train.cc

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

#include <algorithm>
#include <cmath>
#include <vector>

#include "rattle/error.h"
#include "rattle/nn.h"
#include "rattle/rng.h"
#include "rattle/train.h"

using namespace rattle;
using nn::LayerKind;

namespace {

// A two-class toy problem a small net can solve: class 0 frames hover near
// +1/2, class 1 frames near -1/2.
struct ToySet {
  std::vector<Eigen::MatrixXd> features;
  std::vector<nn::LabeledSequence> train_set;
  std::vector<nn::LabeledSequence> val_set;
};

ToySet make_toy(int n_train, int n_val, std::uint64_t seed) {
  ToySet toy;
  Rng rng(seed);
  const int total = n_train + n_val;
  toy.features.reserve(total);
  std::vector<double> targets;
  for (int i = 0; i < total; ++i) {
    const int label = i % 2;
    Eigen::MatrixXd f(6, 2);
    for (int t = 0; t < 6; ++t)
      for (int c = 0; c < 2; ++c)
        f(t, c) = (label == 0 ? 0.5 : -0.5) + 0.05 * rng.normal();
    toy.features.push_back(std::move(f));
    targets.push_back(label);
  }
  for (int i = 0; i < total; ++i) {
    nn::LabeledSequence ex{&toy.features[i], targets[i]};
    (i < n_train ? toy.train_set : toy.val_set).push_back(ex);
  }
  return toy;
}

std::vector<Eigen::MatrixXd> snapshot(const nn::NetworkModel& model) {
  std::vector<const Eigen::MatrixXd*> params;
  model.collect_params(params);
  std::vector<Eigen::MatrixXd> copy;
  for (const Eigen::MatrixXd* p : params) copy.push_back(*p);
  return copy;
}

bool equals_snapshot(const nn::NetworkModel& model,
                     const std::vector<Eigen::MatrixXd>& snap) {
  std::vector<const Eigen::MatrixXd*> params;
  model.collect_params(params);
  if (params.size() != snap.size()) return false;
  for (std::size_t i = 0; i < snap.size(); ++i)
    if ((params[i]->array() != snap[i].array()).any()) return false;
  return true;
}

}  // namespace

TEST_CASE("train config validation") {
  train::TrainConfig config;
  CHECK_NOTHROW(config.validate());
  auto broken = [&](auto mutate) {
    train::TrainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
  };
  broken([](train::TrainConfig& c) { c.batch_size = 0; });
  broken([](train::TrainConfig& c) { c.max_epochs = 0; });
  broken([](train::TrainConfig& c) { c.patience = 0; });
  broken([](train::TrainConfig& c) { c.learning_rate = 0.0; });
  broken([](train::TrainConfig& c) { c.beta1 = 1.0; });
  broken([](train::TrainConfig& c) { c.beta2 = -0.1; });
  broken([](train::TrainConfig& c) { c.epsilon = 0.0; });
}

TEST_CASE("a zero gradient leaves the parameters untouched") {
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kGru, 4, 3, LayerKind::kDenseSoftmax, 3), 2, 5);
  auto before = snapshot(model);
  train::TrainConfig config;
  train::AdamOptimizer opt(model, config);
  nn::NetworkModel grad = model.zeros_like();
  opt.step(model, grad);
  opt.step(model, grad);
  CHECK(opt.steps_taken() == 2);
  CHECK(equals_snapshot(model, before));
}

TEST_CASE("gradient clipping rescales onto the norm ceiling") {
  // Only the head bias carries gradient, so the first Adam update has the
  // closed form lr * c / (|c| + eps) where c is the (possibly clipped)
  // gradient value. A large epsilon makes the clipped and unclipped cases
  // give visibly different updates.
  auto spec = nn::make_spec(LayerKind::kSrn, 2, 2, LayerKind::kDenseLinear, 1);
  train::TrainConfig config;
  config.learning_rate = 0.1;
  config.epsilon = 1.0;

  auto run_step = [&](double grad_value, double clip) {
    auto model = nn::init_model(spec, 2, 1);
    model.set_zero();
    nn::NetworkModel grad = model.zeros_like();
    grad.head.bias(0, 0) = grad_value;
    train::TrainConfig c = config;
    c.clip_norm = clip;
    train::AdamOptimizer opt(model, c);
    opt.step(model, grad);
    return model.head.bias(0, 0);
  };

  // Norm 1000 against a ceiling of 5: the update sees exactly 5.
  CHECK(run_step(1000.0, 5.0) ==
        doctest::Approx(-0.1 * 5.0 / 6.0).epsilon(1e-12));
  // clip_norm <= 0 disables clipping entirely.
  CHECK(run_step(1000.0, 0.0) ==
        doctest::Approx(-0.1 * 1000.0 / 1001.0).epsilon(1e-12));
  // Gradients already inside the ceiling pass through unscaled.
  CHECK(run_step(3.0, 5.0) == doctest::Approx(-0.1 * 3.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("the optimizer rejects gradients with a foreign layout") {
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kGru, 4, 3, LayerKind::kDenseSoftmax, 3), 2, 5);
  auto other = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 4, 3, LayerKind::kDenseSoftmax, 3), 2, 5);
  train::TrainConfig config;
  train::AdamOptimizer opt(model, config);
  CHECK_THROWS_AS(opt.step(model, other.zeros_like()), ShapeMismatch);
}

TEST_CASE("early stopping fires after patience epochs without improvement") {
  // Scripted validation losses: 1.0, 0.9, 0.95, 0.97, then (never reached)
  // 0.5. Best is epoch 2; two consecutive non-improvements stop the run at
  // epoch 4 before the 0.5 would have rescued it.
  ToySet toy = make_toy(8, 4, 1);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 3, 2, LayerKind::kDenseSoftmax, 2), 2, 2);
  const std::vector<double> script = {1.0, 0.9, 0.95, 0.97, 0.5, 0.4};

  std::vector<std::vector<Eigen::MatrixXd>> per_epoch;
  train::TrainHooks hooks;
  hooks.val_loss_override = [&](int epoch, double) {
    return script[epoch - 1];
  };
  hooks.on_epoch = [&](int, double, double) { per_epoch.push_back(snapshot(model)); };

  train::TrainConfig config;
  config.max_epochs = 6;
  config.patience = 2;
  config.batch_size = 4;
  train::TrainHistory history =
      train::train(model, toy.train_set, toy.val_set, config, hooks);

  CHECK(history.epochs_run == 4);
  CHECK(history.best_epoch == 2);
  REQUIRE(history.val_loss.size() == 4);
  for (int e = 0; e < 4; ++e) CHECK(history.val_loss[e] == script[e]);
  CHECK(history.train_loss.size() == 4);
  CHECK(history.seconds.size() == 4);
  for (double s : history.seconds) CHECK(s >= 0.0);
  // The returned parameters are the epoch-2 weights, not the last ones.
  REQUIRE(per_epoch.size() == 4);
  CHECK(equals_snapshot(model, per_epoch[1]));
  CHECK_FALSE(equals_snapshot(model, per_epoch[3]));
}

TEST_CASE("patience one stops on the first stall") {
  ToySet toy = make_toy(8, 4, 3);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 3, 2, LayerKind::kDenseSoftmax, 2), 2, 4);
  train::TrainHooks hooks;
  hooks.val_loss_override = [](int epoch, double) {
    const double script[] = {1.0, 0.9, 0.95, 0.8};
    return script[epoch - 1];
  };
  train::TrainConfig config;
  config.max_epochs = 4;
  config.patience = 1;
  config.batch_size = 4;
  train::TrainHistory history =
      train::train(model, toy.train_set, toy.val_set, config, hooks);
  CHECK(history.epochs_run == 3);
  CHECK(history.best_epoch == 2);
}

TEST_CASE("an equal validation loss does not count as an improvement") {
  ToySet toy = make_toy(8, 4, 5);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 3, 2, LayerKind::kDenseSoftmax, 2), 2, 6);
  train::TrainHooks hooks;
  hooks.val_loss_override = [](int, double) { return 1.0; };
  train::TrainConfig config;
  config.max_epochs = 10;
  config.patience = 2;
  config.batch_size = 4;
  train::TrainHistory history =
      train::train(model, toy.train_set, toy.val_set, config, hooks);
  // Epoch 1 sets the best; the identical losses of epochs 2 and 3 stall out.
  CHECK(history.epochs_run == 3);
  CHECK(history.best_epoch == 1);
}

TEST_CASE("strictly improving validation loss runs to max_epochs") {
  ToySet toy = make_toy(8, 4, 7);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 3, 2, LayerKind::kDenseSoftmax, 2), 2, 8);
  train::TrainHooks hooks;
  hooks.val_loss_override = [](int epoch, double) { return 1.0 / epoch; };
  train::TrainConfig config;
  config.max_epochs = 7;
  config.batch_size = 4;
  train::TrainHistory history =
      train::train(model, toy.train_set, toy.val_set, config, hooks);
  CHECK(history.epochs_run == 7);
  CHECK(history.best_epoch == 7);
}

TEST_CASE("training is deterministic in the seed") {
  ToySet toy = make_toy(16, 6, 11);
  train::TrainConfig config;
  config.max_epochs = 5;
  config.patience = 5;
  config.batch_size = 4;
  config.seed = 99;

  auto run = [&]() {
    auto model = nn::init_model(
        nn::make_spec(LayerKind::kGru, 4, 3, LayerKind::kDenseSoftmax, 2), 2,
        12);
    train::TrainHistory history =
        train::train(model, toy.train_set, toy.val_set, config);
    return std::make_pair(snapshot(model), history);
  };
  auto [params_a, hist_a] = run();
  auto [params_b, hist_b] = run();
  REQUIRE(params_a.size() == params_b.size());
  for (std::size_t i = 0; i < params_a.size(); ++i)
    CHECK((params_a[i].array() == params_b[i].array()).all());
  CHECK(hist_a.train_loss == hist_b.train_loss);
  CHECK(hist_a.val_loss == hist_b.val_loss);
  CHECK(hist_a.best_epoch == hist_b.best_epoch);
}

TEST_CASE("training solves the toy problem and restores the best epoch") {
  ToySet toy = make_toy(24, 8, 21);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kGru, 6, 4, LayerKind::kDenseSoftmax, 2), 2, 22);
  const double initial_val = nn::evaluate_loss(model, toy.val_set);

  train::TrainConfig config;
  config.max_epochs = 30;
  config.patience = 5;
  config.batch_size = 8;
  config.learning_rate = 1e-2;
  config.seed = 23;
  train::TrainHistory history =
      train::train(model, toy.train_set, toy.val_set, config);

  const double best = *std::min_element(history.val_loss.begin(),
                                        history.val_loss.end());
  CHECK(history.val_loss[history.best_epoch - 1] == best);
  CHECK(best < initial_val);
  // The restored weights reproduce the recorded best loss exactly: the same
  // deterministic evaluation on the same parameters.
  CHECK(nn::evaluate_loss(model, toy.val_set) == best);

  int correct = 0;
  for (const nn::LabeledSequence& ex : toy.val_set) {
    Eigen::VectorXd probs = nn::forward(model, *ex.features);
    int arg = 0;
    probs.maxCoeff(&arg);
    if (arg == static_cast<int>(ex.target)) ++correct;
  }
  CHECK(correct >= 7);  // of 8
}

TEST_CASE("training rejects empty datasets") {
  ToySet toy = make_toy(4, 2, 31);
  auto model = nn::init_model(
      nn::make_spec(LayerKind::kSrn, 3, 2, LayerKind::kDenseSoftmax, 2), 2, 32);
  train::TrainConfig config;
  CHECK_THROWS_AS(train::train(model, {}, toy.val_set, config), EmptyDataset);
  CHECK_THROWS_AS(train::train(model, toy.train_set, {}, config), EmptyDataset);
}
