// train.cc

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

#include "rattle/train.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "rattle/error.h"
#include "rattle/rng.h"

namespace rattle::train {

void TrainConfig::validate() const {
  if (batch_size <= 0) throw InvalidConfig("batch size must be positive");
  if (max_epochs <= 0) throw InvalidConfig("max epochs must be positive");
  if (patience <= 0) throw InvalidConfig("patience must be positive");
  if (learning_rate <= 0.0) throw InvalidConfig("learning rate must be positive");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw InvalidConfig("Adam betas must lie in [0, 1)");
  if (epsilon <= 0.0) throw InvalidConfig("Adam epsilon must be positive");
}

AdamOptimizer::AdamOptimizer(const nn::NetworkModel& model,
                             const TrainConfig& config)
    : config_(config), m_(model.zeros_like()), v_(model.zeros_like()) {}

void AdamOptimizer::step(nn::NetworkModel& model, const nn::NetworkModel& grad) {
  std::vector<Eigen::MatrixXd*> params, ms, vs;
  std::vector<const Eigen::MatrixXd*> grads;
  model.collect_params(params);
  grad.collect_params(grads);
  m_.collect_params(ms);
  v_.collect_params(vs);
  if (params.size() != grads.size())
    throw ShapeMismatch("gradient does not match the model layout");

  // Global norm across every parameter, clipped by rescaling the whole
  // gradient so its direction is preserved.
  double sq_norm = 0.0;
  for (const Eigen::MatrixXd* g : grads) sq_norm += g->squaredNorm();
  double scale = 1.0;
  if (config_.clip_norm > 0.0) {
    double norm = std::sqrt(sq_norm);
    if (norm > config_.clip_norm) scale = config_.clip_norm / norm;
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, t_);
  const double bc2 = 1.0 - std::pow(config_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Eigen::ArrayXXd g = grads[i]->array() * scale;
    ms[i]->array() = config_.beta1 * ms[i]->array() + (1.0 - config_.beta1) * g;
    vs[i]->array() =
        config_.beta2 * vs[i]->array() + (1.0 - config_.beta2) * g.square();
    Eigen::ArrayXXd m_hat = ms[i]->array() / bc1;
    Eigen::ArrayXXd v_hat = vs[i]->array() / bc2;
    params[i]->array() -=
        config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
  }
}

namespace {

void copy_params(const nn::NetworkModel& from, nn::NetworkModel& to) {
  std::vector<const Eigen::MatrixXd*> src;
  std::vector<Eigen::MatrixXd*> dst;
  from.collect_params(src);
  to.collect_params(dst);
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i] = *src[i];
}

}  // namespace

TrainHistory train(nn::NetworkModel& model,
                   const std::vector<nn::LabeledSequence>& train_set,
                   const std::vector<nn::LabeledSequence>& val_set,
                   const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  if (train_set.empty()) throw EmptyDataset("training set is empty");
  if (val_set.empty()) throw EmptyDataset("validation set is empty");

  AdamOptimizer optimizer(model, config);
  Rng shuffle_rng(config.seed);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainHistory history;
  nn::NetworkModel best = model.zeros_like();
  copy_params(model, best);
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    int num_batches = 0;
    std::vector<nn::LabeledSequence> batch;
    batch.reserve(config.batch_size);
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      batch.clear();
      const std::size_t stop =
          std::min(order.size(), start + config.batch_size);
      for (std::size_t k = start; k < stop; ++k)
        batch.push_back(train_set[order[k]]);
      double batch_loss = 0.0;
      nn::NetworkModel grad = nn::backward(model, batch, &batch_loss);
      optimizer.step(model, grad);
      epoch_loss += batch_loss;
      ++num_batches;
    }
    epoch_loss /= static_cast<double>(num_batches);

    double val_loss = nn::evaluate_loss(model, val_set);
    if (hooks.val_loss_override)
      val_loss = hooks.val_loss_override(epoch, val_loss);
    history.train_loss.push_back(epoch_loss);
    history.val_loss.push_back(val_loss);
    history.seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count());
    history.epochs_run = epoch;
    if (hooks.on_epoch) hooks.on_epoch(epoch, epoch_loss, val_loss);
    if (config.verbose)
      std::fprintf(stderr, "epoch %3d  train %.6f  val %.6f\n", epoch,
                   epoch_loss, val_loss);

    if (val_loss < best_val) {
      best_val = val_loss;
      history.best_epoch = epoch;
      copy_params(model, best);
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= config.patience) break;
    }
  }

  // Hand back the best-validation weights, not the last ones tried.
  copy_params(best, model);
  return history;
}

}  // namespace rattle::train
