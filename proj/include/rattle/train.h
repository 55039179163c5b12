// rattle/train.h

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
#include <functional>
#include <vector>

#include "rattle/nn.h"

namespace rattle::train {

struct TrainConfig {
  int batch_size = 16;
  int max_epochs = 200;
  int patience = 2;        // epochs without validation improvement tolerated
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 5.0;  // global gradient norm ceiling; <= 0 disables
  std::uint64_t seed = 0;  // batch shuffling stream
  bool verbose = false;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> val_loss;    // validation loss per epoch
  std::vector<double> seconds;     // wall time per epoch
  int best_epoch = -1;             // 1-based epoch whose weights were kept
  int epochs_run = 0;
};

// Test seams. val_loss_override, when set, replaces the computed validation
// loss for epoch e (1-based) so the stopping rule can be exercised directly.
struct TrainHooks {
  std::function<double(int epoch, double computed)> val_loss_override;
  std::function<void(int epoch, double train_loss, double val_loss)> on_epoch;
};

// Adam with bias correction and optional global-norm clipping. Moments are
// model-shaped so they follow the fixed parameter order.
class AdamOptimizer {
 public:
  AdamOptimizer(const nn::NetworkModel& model, const TrainConfig& config);

  // Applies one update from the given gradients. A zero gradient leaves the
  // parameters untouched.
  void step(nn::NetworkModel& model, const nn::NetworkModel& grad);

  int steps_taken() const { return t_; }

 private:
  TrainConfig config_;
  nn::NetworkModel m_;
  nn::NetworkModel v_;
  int t_ = 0;
};

// Mini-batch training with early stopping: stop once the validation loss has
// failed to improve (strict <) for `patience` consecutive epochs, then
// restore the parameters from the best epoch. Deterministic in config.seed.
TrainHistory train(nn::NetworkModel& model,
                   const std::vector<nn::LabeledSequence>& train_set,
                   const std::vector<nn::LabeledSequence>& val_set,
                   const TrainConfig& config, const TrainHooks& hooks = {});

}  // namespace rattle::train
