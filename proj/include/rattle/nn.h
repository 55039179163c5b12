// rattle/nn.h

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
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rattle::nn {

// Sequence-to-one recurrent models: a stack of recurrent layers (SRN, LSTM
// or GRU) run over the feature frames with zero initial state, then a dense
// head (softmax or linear) applied to the final frame's top-layer state.

enum class LayerKind { kSrn, kLstm, kGru, kDenseSoftmax, kDenseLinear };

LayerKind layer_kind_from_string(const std::string& s);
std::string to_string(LayerKind k);

struct LayerSpec {
  LayerKind kind;
  int units;
};

// Helper for the common two-recurrent-layers-plus-head stacks.
std::vector<LayerSpec> make_spec(LayerKind cell, int units1, int units2,
                                 LayerKind head, int head_units);

// One gate's affine parameters: pre-activation = w_in * x + w_rec * h + bias.
// Biases are stored as u x 1 matrices so that all parameters can be visited
// uniformly.
struct GateParams {
  Eigen::MatrixXd w_in;   // units x input
  Eigen::MatrixXd w_rec;  // units x units
  Eigen::MatrixXd bias;   // units x 1
};

// Gate order: SRN {candidate}; GRU {update, reset, candidate};
// LSTM {input, forget, output, candidate}.
struct RecurrentLayer {
  LayerKind kind = LayerKind::kGru;
  int input_size = 0;
  int units = 0;
  std::vector<GateParams> gates;

  int gate_count() const;
};

struct DenseHead {
  LayerKind kind = LayerKind::kDenseSoftmax;
  Eigen::MatrixXd weight;  // outputs x units
  Eigen::MatrixXd bias;    // outputs x 1
};

struct NetworkModel {
  std::vector<LayerSpec> spec;
  int input_width = 0;
  std::vector<RecurrentLayer> layers;
  DenseHead head;

  int output_size() const { return static_cast<int>(head.weight.rows()); }
  LayerKind head_kind() const { return head.kind; }
  std::size_t parameter_count() const;

  // Fixed parameter order: per layer, per gate: w_in, w_rec, bias; then the
  // head weight and bias. Gradient and optimizer-state containers reuse the
  // model structure so the same visitation applies to all of them.
  void collect_params(std::vector<Eigen::MatrixXd*>& out);
  void collect_params(std::vector<const Eigen::MatrixXd*>& out) const;

  NetworkModel zeros_like() const;
  void set_zero();
};

// Throws InvalidSpec unless the spec is >= 1 recurrent layer followed by
// exactly one dense head.
void validate_spec(const std::vector<LayerSpec>& spec);

// Fan-scaled uniform weights, zero biases, LSTM forget-gate bias 1.
// Deterministic in the seed.
NetworkModel init_model(const std::vector<LayerSpec>& spec, int input_width,
                        std::uint64_t seed);

// Single-step cell updates. `params` must hold the layer's gates in the
// order documented on RecurrentLayer.
Eigen::VectorXd srn_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h);
Eigen::VectorXd gru_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h);
void lstm_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h, const Eigen::VectorXd& c,
               Eigen::VectorXd& h_out, Eigen::VectorXd& c_out);

// Softmax head: probability vector over classes. Linear head: 1-vector.
Eigen::VectorXd forward(const NetworkModel& model,
                        const Eigen::MatrixXd& features);

// Losses and metric. cross_entropy expects the probability vector from a
// softmax head; mse/mae are on scalars.
double cross_entropy(const Eigen::VectorXd& probs, int target_class);
double mse(double output, double target);
double mae(double output, double target);

// A training example: features are frames x input_width; target is the
// class index for softmax heads and the regression value for linear heads.
struct LabeledSequence {
  const Eigen::MatrixXd* features;
  double target;
};

// Mean loss over a set without touching gradients.
double evaluate_loss(const NetworkModel& model,
                     const std::vector<LabeledSequence>& set);

// Full backpropagation through time over each sequence; returns gradients of
// the mean batch loss in a model-shaped container and the mean loss itself.
NetworkModel backward(const NetworkModel& model,
                      const std::vector<LabeledSequence>& batch,
                      double* mean_loss);

// Versioned binary checkpoint; load(save(m)) reproduces every parameter
// bit-exactly. feature_digest/target_mean/target_std travel with the model
// so downstream evaluation can check feature compatibility and undo target
// standardization.
struct CheckpointMeta {
  std::uint64_t feature_digest = 0;
  double target_mean = 0.0;
  double target_std = 1.0;
};

void save_model(const NetworkModel& model, const CheckpointMeta& meta,
                const std::string& path);
NetworkModel load_model(const std::string& path, CheckpointMeta* meta = nullptr);

}  // namespace rattle::nn
