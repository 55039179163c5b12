// nn.cc

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

#include "rattle/nn.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rattle/error.h"
#include "rattle/rng.h"

namespace rattle::nn {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;
constexpr char kCheckpointMagic[4] = {'R', 'K', 'C', 'K'};

bool is_recurrent(LayerKind k) {
  return k == LayerKind::kSrn || k == LayerKind::kLstm || k == LayerKind::kGru;
}

Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& a) {
  return 1.0 / (1.0 + (-a).exp());
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

// Gate pre-activation for gate g of a layer.
Eigen::VectorXd affine(const GateParams& g, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& h) {
  return g.w_in * x + g.w_rec * h + g.bias;
}

// Per-step state snapshot kept by the traced forward pass so that backward
// never has to recompute activations. `acts` holds gate activation values in
// the layer's gate order (empty for SRN, whose activation is the state).
struct StepTrace {
  Eigen::VectorXd h;
  Eigen::VectorXd c;                   // LSTM only
  std::vector<Eigen::VectorXd> acts;
};

// Allocates a model with the right shapes and zero parameters.
NetworkModel make_model(const std::vector<LayerSpec>& spec, int input_width) {
  validate_spec(spec);
  if (input_width <= 0) throw InvalidSpec("input width must be positive");
  NetworkModel model;
  model.spec = spec;
  model.input_width = input_width;
  int fan_in = input_width;
  for (std::size_t i = 0; i + 1 < spec.size(); ++i) {
    RecurrentLayer layer;
    layer.kind = spec[i].kind;
    layer.input_size = fan_in;
    layer.units = spec[i].units;
    layer.gates.resize(layer.gate_count());
    for (GateParams& g : layer.gates) {
      g.w_in = Eigen::MatrixXd::Zero(layer.units, layer.input_size);
      g.w_rec = Eigen::MatrixXd::Zero(layer.units, layer.units);
      g.bias = Eigen::MatrixXd::Zero(layer.units, 1);
    }
    model.layers.push_back(std::move(layer));
    fan_in = spec[i].units;
  }
  const LayerSpec& head_spec = spec.back();
  model.head.kind = head_spec.kind;
  model.head.weight = Eigen::MatrixXd::Zero(head_spec.units, fan_in);
  model.head.bias = Eigen::MatrixXd::Zero(head_spec.units, 1);
  return model;
}

void fill_uniform(Eigen::MatrixXd& m, double limit, Rng& rng) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = rng.uniform(-limit, limit);
}

template <typename T>
void write_pod(std::ofstream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T value;
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw CorruptCheckpoint("checkpoint truncated");
  return value;
}

}  // namespace

LayerKind layer_kind_from_string(const std::string& s) {
  if (s == "srn") return LayerKind::kSrn;
  if (s == "lstm") return LayerKind::kLstm;
  if (s == "gru") return LayerKind::kGru;
  if (s == "dense_softmax") return LayerKind::kDenseSoftmax;
  if (s == "dense_linear") return LayerKind::kDenseLinear;
  throw InvalidSpec("unknown layer kind: " + s);
}

std::string to_string(LayerKind k) {
  switch (k) {
    case LayerKind::kSrn: return "srn";
    case LayerKind::kLstm: return "lstm";
    case LayerKind::kGru: return "gru";
    case LayerKind::kDenseSoftmax: return "dense_softmax";
    case LayerKind::kDenseLinear: return "dense_linear";
  }
  throw InvalidSpec("unknown layer kind");
}

std::vector<LayerSpec> make_spec(LayerKind cell, int units1, int units2,
                                 LayerKind head, int head_units) {
  return {{cell, units1}, {cell, units2}, {head, head_units}};
}

int RecurrentLayer::gate_count() const {
  switch (kind) {
    case LayerKind::kSrn: return 1;
    case LayerKind::kGru: return 3;
    case LayerKind::kLstm: return 4;
    default: throw InvalidSpec("not a recurrent layer kind");
  }
}

std::size_t NetworkModel::parameter_count() const {
  std::vector<const Eigen::MatrixXd*> params;
  collect_params(params);
  std::size_t n = 0;
  for (const Eigen::MatrixXd* p : params) n += static_cast<std::size_t>(p->size());
  return n;
}

void NetworkModel::collect_params(std::vector<Eigen::MatrixXd*>& out) {
  out.clear();
  for (RecurrentLayer& layer : layers) {
    for (GateParams& g : layer.gates) {
      out.push_back(&g.w_in);
      out.push_back(&g.w_rec);
      out.push_back(&g.bias);
    }
  }
  out.push_back(&head.weight);
  out.push_back(&head.bias);
}

void NetworkModel::collect_params(std::vector<const Eigen::MatrixXd*>& out) const {
  out.clear();
  for (const RecurrentLayer& layer : layers) {
    for (const GateParams& g : layer.gates) {
      out.push_back(&g.w_in);
      out.push_back(&g.w_rec);
      out.push_back(&g.bias);
    }
  }
  out.push_back(&head.weight);
  out.push_back(&head.bias);
}

NetworkModel NetworkModel::zeros_like() const {
  return make_model(spec, input_width);
}

void NetworkModel::set_zero() {
  std::vector<Eigen::MatrixXd*> params;
  collect_params(params);
  for (Eigen::MatrixXd* p : params) p->setZero();
}

void validate_spec(const std::vector<LayerSpec>& spec) {
  if (spec.size() < 2)
    throw InvalidSpec("spec needs at least one recurrent layer and a head");
  for (std::size_t i = 0; i + 1 < spec.size(); ++i) {
    if (!is_recurrent(spec[i].kind))
      throw InvalidSpec("only the last layer may be a dense head");
    if (spec[i].units <= 0) throw InvalidSpec("layer units must be positive");
  }
  const LayerSpec& head = spec.back();
  if (is_recurrent(head.kind))
    throw InvalidSpec("the last layer must be a dense head");
  if (head.units <= 0) throw InvalidSpec("head units must be positive");
  if (head.kind == LayerKind::kDenseLinear && head.units != 1)
    throw InvalidSpec("linear heads are scalar");
}

NetworkModel init_model(const std::vector<LayerSpec>& spec, int input_width,
                        std::uint64_t seed) {
  NetworkModel model = make_model(spec, input_width);
  Rng rng(seed);
  for (RecurrentLayer& layer : model.layers) {
    for (int gi = 0; gi < layer.gate_count(); ++gi) {
      GateParams& g = layer.gates[gi];
      double lim_in = std::sqrt(6.0 / (layer.input_size + layer.units));
      double lim_rec = std::sqrt(6.0 / (layer.units + layer.units));
      fill_uniform(g.w_in, lim_in, rng);
      fill_uniform(g.w_rec, lim_rec, rng);
      g.bias.setZero();
      // Open forget gates at the start so LSTMs can carry state across the
      // whole clip before training has shaped them.
      if (layer.kind == LayerKind::kLstm && gi == 1) g.bias.setConstant(1.0);
    }
  }
  double lim = std::sqrt(6.0 / (model.head.weight.cols() + model.head.weight.rows()));
  fill_uniform(model.head.weight, lim, rng);
  model.head.bias.setZero();
  return model;
}

Eigen::VectorXd srn_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h) {
  return affine(params.gates[0], x, h).array().tanh();
}

Eigen::VectorXd gru_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& h) {
  Eigen::ArrayXd z = sigmoid(affine(params.gates[0], x, h).array());
  Eigen::ArrayXd r = sigmoid(affine(params.gates[1], x, h).array());
  Eigen::VectorXd gated = (r * h.array()).matrix();
  Eigen::ArrayXd g = affine(params.gates[2], x, gated).array().tanh();
  return ((1.0 - z) * h.array() + z * g).matrix();
}

void lstm_step(const RecurrentLayer& params, const Eigen::VectorXd& x,
               const Eigen::VectorXd& h, const Eigen::VectorXd& c,
               Eigen::VectorXd& h_out, Eigen::VectorXd& c_out) {
  Eigen::ArrayXd i = sigmoid(affine(params.gates[0], x, h).array());
  Eigen::ArrayXd f = sigmoid(affine(params.gates[1], x, h).array());
  Eigen::ArrayXd o = sigmoid(affine(params.gates[2], x, h).array());
  Eigen::ArrayXd g = affine(params.gates[3], x, h).array().tanh();
  c_out = (f * c.array() + i * g).matrix();
  h_out = (o * c_out.array().tanh()).matrix();
}

namespace {

// Runs the stack over all frames, recording everything backward needs.
// trace[l][t] is layer l's state after consuming frame t.
void forward_traced(const NetworkModel& model, const Eigen::MatrixXd& features,
                    std::vector<std::vector<StepTrace>>& trace) {
  const int num_frames = static_cast<int>(features.rows());
  if (num_frames == 0) throw EmptySequence("feature matrix has no frames");
  if (features.cols() != model.input_width)
    throw ShapeMismatch("feature width does not match the model input width");
  const std::size_t num_layers = model.layers.size();
  trace.assign(num_layers, {});
  for (std::size_t l = 0; l < num_layers; ++l)
    trace[l].resize(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    Eigen::VectorXd x = features.row(t).transpose();
    for (std::size_t l = 0; l < num_layers; ++l) {
      const RecurrentLayer& layer = model.layers[l];
      const bool first = (t == 0);
      Eigen::VectorXd h_prev = first ? Eigen::VectorXd::Zero(layer.units)
                                     : trace[l][t - 1].h;
      StepTrace& st = trace[l][t];
      switch (layer.kind) {
        case LayerKind::kSrn: {
          st.h = srn_step(layer, x, h_prev);
          break;
        }
        case LayerKind::kGru: {
          Eigen::ArrayXd z = sigmoid(affine(layer.gates[0], x, h_prev).array());
          Eigen::ArrayXd r = sigmoid(affine(layer.gates[1], x, h_prev).array());
          Eigen::VectorXd gated = (r * h_prev.array()).matrix();
          Eigen::ArrayXd g = affine(layer.gates[2], x, gated).array().tanh();
          st.h = ((1.0 - z) * h_prev.array() + z * g).matrix();
          st.acts = {z.matrix(), r.matrix(), g.matrix()};
          break;
        }
        case LayerKind::kLstm: {
          Eigen::VectorXd c_prev = first ? Eigen::VectorXd::Zero(layer.units)
                                         : trace[l][t - 1].c;
          Eigen::ArrayXd i = sigmoid(affine(layer.gates[0], x, h_prev).array());
          Eigen::ArrayXd f = sigmoid(affine(layer.gates[1], x, h_prev).array());
          Eigen::ArrayXd o = sigmoid(affine(layer.gates[2], x, h_prev).array());
          Eigen::ArrayXd g = affine(layer.gates[3], x, h_prev).array().tanh();
          st.c = (f * c_prev.array() + i * g).matrix();
          st.h = (o * st.c.array().tanh()).matrix();
          st.acts = {i.matrix(), f.matrix(), o.matrix(), g.matrix()};
          break;
        }
        default:
          throw InvalidSpec("head found among recurrent layers");
      }
      x = st.h;
    }
  }
}

// Backward through one step of one layer. dh is the full gradient arriving
// at h_t; dc_next the gradient arriving at c_t from step t+1 (LSTM only).
// Parameter gradients accumulate into `grad`; dh_prev/dc_prev/dx come back
// through the out-params.
void step_backward(const RecurrentLayer& layer, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev,
                   const StepTrace& st, const Eigen::VectorXd& dh,
                   const Eigen::VectorXd& dc_next, RecurrentLayer& grad,
                   Eigen::VectorXd& dh_prev, Eigen::VectorXd& dc_prev,
                   Eigen::VectorXd& dx) {
  switch (layer.kind) {
    case LayerKind::kSrn: {
      Eigen::VectorXd da =
          (dh.array() * (1.0 - st.h.array().square())).matrix();
      grad.gates[0].w_in.noalias() += da * x.transpose();
      grad.gates[0].w_rec.noalias() += da * h_prev.transpose();
      grad.gates[0].bias += da;
      dh_prev.noalias() = layer.gates[0].w_rec.transpose() * da;
      dx.noalias() = layer.gates[0].w_in.transpose() * da;
      break;
    }
    case LayerKind::kGru: {
      const Eigen::ArrayXd z = st.acts[0].array();
      const Eigen::ArrayXd r = st.acts[1].array();
      const Eigen::ArrayXd g = st.acts[2].array();
      Eigen::VectorXd gated = (r * h_prev.array()).matrix();
      Eigen::VectorXd daz =
          (dh.array() * (g - h_prev.array()) * z * (1.0 - z)).matrix();
      Eigen::VectorXd dag = (dh.array() * z * (1.0 - g.square())).matrix();
      Eigen::VectorXd dgated = layer.gates[2].w_rec.transpose() * dag;
      Eigen::VectorXd dar =
          (dgated.array() * h_prev.array() * r * (1.0 - r)).matrix();
      grad.gates[0].w_in.noalias() += daz * x.transpose();
      grad.gates[0].w_rec.noalias() += daz * h_prev.transpose();
      grad.gates[0].bias += daz;
      grad.gates[1].w_in.noalias() += dar * x.transpose();
      grad.gates[1].w_rec.noalias() += dar * h_prev.transpose();
      grad.gates[1].bias += dar;
      grad.gates[2].w_in.noalias() += dag * x.transpose();
      grad.gates[2].w_rec.noalias() += dag * gated.transpose();
      grad.gates[2].bias += dag;
      dh_prev = (dh.array() * (1.0 - z) + dgated.array() * r).matrix();
      dh_prev.noalias() += layer.gates[0].w_rec.transpose() * daz;
      dh_prev.noalias() += layer.gates[1].w_rec.transpose() * dar;
      dx.noalias() = layer.gates[0].w_in.transpose() * daz;
      dx.noalias() += layer.gates[1].w_in.transpose() * dar;
      dx.noalias() += layer.gates[2].w_in.transpose() * dag;
      break;
    }
    case LayerKind::kLstm: {
      const Eigen::ArrayXd i = st.acts[0].array();
      const Eigen::ArrayXd f = st.acts[1].array();
      const Eigen::ArrayXd o = st.acts[2].array();
      const Eigen::ArrayXd g = st.acts[3].array();
      Eigen::ArrayXd tc = st.c.array().tanh();
      Eigen::VectorXd dao = (dh.array() * tc * o * (1.0 - o)).matrix();
      Eigen::ArrayXd dc = dc_next.array() + dh.array() * o * (1.0 - tc.square());
      Eigen::VectorXd dai = (dc * g * i * (1.0 - i)).matrix();
      Eigen::VectorXd daf = (dc * c_prev.array() * f * (1.0 - f)).matrix();
      Eigen::VectorXd dag = (dc * i * (1.0 - g.square())).matrix();
      dc_prev = (dc * f).matrix();
      const Eigen::VectorXd* das[4] = {&dai, &daf, &dao, &dag};
      dh_prev = Eigen::VectorXd::Zero(layer.units);
      dx = Eigen::VectorXd::Zero(layer.input_size);
      for (int gi = 0; gi < 4; ++gi) {
        grad.gates[gi].w_in.noalias() += *das[gi] * x.transpose();
        grad.gates[gi].w_rec.noalias() += *das[gi] * h_prev.transpose();
        grad.gates[gi].bias += *das[gi];
        dh_prev.noalias() += layer.gates[gi].w_rec.transpose() * *das[gi];
        dx.noalias() += layer.gates[gi].w_in.transpose() * *das[gi];
      }
      break;
    }
    default:
      throw InvalidSpec("head found among recurrent layers");
  }
}

// Head loss and gradient with respect to the final top-layer state.
double head_backward(const NetworkModel& model, const Eigen::VectorXd& h_top,
                     double target, DenseHead& grad, Eigen::VectorXd& dh_top) {
  Eigen::VectorXd logits = model.head.weight * h_top + model.head.bias;
  if (model.head.kind == LayerKind::kDenseSoftmax) {
    Eigen::VectorXd probs = softmax(logits);
    const int target_class = static_cast<int>(target);
    if (target_class < 0 || target_class >= probs.size())
      throw LossMismatch("class target out of range");
    double loss = -std::log(std::max(probs(target_class), 1e-300));
    Eigen::VectorXd dlogits = probs;
    dlogits(target_class) -= 1.0;
    grad.weight.noalias() += dlogits * h_top.transpose();
    grad.bias += dlogits;
    dh_top.noalias() = model.head.weight.transpose() * dlogits;
    return loss;
  }
  double output = logits(0);
  double diff = output - target;
  double dout = 2.0 * diff;
  grad.weight.noalias() += dout * h_top.transpose();
  grad.bias(0, 0) += dout;
  dh_top = model.head.weight.transpose().col(0) * dout;
  return diff * diff;
}

}  // namespace

Eigen::VectorXd forward(const NetworkModel& model,
                        const Eigen::MatrixXd& features) {
  const int num_frames = static_cast<int>(features.rows());
  if (num_frames == 0) throw EmptySequence("feature matrix has no frames");
  if (features.cols() != model.input_width)
    throw ShapeMismatch("feature width does not match the model input width");
  std::vector<Eigen::VectorXd> h(model.layers.size());
  std::vector<Eigen::VectorXd> c(model.layers.size());
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    h[l] = Eigen::VectorXd::Zero(model.layers[l].units);
    c[l] = Eigen::VectorXd::Zero(model.layers[l].units);
  }
  for (int t = 0; t < num_frames; ++t) {
    Eigen::VectorXd x = features.row(t).transpose();
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      const RecurrentLayer& layer = model.layers[l];
      switch (layer.kind) {
        case LayerKind::kSrn:
          h[l] = srn_step(layer, x, h[l]);
          break;
        case LayerKind::kGru:
          h[l] = gru_step(layer, x, h[l]);
          break;
        case LayerKind::kLstm: {
          Eigen::VectorXd h_out, c_out;
          lstm_step(layer, x, h[l], c[l], h_out, c_out);
          h[l] = std::move(h_out);
          c[l] = std::move(c_out);
          break;
        }
        default:
          throw InvalidSpec("head found among recurrent layers");
      }
      x = h[l];
    }
  }
  Eigen::VectorXd logits = model.head.weight * h.back() + model.head.bias;
  if (model.head.kind == LayerKind::kDenseSoftmax) return softmax(logits);
  return logits;
}

double cross_entropy(const Eigen::VectorXd& probs, int target_class) {
  if (target_class < 0 || target_class >= probs.size())
    throw LossMismatch("class target out of range");
  return -std::log(std::max(probs(target_class), 1e-300));
}

double mse(double output, double target) {
  double d = output - target;
  return d * d;
}

double mae(double output, double target) { return std::abs(output - target); }

double evaluate_loss(const NetworkModel& model,
                     const std::vector<LabeledSequence>& set) {
  if (set.empty()) throw EmptyDataset("cannot evaluate on an empty set");
  double total = 0.0;
  for (const LabeledSequence& example : set) {
    Eigen::VectorXd out = forward(model, *example.features);
    if (model.head.kind == LayerKind::kDenseSoftmax)
      total += cross_entropy(out, static_cast<int>(example.target));
    else
      total += mse(out(0), example.target);
  }
  return total / static_cast<double>(set.size());
}

NetworkModel backward(const NetworkModel& model,
                      const std::vector<LabeledSequence>& batch,
                      double* mean_loss) {
  if (batch.empty()) throw EmptyDataset("cannot take a step on an empty batch");
  NetworkModel grad = model.zeros_like();
  double total_loss = 0.0;
  const int num_layers = static_cast<int>(model.layers.size());
  std::vector<std::vector<StepTrace>> trace;
  for (const LabeledSequence& example : batch) {
    const Eigen::MatrixXd& features = *example.features;
    forward_traced(model, features, trace);
    const int num_frames = static_cast<int>(features.rows());

    // The loss reads only the top layer's final state; every other gradient
    // arrives through recurrence or from the layer above.
    Eigen::VectorXd dh_top;
    total_loss += head_backward(model, trace[num_layers - 1][num_frames - 1].h,
                                example.target, grad.head, dh_top);
    std::vector<Eigen::VectorXd> inject(
        num_frames, Eigen::VectorXd::Zero(model.layers[num_layers - 1].units));
    inject[num_frames - 1] = dh_top;

    for (int l = num_layers - 1; l >= 0; --l) {
      const RecurrentLayer& layer = model.layers[l];
      std::vector<Eigen::VectorXd> dinput(
          num_frames, Eigen::VectorXd::Zero(layer.input_size));
      Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(layer.units);
      Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(layer.units);
      Eigen::VectorXd zero_state = Eigen::VectorXd::Zero(layer.units);
      for (int t = num_frames - 1; t >= 0; --t) {
        Eigen::VectorXd dh = dh_next + inject[t];
        Eigen::VectorXd x = (l == 0) ? Eigen::VectorXd(features.row(t).transpose())
                                     : trace[l - 1][t].h;
        const Eigen::VectorXd& h_prev = (t == 0) ? zero_state : trace[l][t - 1].h;
        const Eigen::VectorXd& c_prev =
            (t == 0 || layer.kind != LayerKind::kLstm) ? zero_state
                                                       : trace[l][t - 1].c;
        Eigen::VectorXd dh_prev, dc_prev, dx;
        step_backward(layer, x, h_prev, c_prev, trace[l][t], dh, dc_next,
                      grad.layers[l], dh_prev, dc_prev, dx);
        dh_next = std::move(dh_prev);
        if (layer.kind == LayerKind::kLstm) dc_next = std::move(dc_prev);
        if (l > 0) dinput[t] = std::move(dx);
      }
      inject = std::move(dinput);
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  std::vector<Eigen::MatrixXd*> params;
  grad.collect_params(params);
  for (Eigen::MatrixXd* p : params) *p *= scale;
  if (mean_loss != nullptr) *mean_loss = total_loss * scale;
  return grad;
}

void save_model(const NetworkModel& model, const CheckpointMeta& meta,
                const std::string& path) {
  nlohmann::json header;
  header["input_width"] = model.input_width;
  char digest[17];
  std::snprintf(digest, sizeof(digest), "%016llx",
                static_cast<unsigned long long>(meta.feature_digest));
  header["feature_digest"] = digest;
  header["target_mean"] = meta.target_mean;
  header["target_std"] = meta.target_std;
  nlohmann::json spec = nlohmann::json::array();
  for (const LayerSpec& layer : model.spec)
    spec.push_back({{"kind", to_string(layer.kind)}, {"units", layer.units}});
  header["spec"] = spec;
  const std::string header_text = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoFailure("cannot open for writing: " + path);
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(os, kCheckpointVersion);
  write_pod(os, static_cast<std::uint32_t>(header_text.size()));
  os.write(header_text.data(),
           static_cast<std::streamsize>(header_text.size()));
  std::vector<const Eigen::MatrixXd*> params;
  model.collect_params(params);
  write_pod(os, static_cast<std::uint64_t>(model.parameter_count()));
  for (const Eigen::MatrixXd* p : params)
    os.write(reinterpret_cast<const char*>(p->data()),
             static_cast<std::streamsize>(sizeof(double) * p->size()));
  if (!os) throw IoFailure("short write: " + path);
}

NetworkModel load_model(const std::string& path, CheckpointMeta* meta) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoFailure("cannot open for reading: " + path);
  char magic[4];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw CorruptCheckpoint("bad checkpoint magic: " + path);
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw VersionMismatch("unsupported checkpoint version " +
                          std::to_string(version));
  const auto header_size = read_pod<std::uint32_t>(is);
  std::string header_text(header_size, '\0');
  is.read(header_text.data(), header_size);
  if (!is) throw CorruptCheckpoint("checkpoint truncated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception&) {
    throw CorruptCheckpoint("unparseable checkpoint header");
  }
  std::vector<LayerSpec> spec;
  for (const nlohmann::json& layer : header.at("spec"))
    spec.push_back({layer_kind_from_string(layer.at("kind")),
                    layer.at("units").get<int>()});
  NetworkModel model = make_model(spec, header.at("input_width").get<int>());
  if (meta != nullptr) {
    meta->feature_digest = std::stoull(
        header.at("feature_digest").get<std::string>(), nullptr, 16);
    meta->target_mean = header.at("target_mean").get<double>();
    meta->target_std = header.at("target_std").get<double>();
  }
  const auto count = read_pod<std::uint64_t>(is);
  if (count != model.parameter_count())
    throw CorruptCheckpoint("parameter count does not match the spec");
  std::vector<Eigen::MatrixXd*> params;
  model.collect_params(params);
  for (Eigen::MatrixXd* p : params) {
    is.read(reinterpret_cast<char*>(p->data()),
            static_cast<std::streamsize>(sizeof(double) * p->size()));
    if (!is) throw CorruptCheckpoint("checkpoint truncated");
  }
  return model;
}

}  // namespace rattle::nn
