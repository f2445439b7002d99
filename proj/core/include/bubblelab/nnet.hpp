#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "bubblelab/martingale.hpp"
#include "bubblelab/rng.hpp"
#include "bubblelab/sim.hpp"

namespace bubblelab::nnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Gate blocks inside the stacked LSTM parameter tensors, in storage order.
// remember scales the previous cell state, save scales the candidate,
// focus scales the cell output, candidate is the tanh write proposal.
enum GateBlock : int { kRemember = 0, kSave = 1, kFocus = 2, kCandidate = 3 };

// One LSTM direction. The four gates are stacked along rows, so w_in is
// (4H x in_dim), w_rec is (4H x H) and bias is (4H). Row block g*H..(g+1)*H
// belongs to GateBlock g.
struct LstmLayerParams {
  Matrix w_in;
  Matrix w_rec;
  Vector bias;

  auto gate_in(GateBlock g, std::size_t hidden) { return w_in.middleRows(g * hidden, hidden); }
  auto gate_rec(GateBlock g, std::size_t hidden) { return w_rec.middleRows(g * hidden, hidden); }
  auto gate_bias(GateBlock g, std::size_t hidden) { return bias.segment(g * hidden, hidden); }
};

// Standardization constants for the log-return feature, estimated on the
// training corpus and stored with the model.
struct FeatureStats {
  double mean = 0.0;
  double stddev = 1.0;
};

// Two stacked bidirectional LSTM layers and a per-step linear readout to two
// class logits (label 1 = true martingale, label 0 = bubble).
struct LstmModel {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  LstmLayerParams layer1_fwd, layer1_bwd, layer2_fwd, layer2_bwd;
  Matrix fc_w;  // 2 x 2H
  Vector fc_b;  // 2
  FeatureStats feature_stats;
};

// Flat view over every parameter tensor of a model, in the fixed order
// layer1_fwd{w_in,w_rec,bias}, layer1_bwd{...}, layer2_fwd{...},
// layer2_bwd{...}, fc_w, fc_b. Serialization, Adam state, clipping and the
// finite-difference tests all iterate this order.
struct TensorView {
  double* data;
  std::size_t size;
};
std::vector<TensorView> tensor_views(LstmModel& m);

struct ConstTensorView {
  const double* data;
  std::size_t size;
};
std::vector<ConstTensorView> tensor_views(const LstmModel& m);

// Fresh model with weights uniform on (-1/sqrt(hidden), +1/sqrt(hidden))
// drawn from gen in tensor_views order, then the remember-gate biases reset
// to +1 so early training does not forget cell state.
LstmModel init_model(std::size_t input_dim, std::size_t hidden_dim, Pcg64& gen);

LstmModel zeros_like(const LstmModel& m);

// One training sequence: features column-per-step plus the per-step labels.
struct Sequence {
  Matrix features;          // input_dim x T
  std::vector<int> labels;  // length T, values 0/1 (may be empty at inference)
};

// Per-step class probabilities, columns summing to 1. Throws on dimension
// mismatch or non-finite features.
Matrix network_forward(const LstmModel& model, const Matrix& features);

// Mean cross-entropy with probabilities floored at 1e-12 before the log.
double mean_cross_entropy(const Matrix& probs, const std::vector<int>& labels);

struct BackwardResult {
  double loss = 0.0;
  LstmModel grads;  // same shapes as the model, feature_stats unused
};

// Loss and exact gradients for one sequence via backpropagation through time.
BackwardResult network_backward(const LstmModel& model, const Matrix& features,
                                const std::vector<int>& labels);

struct TrainConfig {
  std::size_t hidden_dim = 16;
  std::size_t epochs = 10;
  std::size_t chunk_len = 512;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip_norm = 1.0;
  RngSpec rng{};

  void validate() const;
};

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  LstmModel model;
  std::vector<EpochStats> history;
};

// Adam training over chunk_len windows of the input sequences, one update per
// chunk, chunk order reshuffled each epoch from cfg.rng. Bit-reproducible for
// a fixed config on one platform; aborts with a diagnostic if the loss stops
// being finite.
TrainResult train(const std::vector<Sequence>& data, const TrainConfig& cfg);

// Features for one path: column j holds the standardized log return
// log(S[j+1]/S[j]) and the normalized level S[j+1]/S[0]. Requires positive
// prices and at least 2 of them.
Matrix featurize(const sim::PricePath& path, const FeatureStats& stats);

// Pooled mean / population stddev of raw log returns across paths.
FeatureStats compute_feature_stats(const std::vector<sim::PricePath>& paths);

struct ClassifyResult {
  martingale::LabelSeries labels;           // length = path length
  std::vector<std::array<double, 2>> probs;  // aligned with labels
};

// Per-step argmax labels (ties toward label 1). Step 0 has no return, so it
// carries the first classified step's output; the series length matches the
// path length.
ClassifyResult classify_sequence(const LstmModel& model, const sim::PricePath& path);

// Binary checkpoint: "BLNN", version, dims, feature stats, then raw
// little-endian float64 tensors in tensor_views order. Loading validates the
// header and the exact byte length.
void save_checkpoint(const LstmModel& model, const std::string& path);
LstmModel load_checkpoint(const std::string& path);

}  // namespace bubblelab::nnet
