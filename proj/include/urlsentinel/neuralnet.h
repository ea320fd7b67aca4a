// Copyright 2026 The URLSentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef URLSENTINEL_NEURALNET_H_
#define URLSENTINEL_NEURALNET_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "urlsentinel/types.h"

namespace urlsentinel {

enum class Activation : std::uint8_t { kRelu = 0, kSigmoid = 1 };

// Fully connected binary classifier. Layer l maps dims[l] -> dims[l+1] with
// weights[l] of shape (dims[l] x dims[l+1]); the last layer is a single
// sigmoid unit.
struct MlpModel {
  std::vector<std::size_t> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;
  // Bumped on every parameter update so stale forward caches are caught.
  // Not part of the model's value.
  std::uint64_t revision = 0;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t parameter_count() const;
  // Throws Error(kInvalidArgument) on shape or activation problems.
  void validate() const;
};

// Value equality: shapes, activations and every parameter bit.
bool operator==(const MlpModel& a, const MlpModel& b);

// He initialisation, N(0, sqrt(2 / fan_in)); biases zero.
MlpModel init_weights(std::span<const std::size_t> layer_dims,
                      std::uint64_t seed);

// All parameters zero; predicts exactly 0.5 everywhere.
MlpModel zero_model(std::span<const std::size_t> layer_dims);

// Training-mode dropout after each hidden activation (inverted convention:
// kept units are scaled by 1 / (1 - rate)). Masks are a pure function of seed.
struct DropoutSpec {
  double rate = 0.0;
  std::uint64_t seed = 0;
};

struct ForwardCache {
  // inputs[l] feeds layer l (post-activation, post-dropout); rows = batch.
  std::vector<Eigen::MatrixXd> inputs;
  // pre_activations[l] is layer l's affine output.
  std::vector<Eigen::MatrixXd> pre_activations;
  // masks[l] holds 0 or 1/(1-rate) for hidden layer l; empty without dropout.
  std::vector<Eigen::MatrixXd> masks;
  Eigen::VectorXd probabilities;
  std::uint64_t model_revision = 0;
};

ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& batch,
                           const std::optional<DropoutSpec>& dropout = {});

struct SingleForward {
  double probability = 0.5;
  ForwardCache cache;
};

// Single-sample forward pass. Without dropout this is the inference path.
SingleForward forward(const MlpModel& model, std::span<const double> x,
                      const std::optional<DropoutSpec>& dropout = {});

inline constexpr double kBceEpsilon = 1e-7;

// Binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

// Mean BCE of a cached forward pass.
double batch_loss(const ForwardCache& cache, std::span<const int> labels);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

// Gradients of the mean batch BCE. Throws Error(kStaleCache) when the cache
// does not belong to the current model parameters.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const int> labels);

struct TrainConfig {
  std::vector<std::size_t> hidden_layers = {512, 256};
  int epochs = 5;
  int batch_size = 64;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double dropout_rate = 0.2;
  std::optional<int> early_stop_patience;
  double validation_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  std::vector<Eigen::MatrixXd> m_weights;
  std::vector<Eigen::MatrixXd> v_weights;
  std::vector<Eigen::VectorXd> m_biases;
  std::vector<Eigen::VectorXd> v_biases;
  std::uint64_t step = 0;

  static AdamState ZerosLike(const MlpModel& model);
};

// One bias-corrected Adam update. Throws Error(kNonFinite) before touching
// any parameter when a gradient is NaN or infinite.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  std::optional<double> validation_loss;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::uint64_t steps = 0;
  bool stopped_early = false;
  int best_epoch = -1;  // only with early stopping
};

// Minibatch Adam training. Throws Error(kInvalidArgument) on an empty set.
TrainResult train(MlpModel& model, const FeatureMatrix& features,
                  std::span<const int> labels, const TrainConfig& cfg);

// Inference-mode probability; bit-identical to forward() without dropout.
double predict_proba(const MlpModel& model, std::span<const double> x);

// Row-by-row predict_proba.
std::vector<double> predict_proba_batch(const MlpModel& model,
                                        const FeatureMatrix& features);

}  // namespace urlsentinel

#endif  // URLSENTINEL_NEURALNET_H_
