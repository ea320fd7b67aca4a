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

#include "urlsentinel/neuralnet.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

double Sigmoid(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  // Keep the output strictly inside (0, 1).
  if (p >= 1.0) return std::nextafter(1.0, 0.0);
  if (p <= 0.0) return std::nextafter(0.0, 1.0);
  return p;
}

void ApplyActivation(Activation act, Eigen::MatrixXd& z_to_a) {
  if (act == Activation::kRelu) {
    z_to_a = z_to_a.cwiseMax(0.0);
  } else {
    z_to_a = z_to_a.unaryExpr([](double z) { return Sigmoid(z); });
  }
}

Eigen::MatrixXd DropoutMask(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                            double rate) {
  Eigen::MatrixXd mask(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = rng.Uniform() < rate ? 0.0 : scale;
    }
  }
  return mask;
}

void CheckDropout(const std::optional<DropoutSpec>& dropout) {
  if (dropout && !(dropout->rate >= 0.0 && dropout->rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dropout rate must be in [0, 1)");
  }
}

bool AllFinite(const Gradients& g) {
  for (const auto& w : g.weights) {
    if (!w.allFinite()) return false;
  }
  for (const auto& b : g.biases) {
    if (!b.allFinite()) return false;
  }
  return true;
}

bool BitEqual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::equal(a.data(), a.data() + a.size(), b.data(),
                    [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) ==
                             std::bit_cast<std::uint64_t>(y);
                    });
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

void MlpModel::validate() const {
  if (layer_dims.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "network needs at least one layer");
  }
  const std::size_t layers = layer_dims.size() - 1;
  if (weights.size() != layers || biases.size() != layers ||
      activations.size() != layers) {
    throw Error(ErrorCode::kInvalidArgument, "layer count mismatch");
  }
  if (layer_dims.back() != 1 || activations.back() != Activation::kSigmoid) {
    throw Error(ErrorCode::kInvalidArgument,
                "output layer must be a single sigmoid unit");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (static_cast<std::size_t>(weights[l].rows()) != layer_dims[l] ||
        static_cast<std::size_t>(weights[l].cols()) != layer_dims[l + 1] ||
        static_cast<std::size_t>(biases[l].size()) != layer_dims[l + 1]) {
      throw Error(ErrorCode::kInvalidArgument, "weight shapes do not chain");
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      throw Error(ErrorCode::kNonFinite, "non-finite network parameter");
    }
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layer_dims != b.layer_dims || a.activations != b.activations ||
      a.weights.size() != b.weights.size() || a.biases.size() != b.biases.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (!BitEqual(a.weights[l], b.weights[l]) ||
        !BitEqual(a.biases[l], b.biases[l])) {
      return false;
    }
  }
  return true;
}

MlpModel zero_model(std::span<const std::size_t> layer_dims) {
  if (layer_dims.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "network needs at least one layer");
  }
  for (const auto d : layer_dims) {
    if (d == 0) throw Error(ErrorCode::kInvalidArgument, "zero-width layer");
  }
  MlpModel m;
  m.layer_dims.assign(layer_dims.begin(), layer_dims.end());
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(layer_dims[l]);
    const auto out = static_cast<Eigen::Index>(layer_dims[l + 1]);
    m.weights.push_back(Eigen::MatrixXd::Zero(in, out));
    m.biases.push_back(Eigen::VectorXd::Zero(out));
    m.activations.push_back(l + 2 == layer_dims.size() ? Activation::kSigmoid
                                                       : Activation::kRelu);
  }
  m.validate();
  return m;
}

MlpModel init_weights(std::span<const std::size_t> layer_dims,
                      std::uint64_t seed) {
  MlpModel m = zero_model(layer_dims);
  Rng rng(seed);
  for (auto& w : m.weights) {
    const double sd = std::sqrt(2.0 / static_cast<double>(w.rows()));
    // Row-major draw order so the stream does not depend on storage order.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = sd * rng.Normal();
    }
  }
  return m;
}

ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& batch,
                           const std::optional<DropoutSpec>& dropout) {
  CheckDropout(dropout);
  if (static_cast<std::size_t>(batch.cols()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input width does not match the network input layer");
  }
  const bool use_dropout = dropout && dropout->rate > 0.0;
  std::optional<Rng> rng;
  if (use_dropout) rng.emplace(dropout->seed);

  ForwardCache cache;
  cache.model_revision = model.revision;
  cache.inputs.push_back(batch);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = cache.inputs[l] * model.weights[l];
    z.rowwise() += model.biases[l].transpose();
    cache.pre_activations.push_back(z);
    ApplyActivation(model.activations[l], z);
    if (l + 1 == model.layer_count()) {
      cache.probabilities = z.col(0);
      break;
    }
    if (use_dropout) {
      cache.masks.push_back(DropoutMask(*rng, z.rows(), z.cols(), dropout->rate));
      z = z.cwiseProduct(cache.masks.back());
    }
    cache.inputs.push_back(std::move(z));
  }
  return cache;
}

SingleForward forward(const MlpModel& model, std::span<const double> x,
                      const std::optional<DropoutSpec>& dropout) {
  CheckDropout(dropout);
  if (x.size() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input width does not match the network input layer");
  }
  const bool use_dropout = dropout && dropout->rate > 0.0;
  std::optional<Rng> rng;
  if (use_dropout) rng.emplace(dropout->seed);

  SingleForward out;
  auto& cache = out.cache;
  cache.model_revision = model.revision;
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()));
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    cache.inputs.push_back(a.transpose());
    Eigen::VectorXd z = model.weights[l].transpose() * a;
    z += model.biases[l];
    cache.pre_activations.push_back(z.transpose());
    if (model.activations[l] == Activation::kRelu) {
      a = z.cwiseMax(0.0);
    } else {
      a = z.unaryExpr([](double v) { return Sigmoid(v); });
    }
    if (l + 1 < model.layer_count() && use_dropout) {
      cache.masks.push_back(DropoutMask(*rng, 1, a.size(), dropout->rate));
      a = a.cwiseProduct(cache.masks.back().row(0).transpose());
    }
  }
  out.probability = a[0];
  cache.probabilities = a;
  return out;
}

double bce_loss(double p, int y) {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

double batch_loss(const ForwardCache& cache, std::span<const int> labels) {
  if (static_cast<std::size_t>(cache.probabilities.size()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "label count != batch size");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    sum += bce_loss(cache.probabilities[static_cast<Eigen::Index>(i)], labels[i]);
  }
  return sum / static_cast<double>(labels.size());
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   std::span<const int> labels) {
  const std::size_t layers = model.layer_count();
  if (cache.model_revision != model.revision ||
      cache.inputs.size() != layers || cache.pre_activations.size() != layers ||
      (!cache.masks.empty() && cache.masks.size() + 1 != layers)) {
    throw Error(ErrorCode::kStaleCache,
                "forward cache does not match the current model");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (static_cast<std::size_t>(cache.inputs[l].cols()) != model.layer_dims[l]) {
      throw Error(ErrorCode::kStaleCache, "forward cache shape mismatch");
    }
  }
  const auto batch = cache.probabilities.size();
  if (static_cast<std::size_t>(batch) != labels.size() || batch == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "label count != batch size");
  }

  Gradients g;
  g.weights.resize(layers);
  g.biases.resize(layers);
  // Sigmoid + BCE: d(loss)/d(z_out) = (p - y) / batch.
  Eigen::MatrixXd delta(batch, 1);
  for (Eigen::Index i = 0; i < batch; ++i) {
    delta(i, 0) = (cache.probabilities[i] - labels[static_cast<std::size_t>(i)]) /
                  static_cast<double>(batch);
  }
  for (std::size_t l = layers; l-- > 0;) {
    g.weights[l] = cache.inputs[l].transpose() * delta;
    g.biases[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd upstream = delta * model.weights[l].transpose();
    const auto& z = cache.pre_activations[l - 1];
    upstream = upstream.cwiseProduct(
        z.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    if (!cache.masks.empty()) upstream = upstream.cwiseProduct(cache.masks[l - 1]);
    delta = std::move(upstream);
  }
  return g;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kConfig, "epochs must be at least 1");
  if (batch_size < 1) {
    throw Error(ErrorCode::kConfig, "batch_size must be at least 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw Error(ErrorCode::kConfig, "dropout_rate must be in [0, 1)");
  }
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kConfig, "learning_rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) ||
      !(epsilon > 0.0)) {
    throw Error(ErrorCode::kConfig, "invalid Adam hyperparameters");
  }
  if (early_stop_patience) {
    if (*early_stop_patience < 1) {
      throw Error(ErrorCode::kConfig, "early_stop_patience must be positive");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
      throw Error(ErrorCode::kConfig, "validation_fraction must be in (0, 1)");
    }
  }
  for (const auto h : hidden_layers) {
    if (h == 0) throw Error(ErrorCode::kConfig, "hidden layer of width 0");
  }
}

AdamState AdamState::ZerosLike(const MlpModel& model) {
  AdamState s;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const auto& w = model.weights[l];
    s.m_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    s.v_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    s.m_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    s.v_biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return s;
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
  const std::size_t layers = model.layer_count();
  if (grads.weights.size() != layers || grads.biases.size() != layers ||
      state.m_weights.size() != layers) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient/state layer mismatch");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (grads.weights[l].rows() != model.weights[l].rows() ||
        grads.weights[l].cols() != model.weights[l].cols() ||
        grads.biases[l].size() != model.biases[l].size()) {
      throw Error(ErrorCode::kDimensionMismatch, "gradient shape mismatch");
    }
  }
  if (!AllFinite(grads)) {
    throw Error(ErrorCode::kNonFinite, "non-finite gradient");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    param.array() -= cfg.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + cfg.epsilon);
  };
  for (std::size_t l = 0; l < layers; ++l) {
    update(model.weights[l], grads.weights[l], state.m_weights[l],
           state.v_weights[l]);
    update(model.biases[l], grads.biases[l], state.m_biases[l],
           state.v_biases[l]);
  }
  ++model.revision;
}

namespace {

Eigen::MatrixXd GatherRows(const FeatureMatrix& x,
                           std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) =
        x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

double MeanLoss(const MlpModel& model, const FeatureMatrix& x,
                std::span<const int> labels, std::span<const std::size_t> rows) {
  constexpr std::size_t kChunk = 512;
  double sum = 0.0;
  std::vector<int> chunk_labels;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const auto chunk = rows.subspan(start, std::min(kChunk, rows.size() - start));
    chunk_labels.clear();
    for (const auto r : chunk) chunk_labels.push_back(labels[r]);
    const auto cache = forward_batch(model, GatherRows(x, chunk));
    sum += batch_loss(cache, chunk_labels) * static_cast<double>(chunk.size());
  }
  return sum / static_cast<double>(rows.size());
}

}  // namespace

TrainResult train(MlpModel& model, const FeatureMatrix& features,
                  std::span<const int> labels, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty training set");
  if (labels.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature rows and labels differ in length");
  }
  for (const int y : labels) {
    if (y != 0 && y != 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
  }
  if (static_cast<std::size_t>(features.cols()) != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature width does not match the network input layer");
  }

  Rng shuffle_rng(DeriveSeed(cfg.seed, "shuffle"));
  Rng dropout_rng(DeriveSeed(cfg.seed, "dropout"));
  auto shuffle = [&shuffle_rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[shuffle_rng.Below(i)]);
    }
  };

  std::vector<std::size_t> train_rows(n);
  std::iota(train_rows.begin(), train_rows.end(), 0);
  std::vector<std::size_t> val_rows;
  if (cfg.early_stop_patience) {
    shuffle(train_rows);
    auto n_val = static_cast<std::size_t>(
        std::llround(cfg.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n > 1 ? n - 1 : 1);
    if (n < 2) {
      throw Error(ErrorCode::kInvalidArgument,
                  "early stopping needs at least two samples");
    }
    val_rows.assign(train_rows.end() - static_cast<std::ptrdiff_t>(n_val),
                    train_rows.end());
    train_rows.resize(n - n_val);
    std::sort(train_rows.begin(), train_rows.end());
  }

  TrainResult result;
  AdamState state = AdamState::ZerosLike(model);
  std::optional<MlpModel> best;
  double best_loss = std::numeric_limits<double>::infinity();
  int since_best = 0;
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(train_rows);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < train_rows.size(); start += batch_size) {
      const auto rows = std::span<const std::size_t>(train_rows).subspan(
          start, std::min(batch_size, train_rows.size() - start));
      batch_labels.clear();
      for (const auto r : rows) batch_labels.push_back(labels[r]);
      std::optional<DropoutSpec> dropout;
      if (cfg.dropout_rate > 0.0) {
        dropout = DropoutSpec{cfg.dropout_rate, dropout_rng.NextU64()};
      }
      const auto cache = forward_batch(model, GatherRows(features, rows), dropout);
      loss_sum += batch_loss(cache, batch_labels) * static_cast<double>(rows.size());
      adam_step(model, backward(model, cache, batch_labels), state, cfg);
      ++result.steps;
    }
    EpochStats stats;
    stats.train_loss = loss_sum / static_cast<double>(train_rows.size());
    if (cfg.early_stop_patience) {
      stats.validation_loss = MeanLoss(model, features, labels, val_rows);
      if (*stats.validation_loss < best_loss) {
        best_loss = *stats.validation_loss;
        best = model;
        result.best_epoch = epoch;
        since_best = 0;
      } else if (++since_best >= *cfg.early_stop_patience) {
        result.history.push_back(stats);
        result.stopped_early = true;
        break;
      }
    }
    result.history.push_back(stats);
  }
  if (best) {
    const auto revision = model.revision + 1;
    model = std::move(*best);
    model.revision = revision;
  }
  return result;
}

double predict_proba(const MlpModel& model, std::span<const double> x) {
  return forward(model, x).probability;
}

std::vector<double> predict_proba_batch(const MlpModel& model,
                                        const FeatureMatrix& features) {
  std::vector<double> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = predict_proba(
        model, std::span<const double>(features.row(i).data(),
                                       static_cast<std::size_t>(features.cols())));
  }
  return out;
}

}  // namespace urlsentinel
