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

#ifndef URLSENTINEL_ANOMALY_H_
#define URLSENTINEL_ANOMALY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "urlsentinel/types.h"

namespace urlsentinel {

inline constexpr double kEulerGamma = 0.57721566490153286060;

// Flattened isolation tree node. Leaves have feature == -1.
struct IsoNode {
  std::int32_t feature = -1;
  double split_value = 0.0;
  std::int32_t left = -1;   // child for x[feature] < split_value
  std::int32_t right = -1;  // child for x[feature] >= split_value
  std::uint64_t size = 0;   // training points that reached the node

  bool is_leaf() const { return feature < 0; }
  bool operator==(const IsoNode&) const = default;
};

// Root is nodes[0].
struct IsoTree {
  std::size_t input_dim = 0;
  std::vector<IsoNode> nodes;

  bool operator==(const IsoTree&) const = default;
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t psi = 256;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IsolationForestModel {
  std::vector<IsoTree> trees;
  std::size_t psi = 256;
  // min(psi, n) at fit time; drives the depth limit and the normaliser.
  std::size_t subsample_size = 0;
  std::uint64_t seed = 0;
  std::size_t input_dim = 0;

  bool operator==(const IsolationForestModel&) const = default;
};

// Throws Error(kInvalidArgument) for fewer than two rows.
IsolationForestModel fit_forest(const FeatureMatrix& features,
                                const ForestParams& params);

// Average unsuccessful-search path length in a BST of n nodes:
// c(n) = 2 H(n-1) - 2 (n-1) / n with H(i) = ln(i) + gamma, and c(1) = 0.
double avg_path_c(std::size_t n);

// Depth of the leaf reached by x plus c(leaf size).
double path_length(std::span<const double> x, const IsoTree& tree);

// s(x) = 2^(-E[h(x)] / c(subsample_size)); close to 1 means anomalous.
double anomaly_score(std::span<const double> x,
                     const IsolationForestModel& model);

std::vector<double> anomaly_scores(const FeatureMatrix& features,
                                   const IsolationForestModel& model);

struct AnomalyConfig {
  double contamination = 0.05;

  void validate() const;
};

struct FilterResult {
  FeatureMatrix kept_features;
  Labels kept_labels;
  // In removal order: highest score first, lower index first on ties.
  std::vector<std::size_t> removed_indices;
  std::vector<double> scores;
};

// Drops exactly ceil(contamination * n) highest-scoring rows. Training data
// only; evaluation sets must never pass through here.
FilterResult filter_outliers(const FeatureMatrix& features, const Labels& labels,
                             const IsolationForestModel& model,
                             const AnomalyConfig& cfg);

std::size_t outlier_removal_count(double contamination, std::size_t n);

}  // namespace urlsentinel

#endif  // URLSENTINEL_ANOMALY_H_
