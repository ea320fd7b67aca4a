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

#include "urlsentinel/anomaly.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

std::size_t DepthLimit(std::size_t subsample) {
  return static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(subsample))));
}

// Pairwise summation; exact for 2^k copies of one value.
double PairwiseSum(std::span<const double> v) {
  if (v.size() <= 2) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s;
  }
  std::size_t half = 1;
  while (half * 2 < v.size()) half *= 2;
  return PairwiseSum(v.first(half)) + PairwiseSum(v.subspan(half));
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::size_t depth_limit, Rng& rng)
      : x_(x), depth_limit_(depth_limit), rng_(rng) {}

  IsoTree Build(std::vector<std::size_t> rows) {
    tree_.input_dim = static_cast<std::size_t>(x_.cols());
    Grow(rows, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t Grow(std::span<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].size = rows.size();
    if (rows.size() <= 1 || depth >= depth_limit_) return id;

    // Features whose range in this node admits a value strictly inside it.
    const auto cols = static_cast<std::size_t>(x_.cols());
    lo_.assign(cols, std::numeric_limits<double>::infinity());
    hi_.assign(cols, -std::numeric_limits<double>::infinity());
    for (const auto r : rows) {
      const double* v = x_.row(static_cast<Eigen::Index>(r)).data();
      for (std::size_t f = 0; f < cols; ++f) {
        lo_[f] = std::min(lo_[f], v[f]);
        hi_[f] = std::max(hi_[f], v[f]);
      }
    }
    candidates_.clear();
    for (std::size_t f = 0; f < cols; ++f) {
      if (lo_[f] < hi_[f] && std::nextafter(lo_[f], hi_[f]) < hi_[f]) {
        candidates_.push_back(static_cast<std::int32_t>(f));
      }
    }
    if (candidates_.empty()) return id;

    const auto pick = rng_.Below(candidates_.size());
    const std::int32_t feature = candidates_[pick];
    const double lo = lo_[static_cast<std::size_t>(feature)];
    const double hi = hi_[static_cast<std::size_t>(feature)];
    double split = lo + rng_.Uniform() * (hi - lo);
    if (!(split > lo && split < hi)) split = std::nextafter(lo, hi);

    const auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return x_(static_cast<Eigen::Index>(r), feature) < split;
    });
    const auto n_left = static_cast<std::size_t>(mid - rows.begin());
    const auto left = Grow(rows.first(n_left), depth + 1);
    const auto right = Grow(rows.subspan(n_left), depth + 1);
    auto& node = tree_.nodes[id];
    node.feature = feature;
    node.split_value = split;
    node.left = left;
    node.right = right;
    return id;
  }

  const FeatureMatrix& x_;
  std::size_t depth_limit_;
  Rng& rng_;
  IsoTree tree_;
  std::vector<std::int32_t> candidates_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

}  // namespace

void ForestParams::validate() const {
  if (trees < 1) throw Error(ErrorCode::kConfig, "forest needs at least one tree");
  if (psi < 2) throw Error(ErrorCode::kConfig, "psi must be at least 2");
}

void AnomalyConfig::validate() const {
  if (!(contamination >= 0.0 && contamination < 0.5)) {
    throw Error(ErrorCode::kConfig, "contamination must be in [0, 0.5)");
  }
}

IsolationForestModel fit_forest(const FeatureMatrix& features,
                                const ForestParams& params) {
  params.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (n < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "isolation forest needs at least two samples");
  }
  IsolationForestModel model;
  model.psi = params.psi;
  model.seed = params.seed;
  model.input_dim = static_cast<std::size_t>(features.cols());
  model.subsample_size = std::min(params.psi, n);
  const auto depth_limit = DepthLimit(model.subsample_size);

  std::vector<std::size_t> all(n);
  model.trees.reserve(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(DeriveSeed(params.seed, static_cast<std::uint64_t>(t)));
    // Partial Fisher-Yates: the first subsample_size slots are the draw.
    std::iota(all.begin(), all.end(), 0);
    for (std::size_t i = 0; i < model.subsample_size; ++i) {
      std::swap(all[i], all[i + rng.Below(n - i)]);
    }
    std::vector<std::size_t> rows(all.begin(),
                                  all.begin() + static_cast<std::ptrdiff_t>(
                                                    model.subsample_size));
    model.trees.push_back(TreeBuilder(features, depth_limit, rng).Build(rows));
  }
  return model;
}

double avg_path_c(std::size_t n) {
  if (n <= 1) return 0.0;
  const double nd = static_cast<double>(n);
  return 2.0 * (std::log(nd - 1.0) + kEulerGamma) - 2.0 * (nd - 1.0) / nd;
}

double path_length(std::span<const double> x, const IsoTree& tree) {
  if (x.size() != tree.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample dimension does not match the isolation tree");
  }
  if (tree.nodes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty isolation tree");
  }
  std::size_t depth = 0;
  const IsoNode* node = &tree.nodes[0];
  while (!node->is_leaf()) {
    const auto next = x[static_cast<std::size_t>(node->feature)] < node->split_value
                          ? node->left
                          : node->right;
    node = &tree.nodes[static_cast<std::size_t>(next)];
    ++depth;
  }
  return static_cast<double>(depth) + avg_path_c(node->size);
}

double anomaly_score(std::span<const double> x,
                     const IsolationForestModel& model) {
  if (model.trees.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "isolation forest has no trees");
  }
  std::vector<double> lengths;
  lengths.reserve(model.trees.size());
  for (const auto& tree : model.trees) lengths.push_back(path_length(x, tree));
  const double mean =
      PairwiseSum(lengths) / static_cast<double>(lengths.size());
  return std::exp2(-mean / avg_path_c(model.subsample_size));
}

std::vector<double> anomaly_scores(const FeatureMatrix& features,
                                   const IsolationForestModel& model) {
  std::vector<double> scores(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    scores[static_cast<std::size_t>(i)] = anomaly_score(
        std::span<const double>(features.row(i).data(),
                                static_cast<std::size_t>(features.cols())),
        model);
  }
  return scores;
}

std::size_t outlier_removal_count(double contamination, std::size_t n) {
  const double raw = contamination * static_cast<double>(n);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(raw - 1e-9)));
}

FilterResult filter_outliers(const FeatureMatrix& features, const Labels& labels,
                             const IsolationForestModel& model,
                             const AnomalyConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature rows and labels differ in length");
  }
  if (static_cast<std::size_t>(features.cols()) != model.input_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "forest was fitted on a different feature dimension");
  }
  FilterResult out;
  out.scores = anomaly_scores(features, model);
  const auto remove = outlier_removal_count(cfg.contamination, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return out.scores[a] > out.scores[b];
  });
  out.removed_indices.assign(order.begin(),
                             order.begin() + static_cast<std::ptrdiff_t>(remove));

  std::vector<char> dropped(n, 0);
  for (const auto i : out.removed_indices) dropped[i] = 1;
  out.kept_features.resize(static_cast<Eigen::Index>(n - remove), features.cols());
  out.kept_labels.reserve(n - remove);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (dropped[i]) continue;
    out.kept_features.row(row++) = features.row(static_cast<Eigen::Index>(i));
    out.kept_labels.push_back(labels[i]);
  }
  return out;
}

}  // namespace urlsentinel
