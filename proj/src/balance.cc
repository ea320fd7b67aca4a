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

#include "urlsentinel/balance.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

double SquaredDistance(const FeatureMatrix& m, std::size_t a, std::size_t b) {
  const auto ra = m.row(static_cast<Eigen::Index>(a));
  const auto rb = m.row(static_cast<Eigen::Index>(b));
  double sum = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double d = ra[j] - rb[j];
    sum += d * d;
  }
  return sum;
}

}  // namespace

void SmoteConfig::validate() const {
  if (k_neighbors < 1) {
    throw Error(ErrorCode::kConfig, "k_neighbors must be at least 1");
  }
  if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
    throw Error(ErrorCode::kConfig, "target_ratio must be in (0, 1]");
  }
}

std::vector<std::size_t> knn_minority(const FeatureMatrix& minority,
                                      std::size_t self_index, std::size_t k) {
  const auto m = static_cast<std::size_t>(minority.rows());
  if (m < k + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "SMOTE needs at least k + 1 minority samples");
  }
  if (self_index >= m) {
    throw Error(ErrorCode::kInvalidArgument, "self index out of range");
  }
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (j == self_index) continue;
    dist.emplace_back(SquaredDistance(minority, self_index, j), j);
  }
  // Pairs compare by distance, then index: the tie rule.
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k),
                    dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

FeatureVector smote_interpolate(const Eigen::Ref<const FeatureVector>& x,
                                const Eigen::Ref<const FeatureVector>& neighbor,
                                double lambda) {
  FeatureVector s(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    s[j] = x[j] + lambda * (neighbor[j] - x[j]);
  }
  return s;
}

SmoteResult smote_resample(const FeatureMatrix& features, const Labels& labels,
                           const SmoteConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature rows and labels differ in length");
  }
  std::size_t positives = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "SMOTE needs samples from both classes");
  }

  SmoteResult result;
  result.minority_label = positives <= negatives ? 1 : 0;
  const std::size_t minority_count = std::min(positives, negatives);
  const std::size_t majority_count = std::max(positives, negatives);
  const auto target = static_cast<std::size_t>(
      std::llround(cfg.target_ratio * static_cast<double>(majority_count)));
  const std::size_t needed = target > minority_count ? target - minority_count : 0;

  result.features = features;
  result.labels = labels;
  if (needed == 0) {
    spdlog::info("SMOTE: class counts {}/{} already meet ratio {}, no-op",
                 negatives, positives, cfg.target_ratio);
    return result;
  }
  const auto k = static_cast<std::size_t>(cfg.k_neighbors);
  if (minority_count < k + 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "SMOTE needs at least k_neighbors + 1 minority samples");
  }

  std::vector<std::size_t> minority_rows;
  minority_rows.reserve(minority_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == result.minority_label) minority_rows.push_back(i);
  }
  FeatureMatrix minority(static_cast<Eigen::Index>(minority_count),
                         features.cols());
  for (std::size_t i = 0; i < minority_count; ++i) {
    minority.row(static_cast<Eigen::Index>(i)) =
        features.row(static_cast<Eigen::Index>(minority_rows[i]));
  }

  result.features.conservativeResize(
      static_cast<Eigen::Index>(labels.size() + needed), Eigen::NoChange);
  result.audit.reserve(needed);
  std::unordered_map<std::size_t, std::vector<std::size_t>> neighbor_cache;
  Rng rng(cfg.seed);
  for (std::size_t s = 0; s < needed; ++s) {
    const std::size_t base = rng.Below(minority_count);
    auto [it, inserted] = neighbor_cache.try_emplace(base);
    if (inserted) it->second = knn_minority(minority, base, k);
    const std::size_t neighbor = it->second[rng.Below(k)];
    const double lambda = rng.Uniform();

    const auto row = static_cast<Eigen::Index>(labels.size() + s);
    result.features.row(row) =
        smote_interpolate(minority.row(static_cast<Eigen::Index>(base)).transpose(),
                          minority.row(static_cast<Eigen::Index>(neighbor)).transpose(),
                          lambda)
            .transpose();
    result.labels.push_back(result.minority_label);
    result.audit.push_back({minority_rows[base], minority_rows[neighbor], lambda});
  }
  result.synthetic_count = needed;
  spdlog::info("SMOTE: generated {} synthetic samples for class {}", needed,
               result.minority_label);
  return result;
}

}  // namespace urlsentinel
