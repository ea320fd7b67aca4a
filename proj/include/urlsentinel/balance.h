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

#ifndef URLSENTINEL_BALANCE_H_
#define URLSENTINEL_BALANCE_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "urlsentinel/types.h"

namespace urlsentinel {

struct SmoteConfig {
  int k_neighbors = 5;
  // Desired minority/majority ratio after resampling; 1.0 = full balance.
  double target_ratio = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Indices (rows of `minority`) of the k nearest neighbours of row
// `self_index` by Euclidean distance, the row itself excluded. Ties go to
// the lower index. Throws Error(kInvalidArgument) when fewer than k + 1
// rows exist.
std::vector<std::size_t> knn_minority(const FeatureMatrix& minority,
                                      std::size_t self_index, std::size_t k);

// Provenance of one synthetic row: sample = x + lambda * (neighbor - x),
// where x and neighbor are row indices into the input feature matrix.
struct SmoteAuditEntry {
  std::size_t base_index = 0;
  std::size_t neighbor_index = 0;
  double lambda = 0.0;
};

struct SmoteResult {
  FeatureMatrix features;  // originals first, synthetic rows appended
  Labels labels;
  std::size_t synthetic_count = 0;
  int minority_label = 1;
  std::vector<SmoteAuditEntry> audit;  // one entry per synthetic row
};

// The interpolation step, exposed so auditors can recompute it exactly.
FeatureVector smote_interpolate(const Eigen::Ref<const FeatureVector>& x,
                                const Eigen::Ref<const FeatureVector>& neighbor,
                                double lambda);

// Oversamples the minority class until minority/majority reaches
// target_ratio. Balanced input comes back unchanged.
SmoteResult smote_resample(const FeatureMatrix& features, const Labels& labels,
                           const SmoteConfig& cfg);

}  // namespace urlsentinel

#endif  // URLSENTINEL_BALANCE_H_
