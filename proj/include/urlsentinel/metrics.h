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

#ifndef URLSENTINEL_METRICS_H_
#define URLSENTINEL_METRICS_H_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace urlsentinel {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// A sample is predicted positive iff score >= threshold.
ConfusionMatrix confusion_at_threshold(std::span<const double> scores,
                                       std::span<const int> labels,
                                       double threshold);

struct ThresholdMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the metric's denominator was zero and 0 was reported instead.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
};

// Throws Error(kInvalidArgument) on an empty matrix.
ThresholdMetrics classification_metrics(const ConfusionMatrix& cm);

// Mann-Whitney formulation with ties counted one half, O(n log n).
// Throws Error(kInvalidArgument) unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

// (0,0), then one point per distinct score from the highest down; ends (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels);

// Trapezoidal area under a curve sorted by fpr.
double curve_area(std::span<const RocPoint> curve);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  ConfusionMatrix confusion;
  double threshold = 0.5;
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  bool f1_degenerate = false;
  bool roc_auc_degenerate = false;

  // "key: value" lines.
  std::string to_text() const;
  std::string to_json() const;
  std::vector<std::pair<std::string, double>> snapshot() const;
};

MetricsReport evaluate(std::span<const double> scores,
                       std::span<const int> labels, double threshold = 0.5);

}  // namespace urlsentinel

#endif  // URLSENTINEL_METRICS_H_
