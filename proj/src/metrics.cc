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

#include "urlsentinel/metrics.h"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

void CheckLengths(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "scores and labels differ in length");
  }
  if (scores.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no samples to evaluate");
  }
}

std::pair<std::uint64_t, std::uint64_t> ClassCounts(std::span<const int> labels) {
  std::uint64_t pos = 0;
  for (const int y : labels) {
    if (y != 0 && y != 1) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be 0 or 1");
    }
    pos += static_cast<std::uint64_t>(y);
  }
  return {pos, labels.size() - pos};
}

// Indices ordered by descending score.
std::vector<std::size_t> DescendingOrder(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

double Ratio(std::uint64_t num, std::uint64_t den, bool* degenerate) {
  if (den == 0) {
    *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion_at_threshold(std::span<const double> scores,
                                       std::span<const int> labels,
                                       double threshold) {
  CheckLengths(scores, labels);
  ClassCounts(labels);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? cm.tp : cm.fn);
    } else {
      ++(predicted ? cm.fp : cm.tn);
    }
  }
  return cm;
}

ThresholdMetrics classification_metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty confusion matrix");
  }
  ThresholdMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.precision = Ratio(cm.tp, cm.tp + cm.fp, &m.precision_degenerate);
  m.recall = Ratio(cm.tp, cm.tp + cm.fn, &m.recall_degenerate);
  if (m.precision + m.recall == 0.0) {
    m.f1 = 0.0;
    m.f1_degenerate = true;
  } else {
    m.f1 = 2.0 * (m.precision * m.recall) / (m.precision + m.recall);
  }
  return m;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  CheckLengths(scores, labels);
  const auto [pos, neg] = ClassCounts(labels);
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ROC-AUC needs both classes");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based average ranks of the positives.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(std::span<const double> scores,
                                std::span<const int> labels) {
  CheckLengths(scores, labels);
  const auto [pos, neg] = ClassCounts(labels);
  if (pos == 0 || neg == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ROC curve needs both classes");
  }
  const auto order = DescendingOrder(scores);
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      ++(labels[order[i]] == 1 ? tp : fp);
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                     static_cast<double>(tp) / static_cast<double>(pos)});
  }
  return curve;
}

double curve_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) *
            (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

MetricsReport evaluate(std::span<const double> scores,
                       std::span<const int> labels, double threshold) {
  MetricsReport r;
  r.threshold = threshold;
  r.confusion = confusion_at_threshold(scores, labels, threshold);
  const auto m = classification_metrics(r.confusion);
  r.accuracy = m.accuracy;
  r.precision = m.precision;
  r.recall = m.recall;
  r.f1 = m.f1;
  r.precision_degenerate = m.precision_degenerate;
  r.recall_degenerate = m.recall_degenerate;
  r.f1_degenerate = m.f1_degenerate;
  const auto [pos, neg] = ClassCounts(labels);
  if (pos == 0 || neg == 0) {
    r.roc_auc_degenerate = true;
  } else {
    r.roc_auc = roc_auc(scores, labels);
  }
  return r;
}

std::vector<std::pair<std::string, double>> MetricsReport::snapshot() const {
  return {{"accuracy", accuracy},
          {"precision", precision},
          {"recall", recall},
          {"f1", f1},
          {"roc_auc", roc_auc},
          {"threshold", threshold},
          {"tp", static_cast<double>(confusion.tp)},
          {"tn", static_cast<double>(confusion.tn)},
          {"fp", static_cast<double>(confusion.fp)},
          {"fn", static_cast<double>(confusion.fn)}};
}

std::string MetricsReport::to_text() const {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed;
  os << "accuracy: " << accuracy << '\n'
     << "precision: " << precision << (precision_degenerate ? " (degenerate)" : "")
     << '\n'
     << "recall: " << recall << (recall_degenerate ? " (degenerate)" : "") << '\n'
     << "f1: " << f1 << (f1_degenerate ? " (degenerate)" : "") << '\n'
     << "roc_auc: " << roc_auc << (roc_auc_degenerate ? " (degenerate)" : "")
     << '\n'
     << "threshold: " << threshold << '\n'
     << "tp: " << confusion.tp << '\n'
     << "tn: " << confusion.tn << '\n'
     << "fp: " << confusion.fp << '\n'
     << "fn: " << confusion.fn << '\n';
  return os.str();
}

std::string MetricsReport::to_json() const {
  nlohmann::json j = {
      {"accuracy", accuracy},
      {"precision", precision},
      {"recall", recall},
      {"f1", f1},
      {"roc_auc", roc_auc},
      {"threshold", threshold},
      {"confusion",
       {{"tp", confusion.tp}, {"tn", confusion.tn}, {"fp", confusion.fp},
        {"fn", confusion.fn}}},
      {"degenerate",
       {{"precision", precision_degenerate},
        {"recall", recall_degenerate},
        {"f1", f1_degenerate},
        {"roc_auc", roc_auc_degenerate}}}};
  return j.dump(2);
}

}  // namespace urlsentinel
