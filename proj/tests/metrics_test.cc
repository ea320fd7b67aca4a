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

#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "oracles.h"
#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

struct Sample {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Scores on a coarse grid so ties are common.
Sample RandomSample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    s.scores.push_back(static_cast<double>(rng.Below(50)) / 49.0);
    s.labels.push_back(static_cast<int>(rng.Below(2)));
  }
  s.labels[0] = 0;
  s.labels[1] = 1;
  return s;
}

TEST(ConfusionTest, Basics) {
  const std::vector<double> scores{0.9, 0.1};
  const std::vector<int> labels{1, 0};
  EXPECT_EQ(confusion_at_threshold(scores, labels, 0.5), (ConfusionMatrix{1, 1, 0, 0}));
  const auto all = confusion_at_threshold(scores, labels, 0.0);
  EXPECT_EQ(all.fp, 1u);
  EXPECT_EQ(all.tp, 1u);
  const std::vector<double> edge{0.5};
  const std::vector<int> pos{1};
  EXPECT_EQ(confusion_at_threshold(edge, pos, 0.5).tp, 1u);
}

TEST(ConfusionTest, MatchesLoopOracleAndIsMonotone) {
  const Sample s = RandomSample(1000, 3);
  ConfusionMatrix prev{};
  for (int t = 100; t >= 0; --t) {
    const double th = t / 100.0;
    ConfusionMatrix oracle;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
      const bool pred = s.scores[i] >= th;
      if (pred && s.labels[i] == 1) ++oracle.tp;
      if (pred && s.labels[i] == 0) ++oracle.fp;
      if (!pred && s.labels[i] == 0) ++oracle.tn;
      if (!pred && s.labels[i] == 1) ++oracle.fn;
    }
    const ConfusionMatrix cm = confusion_at_threshold(s.scores, s.labels, th);
    EXPECT_EQ(cm, oracle);
    EXPECT_GE(cm.tp, prev.tp);
    EXPECT_GE(cm.fp, prev.fp);
    prev = cm;
  }
}

TEST(ConfusionTest, LengthMismatch) {
  const std::vector<double> scores{0.1, 0.2};
  const std::vector<int> labels{1};
  EXPECT_THROW(confusion_at_threshold(scores, labels, 0.5), Error);
}

TEST(ClassificationMetricsTest, ReferenceCounts) {
  ConfusionMatrix cm;
  cm.tp = 5247;
  cm.fn = 47;
  cm.tn = 14416;
  cm.fp = 485;
  const ThresholdMetrics m = classification_metrics(cm);
  EXPECT_NEAR(m.accuracy, 0.9736568457538994, 1e-12);
  EXPECT_NEAR(m.precision, 0.915387299371947, 1e-12);
  EXPECT_NEAR(m.recall, 0.9911220249338875, 1e-12);
  EXPECT_NEAR(m.f1, 0.951750408126247, 1e-12);
  EXPECT_NEAR(m.accuracy, 0.97366, 1e-5);
  EXPECT_NEAR(m.precision, 0.91539, 1e-5);
  EXPECT_NEAR(m.recall, 0.99112, 1e-5);
  EXPECT_NEAR(m.f1, 0.95175, 1e-5);
}

TEST(ClassificationMetricsTest, PerfectAndDegenerate) {
  const ThresholdMetrics perfect = classification_metrics({10, 5, 0, 0});
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.precision, 1.0);
  EXPECT_EQ(perfect.recall, 1.0);
  EXPECT_EQ(perfect.f1, 1.0);

  const ThresholdMetrics none = classification_metrics({0, 5, 0, 3});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_TRUE(none.precision_degenerate);
  EXPECT_FALSE(none.recall_degenerate);
  EXPECT_TRUE(none.f1_degenerate);
  EXPECT_THROW(classification_metrics({}), Error);
}

TEST(AucTest, SimpleCases) {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  EXPECT_EQ(roc_auc(scores, labels), 1.0);
  const std::vector<double> ties(4, 0.3);
  EXPECT_EQ(roc_auc(ties, labels), 0.5);
  const std::vector<int> one_class(4, 1);
  EXPECT_THROW(roc_auc(scores, one_class), Error);
}

TEST(AucTest, MatchesPairwiseOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = RandomSample(500, seed);
    EXPECT_NEAR(roc_auc(s.scores, s.labels),
                testing::PairwiseAuc(s.scores, s.labels), 1e-12);
  }
}

TEST(AucTest, ComplementSymmetry) {
  const Sample s = RandomSample(300, 9);
  std::vector<int> flipped;
  for (const int y : s.labels) flipped.push_back(1 - y);
  EXPECT_NEAR(roc_auc(s.scores, s.labels) + roc_auc(s.scores, flipped), 1.0, 1e-12);
}

TEST(RocCurveTest, ShapeAndArea) {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> labels{1, 1, 0, 0};
  const auto curve = roc_curve(scores, labels);
  EXPECT_EQ(curve.front(), (RocPoint{0.0, 0.0}));
  EXPECT_EQ(curve.back(), (RocPoint{1.0, 1.0}));
  EXPECT_NE(std::find(curve.begin(), curve.end(), RocPoint{0.0, 1.0}), curve.end());

  const std::vector<double> ties(4, 0.3);
  const auto flat = roc_curve(ties, labels);
  ASSERT_EQ(flat.size(), 2u);
  EXPECT_EQ(curve_area(flat), 0.5);
}

TEST(RocCurveTest, TrapezoidEqualsRankAuc) {
  for (std::uint64_t seed = 30; seed < 40; ++seed) {
    const Sample s = RandomSample(700, seed);
    EXPECT_NEAR(curve_area(roc_curve(s.scores, s.labels)),
                roc_auc(s.scores, s.labels), 1e-12);
  }
}

TEST(ReportTest, EvaluateAndSerialize) {
  const std::vector<double> scores{0.9, 0.7, 0.4, 0.2, 0.6};
  const std::vector<int> labels{1, 1, 1, 0, 0};
  const MetricsReport r = evaluate(scores, labels);
  EXPECT_EQ(r.confusion, (ConfusionMatrix{2, 1, 1, 1}));
  EXPECT_NEAR(r.accuracy, 0.6, 1e-15);
  EXPECT_NEAR(r.roc_auc, 5.0 / 6.0, 1e-15);
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["confusion"]["tp"], 2);
  EXPECT_NEAR(j["roc_auc"].get<double>(), 5.0 / 6.0, 1e-15);
  EXPECT_NE(r.to_text().find("accuracy: 0.6"), std::string::npos);
  bool found = false;
  for (const auto& [k, v] : r.snapshot()) found |= k == "f1";
  EXPECT_TRUE(found);
}

TEST(ReportTest, SingleClassAucFlagged) {
  const std::vector<double> scores{0.9, 0.7};
  const std::vector<int> labels{1, 1};
  const MetricsReport r = evaluate(scores, labels);
  EXPECT_EQ(r.roc_auc, 0.0);
  EXPECT_TRUE(r.roc_auc_degenerate);
}

}  // namespace
}  // namespace urlsentinel
