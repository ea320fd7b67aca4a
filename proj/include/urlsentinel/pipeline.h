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

#ifndef URLSENTINEL_PIPELINE_H_
#define URLSENTINEL_PIPELINE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "urlsentinel/anomaly.h"
#include "urlsentinel/balance.h"
#include "urlsentinel/ingest.h"
#include "urlsentinel/metrics.h"
#include "urlsentinel/model_store.h"
#include "urlsentinel/neuralnet.h"
#include "urlsentinel/url_features.h"

namespace urlsentinel {

struct PipelineConfig {
  VectorizerConfig vectorizer;
  SmoteConfig smote;
  AnomalyConfig anomaly;
  ForestParams forest;
  TrainConfig train;
  SplitConfig split;
  bool filter_outliers = true;
  bool keep_forest = true;  // persist the forest in the bundle
  std::uint64_t seed = 42;
  // Copied into bundle metadata; left empty the bundle bytes depend only on
  // (dataset, config, seed).
  std::string created_at;
  std::string corpus_description;

  // Component seeds become DeriveSeed(seed, "<component>").
  PipelineConfig with_derived_seeds() const;
  void validate() const;
};

// Stage names in execution order.
inline constexpr std::string_view kPipelineStages[] = {
    "split", "featurize", "smote", "outlier_filter", "train", "evaluate"};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct PipelineResult {
  ModelBundle bundle;
  MetricsReport test_metrics;
  std::vector<StageTiming> timings;  // in execution order
  std::size_t train_size = 0;        // after the split
  std::size_t test_size = 0;
  std::size_t synthetic_added = 0;
  std::size_t outliers_removed = 0;
  std::size_t fitted_rows = 0;  // rows the network trained on
  TrainResult training;
  std::vector<double> test_scores;
  Labels test_labels;

  double training_seconds() const;
};

// split -> featurize (scaler fit on train only) -> SMOTE(train) -> forest
// filter(train) -> network -> evaluate on the untouched test split.
// Stage failures are rethrown with the stage name prefixed.
PipelineResult train_pipeline(const Dataset& dataset, const PipelineConfig& cfg);

struct PredictionResult {
  std::string url;
  int label = 0;
  double score = 0.0;
  StatFeatures stats;
  double latency_us = 0.0;

  std::string_view label_name() const {
    return label == 1 ? "malicious" : "benign";
  }
};

// Throws Error(kDegenerateInput) with a display-ready message.
PredictionResult classify_url(std::string_view raw, const ModelBundle& bundle);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct BatchResult {
  std::vector<PredictionResult> results;
  std::vector<LineError> errors;
};

BatchResult classify_lines(std::string_view body, const ModelBundle& bundle);

// Throws Error(kIo) when the file cannot be read.
BatchResult classify_batch(const std::string& path, const ModelBundle& bundle);

// Scores an already-labelled dataset with the bundle (no filtering).
MetricsReport evaluate_bundle(const Dataset& dataset, const ModelBundle& bundle,
                              double threshold = 0.5);

}  // namespace urlsentinel

#endif  // URLSENTINEL_PIPELINE_H_
