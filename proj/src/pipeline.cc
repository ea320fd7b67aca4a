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

#include "urlsentinel/pipeline.h"

#include <chrono>
#include <fstream>
#include <sstream>
#include <utility>

#include <spdlog/spdlog.h>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
auto RunStage(std::string_view stage, std::vector<StageTiming>& timings, Fn&& fn) {
  const auto start = Clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings.push_back({std::string(stage), SecondsSince(start)});
    } else {
      auto out = fn();
      timings.push_back({std::string(stage), SecondsSince(start)});
      return out;
    }
  } catch (const Error& e) {
    throw Error(e.code(), "[" + std::string(stage) + "] " + e.what());
  }
}

std::vector<NormalizedUrl> NormalizeAll(const Dataset& ds, std::size_t max_len) {
  std::vector<NormalizedUrl> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    try {
      out.push_back(normalize_url(ds.records[i].url, max_len));
    } catch (const Error& e) {
      throw Error(e.code(), "record " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::with_derived_seeds() const {
  PipelineConfig c = *this;
  c.split.seed = DeriveSeed(seed, "split");
  c.smote.seed = DeriveSeed(seed, "smote");
  c.forest.seed = DeriveSeed(seed, "forest");
  c.train.seed = DeriveSeed(seed, "train");
  return c;
}

void PipelineConfig::validate() const {
  vectorizer.validate();
  smote.validate();
  anomaly.validate();
  forest.validate();
  train.validate();
  split.validate();
}

double PipelineResult::training_seconds() const {
  double total = 0.0;
  for (const auto& t : timings) {
    if (t.stage != "evaluate") total += t.seconds;
  }
  return total;
}

PipelineResult train_pipeline(const Dataset& dataset, const PipelineConfig& config) {
  config.validate();
  const PipelineConfig cfg = config.with_derived_seeds();
  if (dataset.count_label(0) == 0 || dataset.count_label(1) == 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "[split] training data must contain both classes");
  }
  PipelineResult result;
  auto& timings = result.timings;

  auto [train_ds, test_ds] = RunStage("split", timings, [&] {
    return stratified_split(dataset, cfg.split);
  });
  result.train_size = train_ds.size();
  result.test_size = test_ds.size();
  spdlog::info("split: {} train / {} test", train_ds.size(), test_ds.size());

  FeatureScaler scaler;
  FeatureMatrix x_train;
  FeatureMatrix x_test;
  RunStage("featurize", timings, [&] {
    const auto train_urls = NormalizeAll(train_ds, cfg.vectorizer.max_len);
    const auto test_urls = NormalizeAll(test_ds, cfg.vectorizer.max_len);
    std::vector<StatFeatures> stats;
    stats.reserve(train_urls.size());
    for (const auto& u : train_urls) stats.push_back(stat_features(u));
    scaler = fit_scaler(stats);
    x_train = featurize_batch(train_urls, cfg.vectorizer, scaler);
    x_test = featurize_batch(test_urls, cfg.vectorizer, scaler);
  });

  auto balanced = RunStage("smote", timings, [&] {
    return smote_resample(x_train, train_ds.labels(), cfg.smote);
  });
  result.synthetic_added = balanced.synthetic_count;
  x_train.resize(0, 0);

  std::optional<IsolationForestModel> forest;
  FeatureMatrix fit_x;
  Labels fit_y;
  RunStage("outlier_filter", timings, [&] {
    if (!cfg.filter_outliers) {
      fit_x = std::move(balanced.features);
      fit_y = std::move(balanced.labels);
      return;
    }
    forest = fit_forest(balanced.features, cfg.forest);
    auto filtered =
        filter_outliers(balanced.features, balanced.labels, *forest, cfg.anomaly);
    result.outliers_removed = filtered.removed_indices.size();
    fit_x = std::move(filtered.kept_features);
    fit_y = std::move(filtered.kept_labels);
    spdlog::info("outlier filter: removed {} of {} training rows",
                 result.outliers_removed, balanced.labels.size());
  });
  result.fitted_rows = fit_y.size();

  MlpModel network;
  RunStage("train", timings, [&] {
    std::vector<std::size_t> dims{feature_dim(cfg.vectorizer)};
    dims.insert(dims.end(), cfg.train.hidden_layers.begin(),
                cfg.train.hidden_layers.end());
    dims.push_back(1);
    network = init_weights(dims, DeriveSeed(cfg.train.seed, "init"));
    result.training = train(network, fit_x, fit_y, cfg.train);
    for (std::size_t e = 0; e < result.training.history.size(); ++e) {
      spdlog::info("epoch {}: train loss {:.6f}", e + 1,
                   result.training.history[e].train_loss);
    }
  });

  RunStage("evaluate", timings, [&] {
    result.test_scores = predict_proba_batch(network, x_test);
    result.test_labels = test_ds.labels();
    result.test_metrics = evaluate(result.test_scores, result.test_labels);
  });

  auto& bundle = result.bundle;
  bundle.vectorizer = cfg.vectorizer;
  bundle.scaler = scaler;
  bundle.network = std::move(network);
  if (cfg.keep_forest) bundle.forest = std::move(forest);
  bundle.metadata.created_at = cfg.created_at;
  if (cfg.corpus_description.empty()) {
    std::ostringstream os;
    os << dataset.size() << " urls (" << dataset.count_label(0) << " benign, "
       << dataset.count_label(1) << " malicious), seed " << cfg.seed;
    bundle.metadata.corpus_description = os.str();
  } else {
    bundle.metadata.corpus_description = cfg.corpus_description;
  }
  bundle.metadata.metrics = result.test_metrics.snapshot();
  bundle.network.revision = 0;
  return result;
}

PredictionResult classify_url(std::string_view raw, const ModelBundle& bundle) {
  const auto start = Clock::now();
  std::optional<NormalizedUrl> url;
  try {
    url = normalize_url(raw, bundle.vectorizer.max_len);
  } catch (const Error&) {
    throw Error(ErrorCode::kDegenerateInput,
                "the URL is empty once whitespace and control characters are "
                "removed");
  }
  PredictionResult r;
  r.url = std::string(raw);
  r.stats = stat_features(*url);
  const auto x = featurize(*url, bundle.vectorizer, bundle.scaler);
  r.score = predict_proba(
      bundle.network,
      std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  r.label = r.score >= 0.5 ? 1 : 0;
  r.latency_us = std::chrono::duration<double, std::micro>(Clock::now() - start).count();
  return r;
}

BatchResult classify_lines(std::string_view body, const ModelBundle& bundle) {
  BatchResult out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    auto line = body.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      out.errors.push_back({line_no, "blank line"});
      continue;
    }
    try {
      out.results.push_back(classify_url(line, bundle));
    } catch (const Error& e) {
      out.errors.push_back({line_no, e.what()});
    }
  }
  return out;
}

BatchResult classify_batch(const std::string& path, const ModelBundle& bundle) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read URL list " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return classify_lines(buffer.str(), bundle);
}

MetricsReport evaluate_bundle(const Dataset& dataset, const ModelBundle& bundle,
                              double threshold) {
  std::vector<double> scores;
  scores.reserve(dataset.size());
  for (const auto& r : dataset.records) {
    scores.push_back(classify_url(r.url, bundle).score);
  }
  return evaluate(scores, dataset.labels(), threshold);
}

}  // namespace urlsentinel
