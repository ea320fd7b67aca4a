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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>
#include <unistd.h>

#include "oracles.h"
#include "urlsentinel/anomaly.h"
#include "urlsentinel/balance.h"
#include "urlsentinel/bench.h"
#include "urlsentinel/errors.h"
#include "urlsentinel/ingest.h"
#include "urlsentinel/metrics.h"
#include "urlsentinel/model_store.h"
#include "urlsentinel/neuralnet.h"
#include "urlsentinel/pipeline.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

// Gradient oracle.
constexpr int kGradNets = 20;
constexpr std::size_t kGradMaxDim = 8;
constexpr std::size_t kGradMaxBatch = 8;
constexpr double kGradStep = 1e-5;
constexpr double kGradMaxRelError = 1e-4;
constexpr double kGradSeconds = 10.0;

// SMOTE geometry.
constexpr std::size_t kSmoteMajority = 400;
constexpr std::size_t kSmoteMinority = 100;
constexpr double kSmoteSeconds = 5.0;

// Isolation Forest.
constexpr int kForestSeeds = 5;
constexpr double kForestMinAuc = 0.9;
constexpr double kForestSeconds = 10.0;

// Metric oracles.
constexpr double kTableTolerance = 1e-5;
constexpr int kAucInstances = 50;
constexpr std::size_t kAucSamples = 500;
constexpr double kAucTolerance = 1e-12;
constexpr double kMetricSeconds = 10.0;

// End to end.
constexpr std::size_t kDeskPerClass = 6000;
constexpr std::uint64_t kDeskSeed = 42;
constexpr double kMinAccuracy = 0.95;
constexpr double kMinRocAuc = 0.96;
constexpr double kMaxTrainSeconds = 120.0;

// Latency.
constexpr std::size_t kLatencyCalls = 1000;
constexpr std::size_t kLatencyWarmup = 100;
constexpr double kMaxP95Ms = 20.0;
constexpr double kLatencyIndependence = 0.20;

// Persistence.
constexpr std::size_t kProbeUrls = 100;
constexpr int kCorruptionTrials = 1000;

// Vectorizer determinism.
constexpr std::size_t kVectorizerUrls = 1000;

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(const std::string& name, const std::function<Outcome()>& check) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.c_str(), SecondsSince(start));
  std::fflush(stdout);
}

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

Outcome GradientOracle() {
  const auto start = Clock::now();
  Rng rng(2024);
  double worst = 0.0;
  std::size_t params = 0;
  for (int net = 0; net < kGradNets; ++net) {
    std::vector<std::size_t> dims{1 + rng.Below(kGradMaxDim)};
    const std::size_t hidden = 1 + rng.Below(2);
    for (std::size_t h = 0; h < hidden; ++h) dims.push_back(1 + rng.Below(kGradMaxDim));
    dims.push_back(1);
    MlpModel model = init_weights(dims, rng.NextU64());
    testing::RandomizeBiases(model, rng);
    const std::size_t batch = 1 + rng.Below(kGradMaxBatch);
    const Eigen::MatrixXd x = testing::RandomBatch(batch, dims.front(), rng);
    std::vector<int> y;
    for (std::size_t i = 0; i < batch; ++i) y.push_back(static_cast<int>(rng.Below(2)));
    const auto check = testing::CheckGradients(model, x, y, kGradStep);
    worst = std::max(worst, check.max_relative_error);
    params += check.parameters;
  }
  const double secs = SecondsSince(start);
  return {worst < kGradMaxRelError && secs < kGradSeconds,
          Fmt("%d nets, %zu parameters, max relative error %.3e (< %.0e), %.2f s (< %.0f s)",
              kGradNets, params, worst, kGradMaxRelError, secs, kGradSeconds)};
}

Outcome SmoteGeometry() {
  const auto start = Clock::now();
  Rng rng(77);
  const std::size_t n = kSmoteMajority + kSmoteMinority;
  FeatureMatrix x(static_cast<Eigen::Index>(n), 5);
  Labels y;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 5 == 0 ? 1 : 0;
    for (Eigen::Index j = 0; j < 5; ++j) {
      x(static_cast<Eigen::Index>(i), j) = rng.Normal() + (label ? 2.0 : 0.0);
    }
    y.push_back(label);
  }
  SmoteConfig cfg;
  cfg.seed = 5;
  const SmoteResult r = smote_resample(x, y, cfg);

  std::vector<Eigen::Index> minority_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1) minority_rows.push_back(static_cast<Eigen::Index>(i));
  }
  FeatureMatrix minority(static_cast<Eigen::Index>(minority_rows.size()), 5);
  for (std::size_t i = 0; i < minority_rows.size(); ++i) {
    minority.row(static_cast<Eigen::Index>(i)) = x.row(minority_rows[i]);
  }
  auto minority_pos = [&](std::size_t row) {
    return static_cast<std::size_t>(
        std::find(minority_rows.begin(), minority_rows.end(),
                  static_cast<Eigen::Index>(row)) -
        minority_rows.begin());
  };

  std::size_t verified = 0;
  for (std::size_t s = 0; s < r.audit.size(); ++s) {
    const auto& a = r.audit[s];
    if (y[a.base_index] != 1 || y[a.neighbor_index] != 1) continue;
    if (!(a.lambda >= 0.0 && a.lambda < 1.0)) continue;
    const auto knn = knn_minority(minority, minority_pos(a.base_index), 5);
    if (std::find(knn.begin(), knn.end(), minority_pos(a.neighbor_index)) == knn.end()) {
      continue;
    }
    const Eigen::VectorXd xb = x.row(static_cast<Eigen::Index>(a.base_index)).transpose();
    const Eigen::VectorXd xn =
        x.row(static_cast<Eigen::Index>(a.neighbor_index)).transpose();
    const Eigen::VectorXd expect = xb + a.lambda * (xn - xb);
    const auto row = r.features.row(static_cast<Eigen::Index>(n + s)).transpose();
    if (row == expect && r.labels[n + s] == 1) ++verified;
  }
  const auto positives = std::count(r.labels.begin(), r.labels.end(), 1);
  const auto negatives = std::count(r.labels.begin(), r.labels.end(), 0);
  const bool originals_kept = r.features.topRows(static_cast<Eigen::Index>(n)) == x;
  const double secs = SecondsSince(start);
  const bool pass = r.synthetic_count > 0 && verified == r.audit.size() &&
                    r.audit.size() == r.synthetic_count && positives == negatives &&
                    originals_kept && secs < kSmoteSeconds;
  return {pass, Fmt("%zu/%zu synthetic samples verified on their audit segment, "
                    "class counts %ld/%ld, %.2f s (< %.0f s)",
                    verified, r.synthetic_count, static_cast<long>(negatives),
                    static_cast<long>(positives), secs, kSmoteSeconds)};
}

Outcome PlantedOutliers() {
  const auto start = Clock::now();
  double worst_auc = 1.0;
  for (int seed = 1; seed <= kForestSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) * 7919);
    FeatureMatrix x(1000, 2);
    Labels planted;
    for (Eigen::Index i = 0; i < 1000; ++i) {
      const bool outlier = i >= 950;
      if (outlier) {
        x(i, 0) = -5.0 + 10.0 * rng.Uniform();
        x(i, 1) = -5.0 + 10.0 * rng.Uniform();
      } else {
        x(i, 0) = 0.3 * rng.Normal();
        x(i, 1) = 0.3 * rng.Normal();
      }
      planted.push_back(outlier ? 1 : 0);
    }
    ForestParams params;
    params.seed = static_cast<std::uint64_t>(seed);
    const auto model = fit_forest(x, params);
    worst_auc = std::min(worst_auc, roc_auc(anomaly_scores(x, model), planted));
  }

  bool midpoint = true;
  for (std::size_t trees : {std::size_t{1}, std::size_t{64}}) {
    IsolationForestModel m;
    m.psi = m.subsample_size = 256;
    m.input_dim = 2;
    IsoTree leaf;
    leaf.input_dim = 2;
    leaf.nodes.push_back(IsoNode{-1, 0.0, -1, -1, 256});
    m.trees.assign(trees, leaf);
    const std::vector<double> point{0.25, -1.0};
    midpoint &= path_length(point, leaf) == avg_path_c(256);
    midpoint &= anomaly_score(point, m) == 0.5;
  }
  const double secs = SecondsSince(start);
  return {worst_auc > kForestMinAuc && midpoint && secs < kForestSeconds,
          Fmt("min AUC over %d seeds %.4f (> %.1f), midpoint s=0.5 %s, %.2f s (< %.0f s)",
              kForestSeeds, worst_auc, kForestMinAuc, midpoint ? "exact" : "violated",
              secs, kForestSeconds)};
}

Outcome MetricOracles() {
  const auto start = Clock::now();
  ConfusionMatrix cm;
  cm.tp = 5247;
  cm.fn = 47;
  cm.tn = 14416;
  cm.fp = 485;
  const ThresholdMetrics m = classification_metrics(cm);
  const double tp = 5247, fn = 47, tn = 14416, fp = 485;
  const double acc = (tp + tn) / (tp + tn + fp + fn);
  const double prec = tp / (tp + fp);
  const double rec = tp / (tp + fn);
  const double f1 = 2 * prec * rec / (prec + rec);
  double table_err = std::max({std::abs(m.accuracy - acc), std::abs(m.precision - prec),
                               std::abs(m.recall - rec), std::abs(m.f1 - f1)});
  table_err = std::max({table_err, std::abs(m.accuracy - 0.97366),
                        std::abs(m.precision - 0.91539), std::abs(m.recall - 0.99112),
                        std::abs(m.f1 - 0.95175)});

  Rng rng(31337);
  double auc_err = 0.0;
  for (int inst = 0; inst < kAucInstances; ++inst) {
    std::vector<double> scores;
    std::vector<int> labels;
    for (std::size_t i = 0; i < kAucSamples; ++i) {
      // Half the instances use a coarse grid to force ties.
      scores.push_back(inst % 2 ? rng.Uniform()
                                : static_cast<double>(rng.Below(20)) / 19.0);
      labels.push_back(static_cast<int>(rng.Below(2)));
    }
    labels[0] = 0;
    labels[1] = 1;
    auc_err = std::max(auc_err, std::abs(roc_auc(scores, labels) -
                                         testing::PairwiseAuc(scores, labels)));
  }
  const double secs = SecondsSince(start);
  return {table_err <= kTableTolerance && auc_err <= kAucTolerance && secs < kMetricSeconds,
          Fmt("acc %.5f prec %.5f rec %.5f f1 %.5f (max err %.1e <= %.0e), "
              "rank vs pairwise AUC max err %.1e over %d instances (<= %.0e), %.2f s",
              m.accuracy, m.precision, m.recall, m.f1, table_err, kTableTolerance,
              auc_err, kAucInstances, kAucTolerance, secs)};
}

struct EndToEnd {
  Dataset corpus;
  PipelineResult first;
  bool ran = false;
};

EndToEnd& Shared() {
  static EndToEnd e2e;
  return e2e;
}

Outcome DeskAnalog() {
  EndToEnd& e2e = Shared();
  e2e.corpus = generate_desk_corpus(kDeskPerClass, kDeskSeed);
  const PipelineConfig cfg;
  e2e.first = train_pipeline(e2e.corpus, cfg);
  e2e.ran = true;
  const PipelineResult second = train_pipeline(e2e.corpus, cfg);
  const bool same_bytes =
      serialize_bundle(e2e.first.bundle) == serialize_bundle(second.bundle);
  const bool same_metrics = e2e.first.test_scores == second.test_scores;
  const MetricsReport& m = e2e.first.test_metrics;
  const double train_secs =
      std::max(e2e.first.training_seconds(), second.training_seconds());
  return {m.accuracy >= kMinAccuracy && m.roc_auc >= kMinRocAuc &&
              train_secs <= kMaxTrainSeconds && same_bytes && same_metrics,
          Fmt("%zu+%zu urls, test accuracy %.4f (>= %.2f), ROC-AUC %.4f (>= %.2f), "
              "training %.1f s (<= %.0f s), second run bytes %s",
              e2e.corpus.count_label(0), e2e.corpus.count_label(1), m.accuracy,
              kMinAccuracy, m.roc_auc, kMinRocAuc, train_secs, kMaxTrainSeconds,
              same_bytes && same_metrics ? "identical" : "DIFFER")};
}

std::vector<std::string> ProbeUrls(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> urls;
  for (const auto& r : generate_desk_corpus(n / 2, seed).records) urls.push_back(r.url);
  return urls;
}

Outcome Latency() {
  EndToEnd& e2e = Shared();
  if (!e2e.ran) return {false, "end-to-end model unavailable"};
  const ModelBundle& full = e2e.first.bundle;

  Dataset half_corpus;
  half_corpus.records.assign(e2e.corpus.records.begin(),
                             e2e.corpus.records.begin() +
                                 static_cast<std::ptrdiff_t>(e2e.corpus.size() / 2));
  const PipelineResult half = train_pipeline(half_corpus, PipelineConfig{});

  const auto urls = ProbeUrls(kLatencyCalls, 901);
  for (std::size_t i = 0; i < kLatencyWarmup; ++i) {
    classify_url(urls[i % urls.size()], full);
    classify_url(urls[i % urls.size()], half.bundle);
  }
  std::vector<double> lat_full;
  std::vector<double> lat_half;
  for (std::size_t i = 0; i < kLatencyCalls; ++i) {
    const std::string& u = urls[i % urls.size()];
    auto t0 = Clock::now();
    classify_url(u, full);
    lat_full.push_back(SecondsSince(t0) * 1e6);
    t0 = Clock::now();
    classify_url(u, half.bundle);
    lat_half.push_back(SecondsSince(t0) * 1e6);
  }
  const LatencySummary sf = summarize_latency(lat_full);
  const LatencySummary sh = summarize_latency(lat_half);
  const double ratio = sf.median_us / sh.median_us;
  const bool independent = std::abs(ratio - 1.0) <= kLatencyIndependence;
  return {sf.p95_us / 1000.0 <= kMaxP95Ms && independent,
          Fmt("p95 %.3f ms (<= %.0f ms), median %.1f us; N=%zu vs N=%zu median "
              "ratio %.3f (within %.0f%%)",
              sf.p95_us / 1000.0, kMaxP95Ms, sf.median_us, e2e.corpus.size(),
              half_corpus.size(), ratio, kLatencyIndependence * 100)};
}

Outcome Persistence() {
  EndToEnd& e2e = Shared();
  if (!e2e.ran) return {false, "end-to-end model unavailable"};
  const ModelBundle& bundle = e2e.first.bundle;
  const auto path = (std::filesystem::temp_directory_path() /
                     ("urlsentinel_accept_" + std::to_string(::getpid()) + ".usnl"))
                        .string();
  save_bundle(bundle, path);
  const ModelBundle loaded = load_bundle(path);
  std::filesystem::remove(path);

  std::size_t identical = 0;
  const auto probe = ProbeUrls(kProbeUrls, 77);
  for (const auto& u : probe) {
    const double a = classify_url(u, bundle).score;
    const double b = classify_url(u, loaded).score;
    identical += std::memcmp(&a, &b, sizeof(double)) == 0;
  }

  const auto bytes = serialize_bundle(bundle);
  Rng rng(4242);
  int detected = 0;
  for (int trial = 0; trial < kCorruptionTrials; ++trial) {
    auto corrupt = bytes;
    const std::size_t pos = rng.Below(corrupt.size());
    corrupt[pos] ^= static_cast<std::uint8_t>(1 + rng.Below(255));
    try {
      deserialize_bundle(corrupt);
    } catch (const Error&) {
      ++detected;
    }
  }
  return {identical == probe.size() && loaded == bundle && detected == kCorruptionTrials,
          Fmt("%zu/%zu probe predictions bit-identical after reload, %d/%d "
              "single-byte corruptions detected",
              identical, probe.size(), detected, kCorruptionTrials)};
}

std::string RunCli(const std::string& args) {
  const std::string cmd = std::string(URLSENTINEL_CLI_PATH) + " -q " + args;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("cannot start " + cmd);
  std::string out;
  char buf[1 << 14];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
  if (::pclose(pipe) != 0) throw std::runtime_error("command failed: " + cmd);
  return out;
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

Outcome VectorizerDeterminism() {
  // Generated URLs mixed with random printable strings.
  Rng rng(1234);
  std::vector<std::string> urls;
  for (const auto& r : generate_desk_corpus(kVectorizerUrls / 4, 55).records) {
    urls.push_back(r.url);
  }
  while (urls.size() < kVectorizerUrls) {
    std::string s = "http://";
    const std::size_t len = 1 + rng.Below(80);
    for (std::size_t i = 0; i < len; ++i) s.push_back(static_cast<char>(33 + rng.Below(94)));
    urls.push_back(s);
  }
  const auto path = (std::filesystem::temp_directory_path() /
                     ("urlsentinel_vec_" + std::to_string(::getpid()) + ".txt"))
                        .string();
  {
    std::ofstream out(path);
    for (const auto& u : urls) out << u << "\n";
  }
  const std::string a = RunCli("vectorize " + path);
  const std::string b = RunCli("vectorize " + path);
  const std::string raw = RunCli("vectorize --raw " + path);
  std::filesystem::remove(path);

  // The in-process vectorizer must print the same text.
  VectorizerConfig cfg;
  std::size_t in_process_matches = 0;
  const auto lines = Lines(a);
  for (std::size_t i = 0; i < urls.size() && i < lines.size(); ++i) {
    const HashedVector v = hash_vectorize(normalize_url(urls[i]), cfg);
    std::string expect;
    for (std::size_t e = 0; e < v.entries.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), e ? " %u:%a" : "%u:%a", v.entries[e].first,
                    v.entries[e].second);
      expect += buf;
    }
    in_process_matches += expect == lines[i];
  }

  VectorizerConfig raw_cfg;
  raw_cfg.l2_normalize = false;
  std::size_t sums_exact = 0;
  const auto raw_lines = Lines(raw);
  for (std::size_t i = 0; i < urls.size() && i < raw_lines.size(); ++i) {
    double sum = 0.0;
    std::istringstream in(raw_lines[i]);
    for (std::string tok; in >> tok;) {
      sum += std::strtod(tok.c_str() + tok.find(':') + 1, nullptr);
    }
    const auto count = char_ngrams(normalize_url(urls[i]).text(), raw_cfg).size();
    sums_exact += sum == static_cast<double>(count);
  }
  const bool pass = a == b && lines.size() == urls.size() &&
                    in_process_matches == urls.size() && sums_exact == urls.size();
  return {pass, Fmt("%zu urls, two processes %s, %zu/%zu match in-process vectors, "
                    "%zu/%zu bucket sums equal n-gram counts",
                    urls.size(), a == b ? "byte-identical" : "DIFFER", in_process_matches,
                    urls.size(), sums_exact, urls.size())};
}

}  // namespace
}  // namespace urlsentinel

int main() {
  using namespace urlsentinel;
  spdlog::set_level(spdlog::level::warn);
  std::printf("hardware: %s\n", hardware_description().c_str());
  Report("gradient_oracle", GradientOracle);
  Report("smote_geometry", SmoteGeometry);
  Report("isolation_forest_planted_outliers", PlantedOutliers);
  Report("metric_oracles", MetricOracles);
  Report("end_to_end_desk_analog", DeskAnalog);
  Report("single_url_latency", Latency);
  Report("persistence_round_trip", Persistence);
  Report("vectorizer_determinism", VectorizerDeterminism);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
