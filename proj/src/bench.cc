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

#include "urlsentinel/bench.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Featurized {
  FeatureMatrix x;
  Labels y;
  FeatureScaler scaler;
  double chars = 0.0;
};

Featurized Vectorize(const Dataset& ds, const VectorizerConfig& cfg) {
  Featurized out;
  std::vector<NormalizedUrl> urls;
  urls.reserve(ds.size());
  std::vector<StatFeatures> stats;
  stats.reserve(ds.size());
  for (const auto& r : ds.records) {
    urls.push_back(normalize_url(r.url, cfg.max_len));
    stats.push_back(stat_features(urls.back()));
    out.chars += static_cast<double>(stats.back().length);
  }
  out.scaler = fit_scaler(stats);
  out.x = featurize_batch(urls, cfg, out.scaler);
  out.y = ds.labels();
  return out;
}

double MinTime(int repeats, const auto& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    fn();
    best = std::min(best, SecondsSince(start));
  }
  return best;
}

std::vector<std::size_t> NetworkDims(const PipelineConfig& cfg) {
  std::vector<std::size_t> dims{feature_dim(cfg.vectorizer)};
  dims.insert(dims.end(), cfg.train.hidden_layers.begin(),
              cfg.train.hidden_layers.end());
  dims.push_back(1);
  return dims;
}

double ForwardFlops(std::span<const std::size_t> dims) {
  double flops = 0.0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    flops += 2.0 * static_cast<double>(dims[l]) * static_cast<double>(dims[l + 1]);
  }
  return flops;
}

LatencySummary MeasureLatency(const ModelBundle& bundle, const Dataset& probe,
                              const BenchOptions& opt) {
  const std::size_t n = probe.size();
  for (std::size_t i = 0; i < opt.warmup_calls; ++i) {
    classify_url(probe.records[i % n].url, bundle);
  }
  std::vector<double> samples;
  samples.reserve(opt.latency_calls);
  for (std::size_t i = 0; i < opt.latency_calls; ++i) {
    const auto start = Clock::now();
    classify_url(probe.records[i % n].url, bundle);
    samples.push_back(SecondsSince(start) * 1e6);
  }
  return summarize_latency(std::move(samples));
}

Dataset Head(const Dataset& ds, std::size_t n) {
  Dataset out;
  out.seed = ds.seed;
  out.records.assign(ds.records.begin(), ds.records.begin() + n);
  return out;
}

}  // namespace

double BenchReport::stage_seconds(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.stage == stage) return s.seconds;
  }
  return 0.0;
}

std::string hardware_description() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      if (const auto colon = line.find(':'); colon != std::string::npos) {
        model = line.substr(colon + 1);
        model.erase(0, model.find_first_not_of(' '));
      }
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " hardware threads";
}

LatencySummary summarize_latency(std::vector<double> samples_us) {
  LatencySummary s;
  if (samples_us.empty()) return s;
  std::sort(samples_us.begin(), samples_us.end());
  const std::size_t n = samples_us.size();
  s.median_us = n % 2 ? samples_us[n / 2]
                      : 0.5 * (samples_us[n / 2 - 1] + samples_us[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  s.p95_us = samples_us[std::clamp<std::size_t>(rank, 1, n) - 1];
  s.mean_us = std::accumulate(samples_us.begin(), samples_us.end(), 0.0) /
              static_cast<double>(n);
  return s;
}

BenchReport run_bench(const PipelineConfig& config, const Dataset& dataset,
                      const BenchOptions& opt) {
  config.validate();
  if (dataset.size() < 1000) {
    throw Error(ErrorCode::kInvalidArgument, "bench needs at least 1000 records");
  }
  if (dataset.count_label(0) == 0 || dataset.count_label(1) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bench needs both classes");
  }
  const PipelineConfig cfg = config.with_derived_seeds();
  const Dataset half = Head(dataset, dataset.size() / 2);
  const auto dims = NetworkDims(cfg);

  BenchReport rep;
  rep.N = dataset.size();
  rep.d = dims.front();
  rep.k = cfg.smote.k_neighbors;
  rep.E = cfg.train.epochs;
  rep.B = cfg.train.batch_size;
  rep.h = dims.size() > 2 ? dims[1] : 0;
  rep.t = cfg.forest.trees;
  rep.hardware = hardware_description();

  Featurized full;
  Featurized part;
  const double t_vec = MinTime(opt.timing_repeats, [&] {
    full = Vectorize(dataset, cfg.vectorizer);
  });
  const double t_vec_half = MinTime(opt.timing_repeats, [&] {
    part = Vectorize(half, cfg.vectorizer);
  });
  rep.L = full.chars / static_cast<double>(rep.N);
  rep.stages.push_back({"preprocess_vectorize", t_vec});
  rep.stages.push_back({"preprocess_vectorize_half", t_vec_half});
  rep.vectorize_ratio = t_vec / t_vec_half;
  rep.vectorize_linear = rep.vectorize_ratio >= kLinearRatioLow &&
                         rep.vectorize_ratio <= kLinearRatioHigh;
  rep.vectorize_chars_per_s = full.chars / t_vec;
  spdlog::info("vectorize: {:.3f}s for N={}, {:.3f}s for N/2", t_vec, rep.N,
               t_vec_half);

  // Drop three quarters of the malicious rows so SMOTE has work to do.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < full.x.rows(); ++i) {
    if (full.y[i] == 0 || i % 4 == 0) keep.push_back(i);
  }
  FeatureMatrix skewed(static_cast<Eigen::Index>(keep.size()), full.x.cols());
  Labels skewed_y;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    skewed.row(static_cast<Eigen::Index>(r)) = full.x.row(keep[r]);
    skewed_y.push_back(full.y[keep[r]]);
  }
  SmoteResult balanced;
  auto start = Clock::now();
  balanced = smote_resample(skewed, skewed_y, cfg.smote);
  rep.stages.push_back({"smote", SecondsSince(start)});
  rep.M = balanced.synthetic_count;

  start = Clock::now();
  const auto forest = fit_forest(full.x, cfg.forest);
  const auto filtered = filter_outliers(full.x, full.y, forest, cfg.anomaly);
  rep.stages.push_back({"isolation_forest", SecondsSince(start)});

  auto train_model = [&](const Featurized& f, const char* stage) {
    MlpModel net = init_weights(dims, DeriveSeed(cfg.train.seed, "init"));
    const auto t0 = Clock::now();
    train(net, f.x, f.y, cfg.train);
    rep.stages.push_back({stage, SecondsSince(t0)});
    ModelBundle bundle;
    bundle.vectorizer = cfg.vectorizer;
    bundle.scaler = f.scaler;
    bundle.network = std::move(net);
    return bundle;
  };
  const ModelBundle bundle_full = train_model(full, "train");
  const ModelBundle bundle_half = train_model(part, "train_half");
  rep.train_ratio = rep.stage_seconds("train") / rep.stage_seconds("train_half");
  const double fwd = ForwardFlops(dims);
  // Forward, backward and update are roughly three forward passes.
  rep.train_flops_per_s = 3.0 * fwd * static_cast<double>(rep.E) *
                          static_cast<double>(rep.N) / rep.stage_seconds("train");
  (void)filtered;

  rep.latency_full = MeasureLatency(bundle_full, dataset, opt);
  rep.latency_half = MeasureLatency(bundle_half, dataset, opt);
  rep.stages.push_back({"predict_single", rep.latency_full.median_us * 1e-6});
  rep.latency_ratio = rep.latency_full.median_us / rep.latency_half.median_us;
  rep.latency_independent = std::abs(rep.latency_ratio - 1.0) <= kLatencyTolerance;
  rep.predict_flops_per_s = fwd / (rep.latency_full.median_us * 1e-6);
  return rep;
}

std::string BenchReport::to_text() const {
  std::ostringstream os;
  os << "hardware: " << hardware << "\n"
     << "N: " << N << "\nL: " << L << "\nd: " << d << "\nk: " << k
     << "\nE: " << E << "\nB: " << B << "\nh: " << h << "\nM: " << M
     << "\nt: " << t << "\n";
  for (const auto& s : stages) {
    os << "stage " << s.stage << ": " << s.seconds << " s\n";
  }
  os << "vectorize_ratio: " << vectorize_ratio
     << (vectorize_linear ? " (linear)" : " (outside linear band)") << "\n"
     << "train_ratio: " << train_ratio << "\n"
     << "latency_median_us: " << latency_full.median_us << "\n"
     << "latency_p95_us: " << latency_full.p95_us << "\n"
     << "latency_ratio: " << latency_ratio
     << (latency_independent ? " (independent of N)" : " (depends on N)") << "\n"
     << "vectorize_chars_per_s: " << vectorize_chars_per_s << "\n"
     << "train_flops_per_s: " << train_flops_per_s << "\n"
     << "predict_flops_per_s: " << predict_flops_per_s << "\n";
  return os.str();
}

std::string BenchReport::to_json() const {
  nlohmann::json stage_json = nlohmann::json::object();
  for (const auto& s : stages) stage_json[s.stage] = s.seconds;
  auto latency = [](const LatencySummary& l) {
    return nlohmann::json{
        {"median_us", l.median_us}, {"p95_us", l.p95_us}, {"mean_us", l.mean_us}};
  };
  const nlohmann::json j = {
      {"hardware", hardware},
      {"symbols",
       {{"N", N}, {"L", L}, {"d", d}, {"k", k}, {"E", E}, {"B", B}, {"h", h},
        {"M", M}, {"t", t}}},
      {"stages", stage_json},
      {"vectorize_ratio", vectorize_ratio},
      {"vectorize_linear", vectorize_linear},
      {"train_ratio", train_ratio},
      {"latency_full", latency(latency_full)},
      {"latency_half", latency(latency_half)},
      {"latency_ratio", latency_ratio},
      {"latency_independent", latency_independent},
      {"ops_per_second",
       {{"vectorize_chars", vectorize_chars_per_s},
        {"train_flops", train_flops_per_s},
        {"predict_flops", predict_flops_per_s}}}};
  return j.dump(2);
}

}  // namespace urlsentinel
