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

#ifndef URLSENTINEL_BENCH_H_
#define URLSENTINEL_BENCH_H_

#include <cstddef>
#include <string>
#include <vector>

#include "urlsentinel/ingest.h"
#include "urlsentinel/pipeline.h"

namespace urlsentinel {

struct BenchOptions {
  std::size_t latency_calls = 1000;
  std::size_t warmup_calls = 50;
  int timing_repeats = 3;  // minimum over repeats for the scaling probes
};

struct LatencySummary {
  double median_us = 0.0;
  double p95_us = 0.0;
  double mean_us = 0.0;
};

struct BenchReport {
  // Cost-model symbols.
  std::size_t N = 0;         // training records
  double L = 0.0;            // mean normalized URL length
  std::size_t d = 0;         // network input width
  int k = 0;                 // SMOTE neighbours
  int E = 0;                 // epochs
  int B = 0;                 // batch size
  std::size_t h = 0;         // first hidden width
  std::size_t M = 0;         // synthetic samples
  std::size_t t = 0;         // forest trees

  std::vector<StageTiming> stages;  // every entry > 0 s

  double vectorize_ratio = 0.0;  // time(N) / time(N/2)
  double train_ratio = 0.0;
  LatencySummary latency_full;
  LatencySummary latency_half;
  double latency_ratio = 0.0;  // median(N) / median(N/2)
  bool vectorize_linear = false;
  bool latency_independent = false;

  double vectorize_chars_per_s = 0.0;
  double train_flops_per_s = 0.0;
  double predict_flops_per_s = 0.0;

  std::string hardware;

  double stage_seconds(std::string_view stage) const;
  std::string to_text() const;
  std::string to_json() const;
};

inline constexpr double kLinearRatioLow = 1.6;
inline constexpr double kLinearRatioHigh = 2.6;
inline constexpr double kLatencyTolerance = 0.20;

std::string hardware_description();

LatencySummary summarize_latency(std::vector<double> samples_us);

// Times each stage at N and N/2. Throws Error(kInvalidArgument) below 1000
// records or when a class is missing.
BenchReport run_bench(const PipelineConfig& cfg, const Dataset& dataset,
                      const BenchOptions& options = {});

}  // namespace urlsentinel

#endif  // URLSENTINEL_BENCH_H_
