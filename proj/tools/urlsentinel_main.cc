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

// Command-line front end for the URLSentinel pipeline.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "urlsentinel/bench.h"
#include "urlsentinel/config.h"
#include "urlsentinel/errors.h"
#include "urlsentinel/ingest.h"
#include "urlsentinel/model_store.h"
#include "urlsentinel/pipeline.h"
#include "urlsentinel/service.h"
#include "urlsentinel/url_features.h"

namespace {

using namespace urlsentinel;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string model_path;
  bool json = false;
  bool quiet = false;
};

std::string UtcNow() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

PipelineConfig LoadConfig(const Common& c) {
  PipelineConfig cfg;
  if (const auto path = resolve_config_path(c.config_path)) {
    spdlog::info("config: {}", *path);
    cfg = load_pipeline_config(*path);
  }
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

Dataset LoadData(const std::string& path, std::size_t desk, std::uint64_t seed) {
  if (!path.empty()) {
    ParseReport report;
    Dataset ds = load_dataset_file(path, &report);
    spdlog::info("loaded {} records from {} ({} skipped)", ds.size(), path,
                 report.skipped);
    return ds;
  }
  if (desk == 0) {
    throw Error(ErrorCode::kInvalidArgument, "pass --data <file> or --desk <n>");
  }
  spdlog::info("generating desk corpus with {} urls per class", desk);
  return generate_desk_corpus(desk, seed);
}

void PrintPrediction(const PredictionResult& r, bool json) {
  if (json) {
    std::cout << prediction_to_json(r) << "\n";
  } else {
    std::printf("%s\t%.6f\t%s\t%.1fus\n", std::string(r.label_name()).c_str(),
                r.score, r.url.c_str(), r.latency_us);
  }
}

int CmdFetch(const std::string& source, const std::string& endpoint,
             const std::string& out, int timeout_ms) {
  const std::string body =
      fetch_feed(endpoint, std::chrono::milliseconds(timeout_ms));
  ParseReport report;
  std::vector<LabeledUrl> records;
  if (source == "urlhaus") {
    records = parse_urlhaus_text(body, &report);
  } else if (source == "phishtank") {
    records = parse_phishtank_csv(body, &report);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown source " + source);
  }
  DedupReport dreport;
  const Dataset ds = dedup(std::move(records), 0, &dreport);
  save_dataset_file(ds, out);
  spdlog::info("{}: {} urls written to {} ({} skipped, {} duplicates)", source,
               ds.size(), out, report.skipped, dreport.duplicates);
  return 0;
}

int CmdTrain(const Common& c, const std::string& data, std::size_t desk,
             const std::string& created_at) {
  PipelineConfig cfg = LoadConfig(c);
  cfg.created_at = created_at.empty() ? UtcNow() : created_at;
  const Dataset ds = LoadData(data, desk, cfg.seed);
  const PipelineResult result = train_pipeline(ds, cfg);
  if (!c.model_path.empty()) {
    save_bundle(result.bundle, c.model_path);
    spdlog::info("model written to {}", c.model_path);
  }
  for (const auto& t : result.timings) {
    spdlog::info("stage {}: {:.3f}s", t.stage, t.seconds);
  }
  std::cout << (c.json ? result.test_metrics.to_json() + "\n"
                       : result.test_metrics.to_text());
  return 0;
}

int CmdEvaluate(const Common& c, const std::string& data, std::size_t desk) {
  const ModelBundle bundle = load_bundle(c.model_path);
  const PipelineConfig cfg = LoadConfig(c);
  const Dataset ds = LoadData(data, desk, cfg.seed);
  const MetricsReport report = evaluate_bundle(ds, bundle);
  std::cout << (c.json ? report.to_json() + "\n" : report.to_text());
  return 0;
}

int CmdPredict(const Common& c, const std::vector<std::string>& urls) {
  const ModelBundle bundle = load_bundle(c.model_path);
  int status = 0;
  for (const auto& u : urls) {
    try {
      PrintPrediction(classify_url(u, bundle), c.json);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      std::cerr << "error: " << e.what() << "\n";
      status = 2;
    }
  }
  return status;
}

int CmdBatch(const Common& c, const std::string& input) {
  const ModelBundle bundle = load_bundle(c.model_path);
  const BatchResult batch = classify_batch(input, bundle);
  for (const auto& r : batch.results) PrintPrediction(r, c.json);
  for (const auto& e : batch.errors) {
    std::cerr << input << ":" << e.line << ": " << e.message << "\n";
  }
  spdlog::info("{} classified, {} line errors", batch.results.size(),
               batch.errors.size());
  return 0;
}

int CmdServe(const Common& c, const std::string& bind, std::size_t workers) {
  ServiceConfig scfg = parse_bind_address(bind);
  scfg.worker_count = workers;
  PredictionServer server(scfg);
  if (!c.model_path.empty()) {
    server.set_bundle(std::make_shared<const ModelBundle>(load_bundle(c.model_path)));
    spdlog::info("model {} loaded ({})", c.model_path, server.model_version());
  } else {
    spdlog::warn("no model loaded; /health reports 503");
  }
  server.listen();
  return 0;
}

int CmdBench(const Common& c, const std::string& data, std::size_t desk,
             std::size_t calls) {
  const PipelineConfig cfg = LoadConfig(c);
  const Dataset ds = LoadData(data, desk, cfg.seed);
  BenchOptions opt;
  opt.latency_calls = calls;
  const BenchReport rep = run_bench(cfg, ds, opt);
  std::cout << (c.json ? rep.to_json() + "\n" : rep.to_text());
  return 0;
}

// One line per input URL: "<bucket>:<weight>" pairs with weights in hex
// float form so two runs compare byte for byte.
int CmdVectorize(const Common& c, const std::string& input, bool raw) {
  VectorizerConfig vcfg = LoadConfig(c).vectorizer;
  if (raw) vcfg.l2_normalize = false;
  std::ifstream in(input);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + input);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const HashedVector v = hash_vectorize(normalize_url(line, vcfg.max_len), vcfg);
    for (std::size_t i = 0; i < v.entries.size(); ++i) {
      std::printf(i ? " %u:%a" : "%u:%a", v.entries[i].first, v.entries[i].second);
    }
    std::printf("\n");
  }
  return 0;
}

int CmdGenerate(const std::vector<LabeledUrl>& records, std::uint64_t seed,
                const std::string& out) {
  Dataset ds;
  ds.records = records;
  ds.seed = seed;
  if (out.empty() || out == "-") {
    for (const auto& r : ds.records) std::cout << r.label << "\t" << r.url << "\n";
  } else {
    save_dataset_file(ds, out);
    spdlog::info("{} urls written to {}", ds.size(), out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"URLSentinel: malicious URL detection"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  std::uint64_t seed_value = 0;
  app.add_option("--config", common.config_path,
                 "JSON config file (default: $URLSENTINEL_CONFIG)");
  auto* seed_opt = app.add_option("--seed", seed_value, "master seed override");
  app.add_option("--model", common.model_path, "model bundle path (.usnl)");
  app.add_flag("--json", common.json, "machine-readable output");
  app.add_flag("-q,--quiet", common.quiet, "only log warnings and errors");

  std::string source = "urlhaus";
  std::string endpoint;
  std::string out;
  int timeout_ms = 30000;
  auto* fetch = app.add_subcommand("fetch-data", "download and parse a threat feed");
  fetch->add_option("--source", source, "urlhaus or phishtank")
      ->check(CLI::IsMember({"urlhaus", "phishtank"}));
  fetch->add_option("--url", endpoint, "feed endpoint")->required();
  fetch->add_option("--out", out, "dataset file to write")->required();
  fetch->add_option("--timeout-ms", timeout_ms, "request timeout");

  std::size_t count = 1000;
  auto* gen_benign = app.add_subcommand("gen-benign", "generate benign urls");
  gen_benign->add_option("--count", count, "number of urls");
  gen_benign->add_option("--out", out, "dataset file ('-' for stdout)");

  std::size_t per_class = 6000;
  auto* gen_corpus =
      app.add_subcommand("gen-corpus", "generate a balanced desk corpus");
  gen_corpus->add_option("--per-class", per_class, "urls per class");
  gen_corpus->add_option("--out", out, "dataset file ('-' for stdout)");

  std::string data;
  std::size_t desk = 0;
  std::string created_at;
  auto* train_cmd = app.add_subcommand("train", "run the training pipeline");
  train_cmd->add_option("--data", data, "labelled dataset file");
  train_cmd->add_option("--desk", desk, "use a generated corpus of n urls per class");
  train_cmd->add_option("--created-at", created_at,
                        "metadata timestamp (default: now)");

  auto* eval_cmd = app.add_subcommand("evaluate", "score a labelled dataset");
  eval_cmd->add_option("--data", data, "labelled dataset file");
  eval_cmd->add_option("--desk", desk, "use a generated corpus of n urls per class");

  std::vector<std::string> urls;
  auto* predict = app.add_subcommand("predict", "classify urls");
  predict->add_option("urls", urls, "urls to classify")->required();

  std::string input;
  auto* batch = app.add_subcommand("batch", "classify a file of urls");
  batch->add_option("input", input, "one url per line")->required();

  std::string bind = "127.0.0.1:8080";
  std::size_t workers = 4;
  auto* serve = app.add_subcommand("serve", "run the HTTP prediction service");
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--workers", workers, "worker threads")
      ->check(CLI::PositiveNumber);

  std::size_t calls = 1000;
  auto* bench = app.add_subcommand("bench", "measure per-stage costs");
  bench->add_option("--data", data, "labelled dataset file");
  bench->add_option("--desk", desk, "use a generated corpus of n urls per class");
  bench->add_option("--calls", calls, "latency samples");

  bool raw = false;
  auto* vectorize = app.add_subcommand("vectorize", "print hashed n-gram vectors");
  vectorize->add_option("input", input, "one url per line")->required();
  vectorize->add_flag("--raw", raw, "skip L2 normalization");

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) common.seed = seed_value;
  spdlog::set_default_logger(spdlog::stderr_color_mt("urlsentinel"));
  spdlog::set_level(common.quiet ? spdlog::level::warn : spdlog::level::info);

  const bool needs_model = *eval_cmd || *predict || *batch;
  try {
    if (needs_model && common.model_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "--model is required");
    }
    const std::uint64_t seed = common.seed.value_or(42);
    if (*fetch) return CmdFetch(source, endpoint, out, timeout_ms);
    if (*gen_benign) {
      BenignGenConfig cfg;
      cfg.seed = seed;
      return CmdGenerate(generate_benign(count, cfg), seed, out);
    }
    if (*gen_corpus) {
      return CmdGenerate(generate_desk_corpus(per_class, seed).records, seed, out);
    }
    if (*train_cmd) return CmdTrain(common, data, desk, created_at);
    if (*eval_cmd) return CmdEvaluate(common, data, desk);
    if (*predict) return CmdPredict(common, urls);
    if (*batch) return CmdBatch(common, input);
    if (*serve) return CmdServe(common, bind, workers);
    if (*bench) return CmdBench(common, data, desk, calls);
    if (*vectorize) return CmdVectorize(common, input, raw);
  } catch (const Error& e) {
    spdlog::error("{} ({})", e.what(), ErrorCodeName(e.code()));
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
