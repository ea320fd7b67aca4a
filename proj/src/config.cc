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

#include "urlsentinel/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

using nlohmann::json;

void RejectUnknown(const json& obj, const std::set<std::string>& known,
                   const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kConfig, where + " must be a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw Error(ErrorCode::kConfig, "unknown config key " + where + "." + key);
    }
  }
}

template <typename T>
void Read(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view json_text) {
  PipelineConfig cfg;
  try {
    const json root = json::parse(json_text);
    RejectUnknown(root,
                  {"seed", "keep_forest", "vectorizer", "smote", "anomaly",
                   "train", "split", "corpus_description"},
                  "config");
    Read(root, "seed", cfg.seed);
    Read(root, "keep_forest", cfg.keep_forest);
    Read(root, "corpus_description", cfg.corpus_description);
    if (auto it = root.find("vectorizer"); it != root.end()) {
      RejectUnknown(*it,
                    {"ngram_min", "ngram_max", "n_features", "l2_normalize",
                     "signed", "max_len"},
                    "vectorizer");
      Read(*it, "ngram_min", cfg.vectorizer.ngram_min);
      Read(*it, "ngram_max", cfg.vectorizer.ngram_max);
      Read(*it, "n_features", cfg.vectorizer.n_features);
      Read(*it, "l2_normalize", cfg.vectorizer.l2_normalize);
      Read(*it, "signed", cfg.vectorizer.signed_hash);
      Read(*it, "max_len", cfg.vectorizer.max_len);
    }
    if (auto it = root.find("smote"); it != root.end()) {
      RejectUnknown(*it, {"k_neighbors", "target_ratio"}, "smote");
      Read(*it, "k_neighbors", cfg.smote.k_neighbors);
      Read(*it, "target_ratio", cfg.smote.target_ratio);
    }
    if (auto it = root.find("anomaly"); it != root.end()) {
      RejectUnknown(*it, {"enabled", "contamination", "trees", "psi"}, "anomaly");
      Read(*it, "enabled", cfg.filter_outliers);
      Read(*it, "contamination", cfg.anomaly.contamination);
      Read(*it, "trees", cfg.forest.trees);
      Read(*it, "psi", cfg.forest.psi);
    }
    if (auto it = root.find("train"); it != root.end()) {
      RejectUnknown(*it,
                    {"hidden_layers", "epochs", "batch_size", "learning_rate",
                     "beta1", "beta2", "epsilon", "dropout_rate",
                     "early_stop_patience", "validation_fraction"},
                    "train");
      Read(*it, "hidden_layers", cfg.train.hidden_layers);
      Read(*it, "epochs", cfg.train.epochs);
      Read(*it, "batch_size", cfg.train.batch_size);
      Read(*it, "learning_rate", cfg.train.learning_rate);
      Read(*it, "beta1", cfg.train.beta1);
      Read(*it, "beta2", cfg.train.beta2);
      Read(*it, "epsilon", cfg.train.epsilon);
      Read(*it, "dropout_rate", cfg.train.dropout_rate);
      Read(*it, "validation_fraction", cfg.train.validation_fraction);
      if (auto p = it->find("early_stop_patience"); p != it->end() && !p->is_null()) {
        cfg.train.early_stop_patience = p->get<int>();
      }
    }
    if (auto it = root.find("split"); it != root.end()) {
      RejectUnknown(*it, {"train_fraction", "stratified"}, "split");
      Read(*it, "train_fraction", cfg.split.train_fraction);
      Read(*it, "stratified", cfg.split.stratified);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("invalid config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  json j = {
      {"seed", cfg.seed},
      {"keep_forest", cfg.keep_forest},
      {"vectorizer",
       {{"ngram_min", cfg.vectorizer.ngram_min},
        {"ngram_max", cfg.vectorizer.ngram_max},
        {"n_features", cfg.vectorizer.n_features},
        {"l2_normalize", cfg.vectorizer.l2_normalize},
        {"signed", cfg.vectorizer.signed_hash},
        {"max_len", cfg.vectorizer.max_len}}},
      {"smote",
       {{"k_neighbors", cfg.smote.k_neighbors},
        {"target_ratio", cfg.smote.target_ratio}}},
      {"anomaly",
       {{"enabled", cfg.filter_outliers},
        {"contamination", cfg.anomaly.contamination},
        {"trees", cfg.forest.trees},
        {"psi", cfg.forest.psi}}},
      {"train",
       {{"hidden_layers", cfg.train.hidden_layers},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"learning_rate", cfg.train.learning_rate},
        {"beta1", cfg.train.beta1},
        {"beta2", cfg.train.beta2},
        {"epsilon", cfg.train.epsilon},
        {"dropout_rate", cfg.train.dropout_rate},
        {"early_stop_patience",
         cfg.train.early_stop_patience ? json(*cfg.train.early_stop_patience)
                                       : json(nullptr)},
        {"validation_fraction", cfg.train.validation_fraction}}},
      {"split",
       {{"train_fraction", cfg.split.train_fraction},
        {"stratified", cfg.split.stratified}}}};
  if (!cfg.corpus_description.empty()) {
    j["corpus_description"] = cfg.corpus_description;
  }
  return j.dump(2);
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pipeline_config(buffer.str());
}

std::optional<std::string> resolve_config_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) {
    return std::string(env);
  }
  return std::nullopt;
}

}  // namespace urlsentinel
