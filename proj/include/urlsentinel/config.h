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

#ifndef URLSENTINEL_CONFIG_H_
#define URLSENTINEL_CONFIG_H_

#include <optional>
#include <string>
#include <string_view>

#include "urlsentinel/pipeline.h"

namespace urlsentinel {

inline constexpr const char* kConfigEnvVar = "URLSENTINEL_CONFIG";

// JSON document with optional sections "vectorizer", "smote", "anomaly",
// "train", "split" and top-level "seed"/"keep_forest". Missing keys keep
// their defaults; unknown keys are rejected with Error(kConfig).
PipelineConfig parse_pipeline_config(std::string_view json_text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);
PipelineConfig load_pipeline_config(const std::string& path);

// Explicit path if given, else $URLSENTINEL_CONFIG, else none.
std::optional<std::string> resolve_config_path(const std::string& explicit_path);

}  // namespace urlsentinel

#endif  // URLSENTINEL_CONFIG_H_
