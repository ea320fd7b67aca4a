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

#ifndef URLSENTINEL_MODEL_STORE_H_
#define URLSENTINEL_MODEL_STORE_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "urlsentinel/anomaly.h"
#include "urlsentinel/neuralnet.h"
#include "urlsentinel/url_features.h"

namespace urlsentinel {

inline constexpr std::uint32_t kBundleFormatVersion = 1;
inline constexpr char kBundleMagic[8] = {'U', 'R', 'L', 'S', 'N', 'T', 'L', '1'};
inline constexpr const char* kBundleExtension = ".usnl";

struct BundleMetadata {
  std::string created_at;
  std::string corpus_description;
  std::vector<std::pair<std::string, double>> metrics;

  bool operator==(const BundleMetadata&) const = default;
};

struct ModelBundle {
  std::uint32_t format_version = kBundleFormatVersion;
  VectorizerConfig vectorizer;
  FeatureScaler scaler;
  MlpModel network;
  std::optional<IsolationForestModel> forest;
  BundleMetadata metadata;

  // Throws Error(kInvalidArgument) when the network input width is not
  // n_features + 4 or the version is unsupported.
  void validate() const;
  bool operator==(const ModelBundle&) const = default;
};

enum class ParameterEncoding { kFloat64, kFloat32 };

// Layout, all integers little-endian:
//   magic "URLSNTL1" | u32 version | u32 flags | u64 total length |
//   sections (u32 tag, u64 length, payload)... | u32 CRC-32 of all prior bytes
// Network parameters are f64 unless flags bit 0 selects f32.
std::vector<std::uint8_t> serialize_bundle(
    const ModelBundle& bundle,
    ParameterEncoding encoding = ParameterEncoding::kFloat64);

// Throws Error with kMagicMismatch, kUnsupportedVersion, kTruncated,
// kChecksum or kFormat. Nothing is returned on failure.
ModelBundle deserialize_bundle(std::span<const std::uint8_t> bytes);

void save_bundle(const ModelBundle& bundle, std::ostream& out,
                 ParameterEncoding encoding = ParameterEncoding::kFloat64);
void save_bundle(const ModelBundle& bundle, const std::string& path,
                 ParameterEncoding encoding = ParameterEncoding::kFloat64);

ModelBundle load_bundle(std::istream& in);
ModelBundle load_bundle(const std::string& path);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace urlsentinel

#endif  // URLSENTINEL_MODEL_STORE_H_
