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

#ifndef URLSENTINEL_URL_FEATURES_H_
#define URLSENTINEL_URL_FEATURES_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "urlsentinel/types.h"

namespace urlsentinel {

inline constexpr std::size_t kDefaultMaxUrlLength = 200;
inline constexpr std::size_t kStatFeatureCount = 4;

// A URL after lowercasing, control-character removal, whitespace trimming and
// truncation. Only normalize_url() creates one, so holders can rely on the
// invariants (non-empty, lowercase ASCII, at most max_len characters).
class NormalizedUrl {
 public:
  const std::string& text() const { return text_; }
  bool operator==(const NormalizedUrl&) const = default;

 private:
  friend NormalizedUrl normalize_url(std::string_view, std::size_t);
  explicit NormalizedUrl(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

// Throws Error(kDegenerateInput) when nothing is left after normalization.
NormalizedUrl normalize_url(std::string_view raw,
                            std::size_t max_len = kDefaultMaxUrlLength);

// Splits UTF-8 text into characters (code points). A byte that does not start
// a well-formed sequence counts as one character on its own.
std::vector<std::string_view> utf8_chars(std::string_view text);

// Shannon entropy in bits over character frequencies.
// Throws Error(kDegenerateInput) on empty input.
double shannon_entropy(std::string_view text);

struct StatFeatures {
  std::size_t length = 0;
  std::size_t dot_count = 0;
  std::size_t slash_count = 0;
  double entropy = 0.0;

  std::array<double, kStatFeatureCount> as_array() const {
    return {static_cast<double>(length), static_cast<double>(dot_count),
            static_cast<double>(slash_count), entropy};
  }
  bool operator==(const StatFeatures&) const = default;
};

StatFeatures stat_features(const NormalizedUrl& url);

struct VectorizerConfig {
  int ngram_min = 2;
  int ngram_max = 5;
  std::size_t n_features = 1000;
  bool l2_normalize = true;
  // Off: every n-gram adds +1. On: the top hash bit picks the sign.
  bool signed_hash = false;
  // Normalization truncation length applied before vectorizing.
  std::size_t max_len = kDefaultMaxUrlLength;

  // Throws Error(kConfig).
  void validate() const;
  bool operator==(const VectorizerConfig&) const = default;
};

// 32-bit FNV-1a over raw bytes.
std::uint32_t fnv1a32(std::string_view bytes);

// Every contiguous run of n characters for n in [ngram_min, ngram_max],
// grouped by n and in position order within each group.
std::vector<std::string_view> char_ngrams(std::string_view text,
                                          const VectorizerConfig& cfg);

struct HashedVector {
  std::size_t dim = 0;
  // Strictly increasing indices, no zero weights.
  std::vector<std::pair<std::uint32_t, double>> entries;

  bool operator==(const HashedVector&) const = default;
};

// `text` is normalized URL text; the empty string yields the zero vector.
HashedVector hash_vectorize(std::string_view text, const VectorizerConfig& cfg);
inline HashedVector hash_vectorize(const NormalizedUrl& url,
                                   const VectorizerConfig& cfg) {
  return hash_vectorize(url.text(), cfg);
}

// Per-feature z-scaling for the four statistical features.
struct FeatureScaler {
  std::array<double, kStatFeatureCount> mean{};
  std::array<double, kStatFeatureCount> std{1.0, 1.0, 1.0, 1.0};

  bool operator==(const FeatureScaler&) const = default;
};

// Population mean and standard deviation; zero deviation is replaced by 1.
// Throws Error(kInvalidArgument) on an empty list.
FeatureScaler fit_scaler(std::span<const StatFeatures> stats);

inline std::size_t feature_dim(const VectorizerConfig& cfg) {
  return cfg.n_features + kStatFeatureCount;
}

// Layout: four scaled statistical features, then the dense hashed block.
FeatureVector featurize(const NormalizedUrl& url, const VectorizerConfig& cfg,
                        const FeatureScaler& scaler);

// Writes the same layout into a caller-provided row of length d + 4.
void featurize_into(const NormalizedUrl& url, const VectorizerConfig& cfg,
                    const FeatureScaler& scaler, std::span<double> out);

FeatureMatrix featurize_batch(std::span<const NormalizedUrl> urls,
                              const VectorizerConfig& cfg,
                              const FeatureScaler& scaler);

}  // namespace urlsentinel

#endif  // URLSENTINEL_URL_FEATURES_H_
