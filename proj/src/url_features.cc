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

#include "urlsentinel/url_features.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

bool IsAsciiControl(unsigned char c) { return c < 0x20 || c == 0x7F; }

bool IsContinuation(unsigned char c) { return (c & 0xC0) == 0x80; }

// Byte length of the well-formed UTF-8 sequence starting at `pos`, or 1.
std::size_t SequenceLength(std::string_view text, std::size_t pos) {
  const auto lead = static_cast<unsigned char>(text[pos]);
  std::size_t len = 1;
  if (lead >= 0xC2 && lead <= 0xDF) {
    len = 2;
  } else if (lead >= 0xE0 && lead <= 0xEF) {
    len = 3;
  } else if (lead >= 0xF0 && lead <= 0xF4) {
    len = 4;
  }
  if (pos + len > text.size()) return 1;
  for (std::size_t i = 1; i < len; ++i) {
    if (!IsContinuation(static_cast<unsigned char>(text[pos + i]))) return 1;
  }
  return len;
}

// Byte offset of every character start, plus text.size() as a sentinel.
std::vector<std::size_t> CharOffsets(std::string_view text) {
  std::vector<std::size_t> offsets;
  offsets.reserve(text.size() + 1);
  std::size_t pos = 0;
  while (pos < text.size()) {
    offsets.push_back(pos);
    pos += SequenceLength(text, pos);
  }
  offsets.push_back(text.size());
  return offsets;
}

void TrimSpaces(std::string& s) {
  const auto first = s.find_first_not_of(' ');
  if (first == std::string::npos) {
    s.clear();
    return;
  }
  const auto last = s.find_last_not_of(' ');
  s = s.substr(first, last - first + 1);
}

}  // namespace

NormalizedUrl normalize_url(std::string_view raw, std::size_t max_len) {
  if (max_len == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_len must be positive");
  }
  std::string text;
  text.reserve(raw.size());
  for (const char ch : raw) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsAsciiControl(c)) continue;
    text.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                        : ch);
  }
  TrimSpaces(text);
  const auto offsets = CharOffsets(text);
  if (offsets.size() - 1 > max_len) {
    text.resize(offsets[max_len]);
    TrimSpaces(text);
  }
  if (text.empty()) {
    throw Error(ErrorCode::kDegenerateInput,
                "URL is empty after normalization");
  }
  return NormalizedUrl(std::move(text));
}

std::vector<std::string_view> utf8_chars(std::string_view text) {
  const auto offsets = CharOffsets(text);
  std::vector<std::string_view> chars;
  chars.reserve(offsets.size() - 1);
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    chars.push_back(text.substr(offsets[i], offsets[i + 1] - offsets[i]));
  }
  return chars;
}

double shannon_entropy(std::string_view text) {
  if (text.empty()) {
    throw Error(ErrorCode::kDegenerateInput, "entropy of empty string");
  }
  const auto chars = utf8_chars(text);
  std::map<std::string_view, std::size_t> counts;
  for (const auto c : chars) ++counts[c];
  const double n = static_cast<double>(chars.size());
  double h = 0.0;
  for (const auto& [symbol, count] : counts) {
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  // A single symbol gives -1 * log2(1) = -0.0.
  return h == 0.0 ? 0.0 : h;
}

StatFeatures stat_features(const NormalizedUrl& url) {
  const std::string& text = url.text();
  StatFeatures s;
  s.length = utf8_chars(text).size();
  s.dot_count = static_cast<std::size_t>(std::count(text.begin(), text.end(), '.'));
  s.slash_count =
      static_cast<std::size_t>(std::count(text.begin(), text.end(), '/'));
  s.entropy = shannon_entropy(text);
  return s;
}

void VectorizerConfig::validate() const {
  if (ngram_min < 1 || ngram_min > ngram_max) {
    throw Error(ErrorCode::kConfig,
                "n-gram range must satisfy 1 <= ngram_min <= ngram_max");
  }
  if (n_features < 1 || n_features > (std::size_t{1} << 31)) {
    throw Error(ErrorCode::kConfig, "n_features must be in [1, 2^31]");
  }
  if (max_len < 1) {
    throw Error(ErrorCode::kConfig, "max_len must be positive");
  }
}

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261u;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 16777619u;
  }
  return h;
}

std::vector<std::string_view> char_ngrams(std::string_view text,
                                          const VectorizerConfig& cfg) {
  const auto offsets = CharOffsets(text);
  const std::size_t len = offsets.size() - 1;
  std::vector<std::string_view> grams;
  for (int n = cfg.ngram_min; n <= cfg.ngram_max; ++n) {
    const auto width = static_cast<std::size_t>(n);
    if (width > len) break;
    for (std::size_t i = 0; i + width <= len; ++i) {
      grams.push_back(
          text.substr(offsets[i], offsets[i + width] - offsets[i]));
    }
  }
  return grams;
}

HashedVector hash_vectorize(std::string_view text,
                            const VectorizerConfig& cfg) {
  cfg.validate();
  HashedVector out;
  out.dim = cfg.n_features;
  const auto grams = char_ngrams(text, cfg);
  if (grams.empty()) return out;

  std::vector<std::pair<std::uint32_t, double>> hits;
  hits.reserve(grams.size());
  for (const auto g : grams) {
    const std::uint32_t h = fnv1a32(g);
    const auto index = static_cast<std::uint32_t>(h % cfg.n_features);
    const double sign = cfg.signed_hash && (h & 0x80000000u) ? -1.0 : 1.0;
    hits.emplace_back(index, sign);
  }
  std::sort(hits.begin(), hits.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [index, weight] : hits) {
    if (!out.entries.empty() && out.entries.back().first == index) {
      out.entries.back().second += weight;
    } else {
      out.entries.emplace_back(index, weight);
    }
  }
  std::erase_if(out.entries, [](const auto& e) { return e.second == 0.0; });

  if (cfg.l2_normalize && !out.entries.empty()) {
    double sq = 0.0;
    for (const auto& e : out.entries) sq += e.second * e.second;
    const double norm = std::sqrt(sq);
    for (auto& e : out.entries) e.second /= norm;
  }
  return out;
}

FeatureScaler fit_scaler(std::span<const StatFeatures> stats) {
  if (stats.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot fit scaler on an empty training set");
  }
  // Welford's running update.
  std::array<double, kStatFeatureCount> mean{};
  std::array<double, kStatFeatureCount> m2{};
  double count = 0.0;
  for (const auto& s : stats) {
    count += 1.0;
    const auto v = s.as_array();
    for (std::size_t j = 0; j < kStatFeatureCount; ++j) {
      const double delta = v[j] - mean[j];
      mean[j] += delta / count;
      m2[j] += delta * (v[j] - mean[j]);
    }
  }
  FeatureScaler scaler;
  scaler.mean = mean;
  for (std::size_t j = 0; j < kStatFeatureCount; ++j) {
    const double sd = std::sqrt(std::max(0.0, m2[j] / count));
    scaler.std[j] = sd > 0.0 ? sd : 1.0;
  }
  return scaler;
}

void featurize_into(const NormalizedUrl& url, const VectorizerConfig& cfg,
                    const FeatureScaler& scaler, std::span<double> out) {
  if (out.size() != feature_dim(cfg)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature row length does not match n_features + 4");
  }
  const auto stats = stat_features(url).as_array();
  for (std::size_t j = 0; j < kStatFeatureCount; ++j) {
    out[j] = (stats[j] - scaler.mean[j]) / scaler.std[j];
  }
  std::fill(out.begin() + kStatFeatureCount, out.end(), 0.0);
  for (const auto& [index, weight] : hash_vectorize(url, cfg).entries) {
    out[kStatFeatureCount + index] = weight;
  }
}

FeatureVector featurize(const NormalizedUrl& url, const VectorizerConfig& cfg,
                        const FeatureScaler& scaler) {
  FeatureVector v(static_cast<Eigen::Index>(feature_dim(cfg)));
  featurize_into(url, cfg, scaler, std::span<double>(v.data(), v.size()));
  return v;
}

FeatureMatrix featurize_batch(std::span<const NormalizedUrl> urls,
                              const VectorizerConfig& cfg,
                              const FeatureScaler& scaler) {
  const auto dim = feature_dim(cfg);
  FeatureMatrix m(static_cast<Eigen::Index>(urls.size()),
                  static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < urls.size(); ++i) {
    featurize_into(urls[i], cfg, scaler,
                   std::span<double>(m.row(static_cast<Eigen::Index>(i)).data(),
                                     dim));
  }
  return m;
}

}  // namespace urlsentinel
