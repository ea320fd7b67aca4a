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

#ifndef URLSENTINEL_INGEST_H_
#define URLSENTINEL_INGEST_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "urlsentinel/types.h"

namespace urlsentinel {

enum class Source { kUrlhaus, kPhishtank, kSynthetic, kUserFile };

std::string_view SourceName(Source source);

struct LabeledUrl {
  std::string url;
  int label = 0;  // 0 = benign, 1 = malicious
  Source source = Source::kUserFile;

  bool operator==(const LabeledUrl&) const = default;
};

struct Dataset {
  std::vector<LabeledUrl> records;
  std::uint64_t seed = 0;

  std::size_t size() const { return records.size(); }
  std::size_t count_label(int label) const;
  Labels labels() const;
};

// Totals for the line/row based parsers: emitted + skipped = data lines.
struct ParseReport {
  std::size_t emitted = 0;
  std::size_t skipped = 0;
};

// URLHaus plain text: one URL per line, '#' comments, LF or CRLF.
std::vector<LabeledUrl> parse_urlhaus_text(std::string_view body,
                                           ParseReport* report = nullptr);

// PhishTank CSV with a header row; the "url" column is mandatory.
// Throws Error(kFormat) when the header has no "url" column.
std::vector<LabeledUrl> parse_phishtank_csv(std::string_view body,
                                            ParseReport* report = nullptr);

// RFC 4180 style record splitting (quoted fields, doubled quotes, CRLF).
std::vector<std::vector<std::string>> parse_csv(std::string_view body);

struct BenignGenConfig {
  std::vector<std::string> domains = {
      "google.com",     "wikipedia.org", "github.com",   "youtube.com",
      "stackoverflow.com", "amazon.com", "microsoft.com", "apple.com",
      "reddit.com",     "mozilla.org",   "bbc.co.uk",    "nytimes.com",
      "linkedin.com",   "python.org",    "cloudflare.com"};
  std::size_t min_path_segments = 1;
  std::size_t max_path_segments = 4;
  std::size_t min_query_params = 0;
  std::size_t max_query_params = 3;
  std::uint64_t seed = 0;

  void validate() const;
};

std::vector<LabeledUrl> generate_benign(std::size_t n,
                                        const BenignGenConfig& cfg);

// Phishing/malware-style URLs for offline corpora: raw IP hosts, long random
// paths, percent-encoded parameters, brand lookalike hosts, '@' redirection.
std::vector<LabeledUrl> generate_malicious_style(std::size_t n,
                                                 std::uint64_t seed);

// Equal-sized benign and malicious-style corpus, deduplicated.
Dataset generate_desk_corpus(std::size_t per_class, std::uint64_t seed);

struct DedupReport {
  std::size_t duplicates = 0;
  std::size_t malformed = 0;
};

// Keeps the first occurrence of each normalized URL. Records that fail
// normalization are dropped as malformed.
Dataset dedup(std::vector<LabeledUrl> records, std::uint64_t seed = 0,
              DedupReport* report = nullptr);

struct SplitConfig {
  double train_fraction = 0.8;
  bool stratified = true;
  std::uint64_t seed = 0;

  void validate() const;
};

// Throws Error(kInvalidArgument) for a single-class dataset when stratified.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             const SplitConfig& cfg);

// Local corpus format: "<label-digit>\t<url>" per line.
Dataset load_dataset_file(const std::string& path,
                          ParseReport* report = nullptr);
Dataset parse_dataset_text(std::string_view body,
                           ParseReport* report = nullptr);
void save_dataset_file(const Dataset& ds, const std::string& path);

// GET `endpoint` and return the body on HTTP 200. Throws Error with
// kHttpStatus, kNetwork or kTimeout; all three are retryable.
std::string fetch_feed(const std::string& endpoint,
                       std::chrono::milliseconds timeout);

}  // namespace urlsentinel

#endif  // URLSENTINEL_INGEST_H_
