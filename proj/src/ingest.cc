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

#include "urlsentinel/ingest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <httplib.h>

#include "urlsentinel/errors.h"
#include "urlsentinel/rng.h"
#include "urlsentinel/url_features.h"

namespace urlsentinel {
namespace {

constexpr std::string_view kPathWords[] = {
    "about",    "account",  "api",      "archive",  "article",  "articles",
    "assets",   "blob",     "blog",     "books",    "browse",   "careers",
    "category", "changelog", "checkout", "commits", "community", "compare",
    "contact",  "contents", "courses",  "dashboard", "deals",   "developer",
    "discussions", "docs",  "download", "edit",     "en",       "events",
    "explore",  "faq",      "features", "feed",     "forum",    "gallery",
    "guide",    "guides",   "help",     "history",  "home",     "images",
    "index",    "issues",   "jobs",     "learn",    "library",  "main",
    "maps",     "marketplace", "media", "music",    "news",     "notifications",
    "orders",   "overview", "packages", "pages",    "photos",   "pricing",
    "privacy",  "products", "profile",  "projects", "pulls",    "questions",
    "reference", "releases", "reviews", "science",  "search",   "security",
    "settings", "shop",     "sports",   "src",      "status",   "store",
    "support",  "tags",     "technology", "terms",  "topics",   "trending",
    "tutorial", "tv",       "uk",       "updates",  "user",     "users",
    "v1",       "v2",       "video",    "watch",    "wiki",     "world"};

constexpr std::string_view kQueryKeys[] = {
    "q",    "id",  "page", "lang",  "ref",        "sort", "tab",
    "v",    "hl",  "type", "limit", "utm_source", "filter", "view"};

constexpr std::string_view kBrands[] = {
    "paypal",  "apple",    "microsoft", "office365", "amazon",   "netflix",
    "chase",   "wellsfargo", "dhl",     "fedex",     "google",   "facebook",
    "instagram", "bankofamerica", "outlook", "dropbox"};

constexpr std::string_view kShadyTlds[] = {
    "xyz", "top", "tk",   "ml",   "ga",   "cf",   "gq",   "ru",  "cn",
    "info", "online", "site", "club", "live", "icu", "buzz", "biz", "pw"};

constexpr std::string_view kLureWords[] = {
    "secure", "login",  "verify", "account", "update", "signin", "support",
    "billing", "confirm", "auth",  "wallet",  "unlock", "service", "alert"};

constexpr std::string_view kPayloads[] = {
    "invoice.exe", "update.apk", "doc.zip",  "payload.bin", "setup.msi",
    "mozi.m",      "i.sh",       "bot.x86",  "scan.pdf.exe", "form.scr"};

constexpr std::string_view kAlnum = "abcdefghijklmnopqrstuvwxyz0123456789";
constexpr std::string_view kHex = "0123456789abcdef";

template <typename Container>
std::string_view Pick(Rng& rng, const Container& items) {
  return items[rng.Below(std::size(items))];
}

std::size_t InRange(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + rng.Below(hi - lo + 1);
}

std::string RandomToken(Rng& rng, std::string_view alphabet, std::size_t len) {
  std::string s(len, ' ');
  for (auto& c : s) c = alphabet[rng.Below(alphabet.size())];
  return s;
}

std::string RandomIp(Rng& rng) {
  std::ostringstream os;
  os << (1 + rng.Below(223)) << '.' << rng.Below(256) << '.' << rng.Below(256)
     << '.' << (1 + rng.Below(254));
  return os.str();
}

std::string PercentEncode(std::string_view s) {
  std::string out;
  for (const char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_') {
      out.push_back(ch);
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

class BenignGenerator {
 public:
  explicit BenignGenerator(const BenignGenConfig& cfg)
      : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
  }

  std::string Next() {
    std::string url = "https://";
    url += cfg_.domains[rng_.Below(cfg_.domains.size())];
    const auto segments =
        InRange(rng_, cfg_.min_path_segments, cfg_.max_path_segments);
    for (std::size_t i = 0; i < segments; ++i) {
      url += '/';
      url += Segment();
    }
    const auto params =
        InRange(rng_, cfg_.min_query_params, cfg_.max_query_params);
    for (std::size_t i = 0; i < params; ++i) {
      url += i == 0 ? '?' : '&';
      url += Pick(rng_, kQueryKeys);
      url += '=';
      url += Segment();
    }
    return url;
  }

 private:
  std::string Segment() {
    const auto roll = rng_.Below(10);
    if (roll < 7) return std::string(Pick(rng_, kPathWords));
    if (roll < 9) return std::to_string(rng_.Below(100000));
    return RandomToken(rng_, kAlnum, InRange(rng_, 4, 10));
  }

  BenignGenConfig cfg_;
  Rng rng_;
};

class MaliciousGenerator {
 public:
  explicit MaliciousGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string Next() {
    switch (rng_.Below(7)) {
      case 0: return IpHost();
      case 1: return Lookalike();
      case 2: return LongRandomPath();
      case 3: return EncodedRedirect();
      case 4: return AtTrick();
      case 5: return Payload();
      default: return DeepSubdomain();
    }
  }

 private:
  std::string Scheme() { return rng_.Below(4) == 0 ? "https://" : "http://"; }

  std::string RandomDomain() {
    return RandomToken(rng_, kAlnum.substr(0, 26), InRange(rng_, 5, 14)) +
           "." + std::string(Pick(rng_, kShadyTlds));
  }

  std::string RandomPath(std::size_t lo, std::size_t hi) {
    std::string path;
    const auto n = InRange(rng_, lo, hi);
    for (std::size_t i = 0; i < n; ++i) {
      path += '/';
      path += RandomToken(rng_, kAlnum, InRange(rng_, 6, 20));
    }
    return path;
  }

  std::string IpHost() {
    std::string url = "http://" + RandomIp(rng_);
    if (rng_.Below(2) == 0) url += ":" + std::to_string(1024 + rng_.Below(60000));
    if (rng_.Below(2) == 0) {
      url += "/bins/" + std::string(Pick(rng_, kPayloads));
    } else {
      url += RandomPath(1, 3);
    }
    return url;
  }

  std::string Lookalike() {
    std::string host;
    switch (rng_.Below(3)) {
      case 0:
        host = std::string(Pick(rng_, kBrands)) + "-" +
               std::string(Pick(rng_, kLureWords)) + "." +
               std::string(Pick(rng_, kShadyTlds));
        break;
      case 1:
        host = std::string(Pick(rng_, kLureWords)) + "-" +
               std::string(Pick(rng_, kBrands)) + "-" +
               RandomToken(rng_, kAlnum, 4) + ".com";
        break;
      default:
        host = std::string(Pick(rng_, kBrands)) + "." +
               std::string(Pick(rng_, kLureWords)) + "-" +
               std::string(Pick(rng_, kLureWords)) + "." +
               std::string(Pick(rng_, kShadyTlds));
    }
    std::string url = Scheme() + host + "/" + std::string(Pick(rng_, kLureWords));
    url += rng_.Below(2) == 0 ? ".php" : ".html";
    url += "?session=" + RandomToken(rng_, kHex, InRange(rng_, 16, 40));
    if (rng_.Below(2) == 0) {
      url += "&email=" + RandomToken(rng_, kAlnum, 6) + "%40" +
             RandomToken(rng_, kAlnum, 5) + ".com";
    }
    return url;
  }

  std::string LongRandomPath() {
    return Scheme() + RandomDomain() + RandomPath(4, 9) +
           (rng_.Below(2) == 0 ? ".php" : "");
  }

  std::string EncodedRedirect() {
    const std::string target = "https://" + std::string(Pick(rng_, kBrands)) +
                               "." + std::string(Pick(rng_, kLureWords)) +
                               "." + std::string(Pick(rng_, kShadyTlds)) +
                               "/?id=" + RandomToken(rng_, kAlnum, 10);
    return Scheme() + RandomDomain() + "/redirect.php?url=" +
           PercentEncode(target) +
           "&token=" + RandomToken(rng_, kHex, 32);
  }

  std::string AtTrick() {
    const std::string decoy =
        std::string(Pick(rng_, kBrands)) + ".com";
    const std::string real =
        rng_.Below(2) == 0 ? RandomIp(rng_) : RandomDomain();
    return Scheme() + decoy + "@" + real + RandomPath(1, 3);
  }

  std::string Payload() {
    return "http://" + RandomDomain() + "/" +
           std::string(Pick(rng_, kPathWords)) + "/" +
           RandomToken(rng_, kAlnum, InRange(rng_, 4, 12)) + "/" +
           std::string(Pick(rng_, kPayloads));
  }

  std::string DeepSubdomain() {
    std::string host = std::string(Pick(rng_, kBrands)) + ".com";
    const auto depth = InRange(rng_, 2, 4);
    for (std::size_t i = 0; i < depth; ++i) {
      host += "." + RandomToken(rng_, kAlnum, InRange(rng_, 3, 10));
    }
    host += "." + std::string(Pick(rng_, kShadyTlds));
    return Scheme() + host + "/" + std::string(Pick(rng_, kLureWords)) +
           "?" + RandomToken(rng_, kAlnum, 3) + "=" +
           RandomToken(rng_, kAlnum, InRange(rng_, 8, 24));
  }

  Rng rng_;
};

std::string_view TrimLine(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                           line.back() == '\t')) {
    line.remove_suffix(1);
  }
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
    line.remove_prefix(1);
  }
  return line;
}

std::vector<std::string_view> SplitLines(std::string_view body) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    lines.push_back(body.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

bool LooksLikeUrl(std::string_view s) {
  if (s.find_first_of(" \t") != std::string_view::npos) return false;
  try {
    normalize_url(s);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

std::string_view SourceName(Source source) {
  switch (source) {
    case Source::kUrlhaus: return "urlhaus";
    case Source::kPhishtank: return "phishtank";
    case Source::kSynthetic: return "synthetic";
    case Source::kUserFile: return "user_file";
  }
  return "unknown";
}

std::size_t Dataset::count_label(int label) const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(),
                    [label](const LabeledUrl& r) { return r.label == label; }));
}

Labels Dataset::labels() const {
  Labels out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.label);
  return out;
}

std::vector<LabeledUrl> parse_urlhaus_text(std::string_view body,
                                           ParseReport* report) {
  std::vector<LabeledUrl> out;
  ParseReport local;
  for (const auto raw : SplitLines(body)) {
    const auto line = TrimLine(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!LooksLikeUrl(line)) {
      ++local.skipped;
      continue;
    }
    out.push_back({std::string(line), 1, Source::kUrlhaus});
    ++local.emitted;
  }
  if (report) *report = local;
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view body) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const char c = body[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < body.size() && body[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_has_content = false;
        break;
      default:
        field.push_back(c);
        row_has_content = true;
    }
  }
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<LabeledUrl> parse_phishtank_csv(std::string_view body,
                                            ParseReport* report) {
  const auto rows = parse_csv(body);
  if (rows.empty()) {
    throw Error(ErrorCode::kFormat, "PhishTank CSV has no header row");
  }
  const auto& header = rows.front();
  const auto it = std::find_if(header.begin(), header.end(), [](const auto& h) {
    return TrimLine(h) == "url";
  });
  if (it == header.end()) {
    throw Error(ErrorCode::kFormat, "PhishTank CSV header has no \"url\" column");
  }
  const auto column = static_cast<std::size_t>(it - header.begin());
  std::vector<LabeledUrl> out;
  ParseReport local;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (column >= row.size() || TrimLine(row[column]).empty() ||
        !LooksLikeUrl(TrimLine(row[column]))) {
      ++local.skipped;
      continue;
    }
    out.push_back({std::string(TrimLine(row[column])), 1, Source::kPhishtank});
    ++local.emitted;
  }
  if (report) *report = local;
  return out;
}

void BenignGenConfig::validate() const {
  if (domains.empty()) {
    throw Error(ErrorCode::kConfig, "benign generator needs at least one domain");
  }
  if (min_path_segments < 1 || min_path_segments > max_path_segments ||
      min_query_params > max_query_params) {
    throw Error(ErrorCode::kConfig, "invalid benign generator ranges");
  }
}

std::vector<LabeledUrl> generate_benign(std::size_t n,
                                        const BenignGenConfig& cfg) {
  BenignGenerator gen(cfg);
  std::vector<LabeledUrl> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({gen.Next(), 0, Source::kSynthetic});
  }
  return out;
}

std::vector<LabeledUrl> generate_malicious_style(std::size_t n,
                                                 std::uint64_t seed) {
  MaliciousGenerator gen(seed);
  std::vector<LabeledUrl> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({gen.Next(), 1, Source::kSynthetic});
  }
  return out;
}

Dataset generate_desk_corpus(std::size_t per_class, std::uint64_t seed) {
  BenignGenConfig benign_cfg;
  benign_cfg.seed = DeriveSeed(seed, "benign");
  BenignGenerator benign(benign_cfg);
  MaliciousGenerator malicious(DeriveSeed(seed, "malicious"));

  Dataset ds;
  ds.seed = seed;
  std::unordered_set<std::string> seen;
  auto fill = [&](auto& gen, int label) {
    std::size_t have = 0;
    while (have < per_class) {
      std::string url = gen.Next();
      if (!seen.insert(normalize_url(url).text()).second) continue;
      ds.records.push_back({std::move(url), label, Source::kSynthetic});
      ++have;
    }
  };
  fill(benign, 0);
  fill(malicious, 1);
  // Interleave the classes deterministically so file order carries no label
  // signal.
  Rng rng(DeriveSeed(seed, "corpus-order"));
  for (std::size_t i = ds.records.size(); i > 1; --i) {
    std::swap(ds.records[i - 1], ds.records[rng.Below(i)]);
  }
  return ds;
}

Dataset dedup(std::vector<LabeledUrl> records, std::uint64_t seed,
              DedupReport* report) {
  Dataset ds;
  ds.seed = seed;
  DedupReport local;
  std::unordered_set<std::string> seen;
  for (auto& r : records) {
    std::string key;
    try {
      key = normalize_url(r.url).text();
    } catch (const Error&) {
      ++local.malformed;
      continue;
    }
    if (!seen.insert(std::move(key)).second) {
      ++local.duplicates;
      continue;
    }
    ds.records.push_back(std::move(r));
  }
  if (report) *report = local;
  return ds;
}

void SplitConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "train_fraction must be in (0, 1)");
  }
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             const SplitConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  auto shuffle = [&rng](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[rng.Below(i)]);
    }
  };
  auto take = [&](std::size_t count) {
    return static_cast<std::size_t>(
        std::llround(cfg.train_fraction * static_cast<double>(count)));
  };

  std::vector<char> in_train(ds.size(), 0);
  if (cfg.stratified) {
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      by_class[ds.records[i].label == 1 ? 1 : 0].push_back(i);
    }
    if (by_class[0].empty() || by_class[1].empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "stratified split needs at least one record of each class");
    }
    for (auto& members : by_class) {
      shuffle(members);
      const auto n_train = take(members.size());
      for (std::size_t j = 0; j < n_train; ++j) in_train[members[j]] = 1;
    }
  } else {
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), 0);
    shuffle(all);
    const auto n_train = take(all.size());
    for (std::size_t j = 0; j < n_train; ++j) in_train[all[j]] = 1;
  }

  Dataset train;
  Dataset test;
  train.seed = test.seed = ds.seed;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    (in_train[i] ? train : test).records.push_back(ds.records[i]);
  }
  return {std::move(train), std::move(test)};
}

Dataset parse_dataset_text(std::string_view body, ParseReport* report) {
  Dataset ds;
  ParseReport local;
  for (const auto raw : SplitLines(body)) {
    const auto line = TrimLine(raw);
    if (line.empty()) continue;
    if (line.size() < 3 || (line[0] != '0' && line[0] != '1') ||
        line[1] != '\t' || !LooksLikeUrl(TrimLine(line.substr(2)))) {
      ++local.skipped;
      continue;
    }
    ds.records.push_back(
        {std::string(TrimLine(line.substr(2))), line[0] - '0', Source::kUserFile});
    ++local.emitted;
  }
  if (report) *report = local;
  return ds;
}

Dataset load_dataset_file(const std::string& path, ParseReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open dataset file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_text(buffer.str(), report);
}

void save_dataset_file(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write dataset file " + path);
  for (const auto& r : ds.records) {
    out << r.label << '\t' << r.url << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

std::string fetch_feed(const std::string& endpoint,
                       std::chrono::milliseconds timeout) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos ||
      (endpoint.compare(0, scheme_end, "http") != 0 &&
       endpoint.compare(0, scheme_end, "https") != 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "feed endpoint must be an http(s) URL: " + endpoint);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  const std::string origin = endpoint.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : endpoint.substr(path_start);
  if (origin.size() <= scheme_end + 3) {
    throw Error(ErrorCode::kInvalidArgument, "feed endpoint has no host");
  }

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Get(path);
  const auto elapsed = std::chrono::steady_clock::now() - started;
  if (!res) {
    const auto err = res.error();
    // httplib reports a read timeout as a plain read error.
    if (err == httplib::Error::ConnectionTimeout ||
        ((err == httplib::Error::Read || err == httplib::Error::Connection) &&
         elapsed >= timeout)) {
      throw Error(ErrorCode::kTimeout, "timed out fetching " + endpoint);
    }
    throw Error(ErrorCode::kNetwork,
                "fetching " + endpoint + " failed: " + httplib::to_string(err));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kHttpStatus, "fetching " + endpoint +
                                            " returned HTTP " +
                                            std::to_string(res->status));
  }
  return std::move(res->body);
}

}  // namespace urlsentinel
