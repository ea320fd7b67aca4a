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

#include "urlsentinel/model_store.h"

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "urlsentinel/errors.h"
#include "urlsentinel/ingest.h"
#include "urlsentinel/pipeline.h"
#include "urlsentinel/rng.h"

namespace urlsentinel {
namespace {

ModelBundle MakeBundle(bool with_forest, std::uint64_t seed = 1) {
  ModelBundle b;
  b.scaler.mean = {40.0, 2.0, 4.0, 3.9};
  b.scaler.std = {12.5, 1.1, 1.7, 0.4};
  const std::vector<std::size_t> dims{feature_dim(b.vectorizer), 512, 256, 1};
  b.network = init_weights(dims, seed);
  if (with_forest) {
    Rng rng(seed);
    FeatureMatrix x(300, static_cast<Eigen::Index>(feature_dim(b.vectorizer)));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.Normal();
    ForestParams params;
    params.seed = seed;
    b.forest = fit_forest(x, params);
  }
  b.metadata.created_at = "2026-01-01T00:00:00Z";
  b.metadata.corpus_description = "unit test";
  b.metadata.metrics = {{"accuracy", 0.5}, {"roc_auc", 0.25}};
  return b;
}

ErrorCode LoadError(std::vector<std::uint8_t> bytes) {
  try {
    deserialize_bundle(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "corruption not detected";
  return ErrorCode::kInvalidArgument;
}

TEST(Crc32Test, KnownVector) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())),
            0xCBF43926u);
}

TEST(BundleTest, RoundTripDeepEquality) {
  const ModelBundle b = MakeBundle(true);
  const auto bytes = serialize_bundle(b);
  const ModelBundle back = deserialize_bundle(bytes);
  EXPECT_EQ(back, b);
  EXPECT_EQ(serialize_bundle(back), bytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), "URLSNTL1");
}

TEST(BundleTest, RoundTripWithoutForest) {
  const ModelBundle b = MakeBundle(false);
  EXPECT_EQ(deserialize_bundle(serialize_bundle(b)), b);
}

TEST(BundleTest, ProbePredictionsBitIdentical) {
  const ModelBundle b = MakeBundle(false, 4);
  const auto path =
      (std::filesystem::temp_directory_path() / "urlsentinel_probe.usnl").string();
  save_bundle(b, path);
  const ModelBundle back = load_bundle(path);
  std::filesystem::remove(path);
  const Dataset probe = generate_desk_corpus(50, 9);
  for (const auto& r : probe.records) {
    EXPECT_EQ(classify_url(r.url, back).score, classify_url(r.url, b).score);
  }
}

TEST(BundleTest, SizeAccounting) {
  const ModelBundle b = MakeBundle(false);
  const auto f64 = serialize_bundle(b);
  EXPECT_GE(f64.size(), 4u << 20);
  EXPECT_LE(f64.size(), 8u << 20);
  const auto f32 = serialize_bundle(b, ParameterEncoding::kFloat32);
  EXPECT_GE(f32.size(), 1u << 20);
  EXPECT_LE(f32.size(), 3u << 20);
}

TEST(BundleTest, Float32PredictionsWithinTolerance) {
  const ModelBundle b = MakeBundle(false, 6);
  const ModelBundle narrow =
      deserialize_bundle(serialize_bundle(b, ParameterEncoding::kFloat32));
  const Dataset probe = generate_desk_corpus(50, 10);
  for (const auto& r : probe.records) {
    EXPECT_NEAR(classify_url(r.url, narrow).score, classify_url(r.url, b).score,
                1e-5);
  }
}

TEST(BundleTest, DistinctErrors) {
  const auto bytes = serialize_bundle(MakeBundle(true));
  EXPECT_EQ(LoadError({}), ErrorCode::kMagicMismatch);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(LoadError(bad_magic), ErrorCode::kMagicMismatch);

  auto bumped = bytes;
  bumped[8] = 2;
  EXPECT_EQ(LoadError(bumped), ErrorCode::kUnsupportedVersion);

  auto truncated = bytes;
  truncated.resize(bytes.size() / 2);
  EXPECT_EQ(LoadError(truncated), ErrorCode::kTruncated);

  auto last = bytes;
  last.back() ^= 0x01;
  EXPECT_EQ(LoadError(last), ErrorCode::kChecksum);

  auto middle = bytes;
  middle[bytes.size() / 2] ^= 0x80;
  EXPECT_EQ(LoadError(middle), ErrorCode::kChecksum);
}

TEST(BundleTest, StreamInterfaces) {
  const ModelBundle b = MakeBundle(false);
  std::stringstream ss;
  save_bundle(b, ss);
  EXPECT_EQ(load_bundle(ss), b);
  std::stringstream empty;
  EXPECT_THROW(load_bundle(empty), Error);
  EXPECT_THROW(load_bundle("/nonexistent/model.usnl"), Error);
}

TEST(BundleTest, InvariantsValidated) {
  ModelBundle b = MakeBundle(false);
  b.vectorizer.n_features = 500;
  EXPECT_THROW(b.validate(), Error);
  EXPECT_THROW(serialize_bundle(b), Error);
}

}  // namespace
}  // namespace urlsentinel
