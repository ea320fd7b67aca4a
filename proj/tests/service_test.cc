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

#include "urlsentinel/service.h"

#include <future>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

using nlohmann::json;

std::shared_ptr<const ModelBundle> SmallBundle(std::uint64_t seed) {
  auto b = std::make_shared<ModelBundle>();
  b->vectorizer.n_features = 64;
  const std::vector<std::size_t> dims{feature_dim(b->vectorizer), 8, 1};
  b->network = init_weights(dims, seed);
  b->metadata.created_at = "2026-02-03T04:05:06Z";
  b->metadata.metrics = {{"accuracy", 0.75}};
  return b;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig cfg;
    cfg.port = 0;
    cfg.worker_count = 4;
    server_ = std::make_unique<PredictionServer>(cfg);
    server_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", server_->port());
  }
  void TearDown() override { server_->stop(); }

  httplib::Result Post(const std::string& path, const std::string& body) {
    return client_->Post(path, body, "application/json");
  }

  std::unique_ptr<PredictionServer> server_;
  std::unique_ptr<httplib::Client> client_;
};

TEST_F(ServiceTest, HealthWithoutModelIs503) {
  auto res = client_->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 503);
  EXPECT_EQ(Post("/classify", R"({"url":"http://a.com"})")->status, 503);
  EXPECT_EQ(client_->Get("/model/info")->status, 503);
}

TEST_F(ServiceTest, HealthWithModel) {
  const auto bundle = SmallBundle(1);
  server_->set_bundle(bundle);
  auto res = client_->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["status"], "ok");
  EXPECT_EQ(j["model_version"], bundle_version(*bundle));
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, ClassifySchema) {
  const auto bundle = SmallBundle(2);
  server_->set_bundle(bundle);
  auto res = Post("/classify", R"({"url":"http://known-bad.example"})");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
  const json j = json::parse(res->body);
  const std::string label = j["label"];
  EXPECT_TRUE(label == "benign" || label == "malicious");
  const double score = j["score"];
  EXPECT_EQ(label == "malicious", score >= 0.5);
  EXPECT_EQ(score, classify_url("http://known-bad.example", *bundle).score);
  EXPECT_EQ(j["url"], "http://known-bad.example");
  for (const char* key : {"length", "dot_count", "slash_count", "entropy"}) {
    EXPECT_TRUE(j["stat_features"].contains(key)) << key;
  }
  EXPECT_TRUE(j["latency_us"].is_number());
}

TEST_F(ServiceTest, MalformedRequestsAre400) {
  server_->set_bundle(SmallBundle(3));
  EXPECT_EQ(Post("/classify", "{}")->status, 400);
  EXPECT_EQ(Post("/classify", "not json")->status, 400);
  EXPECT_EQ(Post("/classify", R"({"url": 5})")->status, 400);
  EXPECT_EQ(Post("/classify", R"(["http://a"])")->status, 400);
  auto empty = Post("/classify", R"({"url": "   "})");
  EXPECT_EQ(empty->status, 400);
  EXPECT_TRUE(json::parse(empty->body).contains("error"));
  EXPECT_EQ(Post("/classify/batch", R"({"urls": "x"})")->status, 400);
  EXPECT_EQ(Post("/classify/batch", R"({"urls": [1]})")->status, 400);
}

TEST_F(ServiceTest, BatchEndpoint) {
  server_->set_bundle(SmallBundle(4));
  auto res = Post("/classify/batch",
                  R"({"urls": ["http://a.com", "", "https://b.org/x"]})");
  ASSERT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  ASSERT_TRUE(j.is_array());
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[0]["url"], "http://a.com");
  EXPECT_TRUE(j[1].contains("error"));
  EXPECT_TRUE(j[2].contains("score"));

  json big = {{"urls", json::array()}};
  for (std::size_t i = 0; i <= kMaxBatchUrls; ++i) {
    big["urls"].push_back("http://h" + std::to_string(i) + ".com");
  }
  EXPECT_EQ(Post("/classify/batch", big.dump())->status, 413);
  big["urls"].erase(big["urls"].size() - 1);
  EXPECT_EQ(Post("/classify/batch", big.dump())->status, 200);
}

TEST_F(ServiceTest, ModelInfo) {
  server_->set_bundle(SmallBundle(5));
  auto res = client_->Get("/model/info");
  ASSERT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["created_at"], "2026-02-03T04:05:06Z");
  EXPECT_EQ(j["metrics"]["accuracy"], 0.75);
  EXPECT_EQ(j["layer_dims"], json({68, 8, 1}));
}

TEST_F(ServiceTest, PreflightAllowed) {
  auto res = client_->Options("/classify");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(ServiceTest, ConcurrentIdenticalRequestsAgree) {
  const auto bundle = SmallBundle(6);
  server_->set_bundle(bundle);
  const double expected = classify_url("http://paypal.com.evil.ru/x", *bundle).score;
  std::vector<std::future<double>> futures;
  for (int t = 0; t < 8; ++t) {
    futures.push_back(std::async(std::launch::async, [this] {
      httplib::Client c("127.0.0.1", server_->port());
      double score = -1.0;
      for (int i = 0; i < 25; ++i) {
        auto res = c.Post("/classify", R"({"url":"http://paypal.com.evil.ru/x"})",
                          "application/json");
        if (!res || res->status != 200) return -1.0;
        score = json::parse(res->body)["score"];
      }
      return score;
    }));
  }
  for (auto& f : futures) EXPECT_EQ(f.get(), expected);
}

TEST_F(ServiceTest, HotSwapChangesVersion) {
  server_->set_bundle(SmallBundle(7));
  const std::string v1 = json::parse(client_->Get("/health")->body)["model_version"];
  server_->set_bundle(SmallBundle(8));
  const std::string v2 = json::parse(client_->Get("/health")->body)["model_version"];
  EXPECT_NE(v1, v2);
  server_->set_bundle(nullptr);
  EXPECT_EQ(client_->Get("/health")->status, 503);
}

TEST(BindAddressTest, Parsing) {
  const ServiceConfig a = parse_bind_address("127.0.0.1:9000");
  EXPECT_EQ(a.host, "127.0.0.1");
  EXPECT_EQ(a.port, 9000);
  const ServiceConfig b = parse_bind_address("8081");
  EXPECT_EQ(b.host, "0.0.0.0");
  EXPECT_EQ(b.port, 8081);
  EXPECT_THROW(parse_bind_address("host:abc"), Error);
  EXPECT_THROW(parse_bind_address("host:70000"), Error);
}

TEST(PredictionJsonTest, Fields) {
  PredictionResult r;
  r.url = "http://x";
  r.label = 1;
  r.score = 0.75;
  const json j = json::parse(prediction_to_json(r));
  EXPECT_EQ(j["label"], "malicious");
  EXPECT_EQ(j["score"], 0.75);
}

}  // namespace
}  // namespace urlsentinel
