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

#include <cstdio>
#include <exception>
#include <utility>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "urlsentinel/errors.h"

namespace urlsentinel {
namespace {

using nlohmann::json;

constexpr const char* kJsonType = "application/json";

json PredictionJson(const PredictionResult& r) {
  return {{"url", r.url},
          {"label", r.label_name()},
          {"score", r.score},
          {"stat_features",
           {{"length", r.stats.length},
            {"dot_count", r.stats.dot_count},
            {"slash_count", r.stats.slash_count},
            {"entropy", r.stats.entropy}}},
          {"latency_us", r.latency_us}};
}

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJsonType);
}

void ReplyError(httplib::Response& res, int status, std::string_view message) {
  Reply(res, status, json{{"error", message}});
}

// Parses the body as a JSON object or answers 400.
std::optional<json> ParseObject(const httplib::Request& req,
                                httplib::Response& res) {
  json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.is_object()) {
    ReplyError(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  return body;
}

}  // namespace

ServiceConfig parse_bind_address(const std::string& bind) {
  ServiceConfig cfg;
  std::string port_text = bind;
  if (const auto colon = bind.rfind(':'); colon != std::string::npos) {
    cfg.host = bind.substr(0, colon);
    port_text = bind.substr(colon + 1);
  } else {
    cfg.host = "0.0.0.0";
  }
  if (cfg.host.empty()) cfg.host = "0.0.0.0";
  try {
    std::size_t used = 0;
    const int port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) {
      throw std::out_of_range("port");
    }
    cfg.port = port;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, "invalid bind address '" + bind + "'");
  }
  return cfg;
}

std::string prediction_to_json(const PredictionResult& result) {
  return PredictionJson(result).dump();
}

std::string bundle_version(const ModelBundle& bundle) {
  const auto bytes = serialize_bundle(bundle);
  // The stored trailer is the checksum of everything before it.
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", crc32(body));
  return buf;
}

PredictionServer::PredictionServer(ServiceConfig config)
    : config_(std::move(config)), server_(std::make_unique<httplib::Server>()) {
  if (config_.worker_count == 0) {
    throw Error(ErrorCode::kConfig, "worker_count must be positive");
  }
  const std::size_t workers = config_.worker_count;
  server_->new_task_queue = [workers] {
    return new httplib::ThreadPool(workers);
  };
  install_routes();
}

PredictionServer::~PredictionServer() { stop(); }

void PredictionServer::set_bundle(std::shared_ptr<const ModelBundle> bundle) {
  Snapshot next;
  if (bundle) {
    bundle->validate();
    next.version = bundle_version(*bundle);
    next.bundle = std::move(bundle);
  }
  std::lock_guard lock(mu_);
  current_ = std::move(next);
}

std::shared_ptr<const ModelBundle> PredictionServer::bundle() const {
  return snapshot().bundle;
}

std::string PredictionServer::model_version() const {
  return snapshot().version;
}

PredictionServer::Snapshot PredictionServer::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

void PredictionServer::install_routes() {
  server_->set_default_headers({
      {"Access-Control-Allow-Origin", "*"},
      {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
      {"Access-Control-Allow-Headers", "Content-Type"},
  });
  server_->set_payload_max_length(16u << 20);

  server_->set_exception_handler(
      [](const httplib::Request& req, httplib::Response& res,
         std::exception_ptr ep) {
        std::string what = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          what = e.what();
        } catch (...) {
        }
        spdlog::error("{} {} failed: {}", req.method, req.path, what);
        ReplyError(res, 500, what);
      });

  server_->Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  server_->Get("/health", [this](const httplib::Request&,
                                 httplib::Response& res) {
    const Snapshot snap = snapshot();
    if (!snap.bundle) {
      Reply(res, 503, {{"status", "unavailable"}, {"model_version", nullptr}});
      return;
    }
    Reply(res, 200, {{"status", "ok"}, {"model_version", snap.version}});
  });

  server_->Post("/classify", [this](const httplib::Request& req,
                                    httplib::Response& res) {
    const Snapshot snap = snapshot();
    if (!snap.bundle) return ReplyError(res, 503, "no model loaded");
    const auto body = ParseObject(req, res);
    if (!body) return;
    const auto url = body->find("url");
    if (url == body->end() || !url->is_string()) {
      return ReplyError(res, 400, "field 'url' must be a string");
    }
    try {
      Reply(res, 200, PredictionJson(
                          classify_url(url->get<std::string>(), *snap.bundle)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      ReplyError(res, 400, e.what());
    }
  });

  server_->Post("/classify/batch", [this](const httplib::Request& req,
                                          httplib::Response& res) {
    const Snapshot snap = snapshot();
    if (!snap.bundle) return ReplyError(res, 503, "no model loaded");
    const auto body = ParseObject(req, res);
    if (!body) return;
    const auto urls = body->find("urls");
    if (urls == body->end() || !urls->is_array()) {
      return ReplyError(res, 400, "field 'urls' must be an array");
    }
    if (urls->size() > config_.max_batch) {
      return ReplyError(res, 413, "batch exceeds " +
                                      std::to_string(config_.max_batch) +
                                      " urls");
    }
    for (const auto& u : *urls) {
      if (!u.is_string()) {
        return ReplyError(res, 400, "every entry of 'urls' must be a string");
      }
    }
    json out = json::array();
    for (const auto& u : *urls) {
      const auto raw = u.get<std::string>();
      try {
        out.push_back(PredictionJson(classify_url(raw, *snap.bundle)));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateInput) throw;
        out.push_back({{"url", raw}, {"error", e.what()}});
      }
    }
    Reply(res, 200, out);
  });

  server_->Get("/model/info", [this](const httplib::Request&,
                                     httplib::Response& res) {
    const Snapshot snap = snapshot();
    if (!snap.bundle) return ReplyError(res, 503, "no model loaded");
    const ModelBundle& b = *snap.bundle;
    json metrics = json::object();
    for (const auto& [name, value] : b.metadata.metrics) metrics[name] = value;
    Reply(res, 200,
          {{"model_version", snap.version},
           {"format_version", b.format_version},
           {"created_at", b.metadata.created_at},
           {"corpus_description", b.metadata.corpus_description},
           {"metrics", metrics},
           {"vectorizer",
            {{"ngram_min", b.vectorizer.ngram_min},
             {"ngram_max", b.vectorizer.ngram_max},
             {"n_features", b.vectorizer.n_features},
             {"l2_normalize", b.vectorizer.l2_normalize},
             {"signed", b.vectorizer.signed_hash},
             {"max_len", b.vectorizer.max_len}}},
           {"layer_dims", b.network.layer_dims},
           {"has_forest", b.forest.has_value()}});
  });
}

int PredictionServer::bind() {
  if (port_ >= 0) return port_;
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else if (server_->bind_to_port(config_.host, config_.port)) {
    port_ = config_.port;
  }
  if (port_ < 0) {
    port_ = -1;
    throw Error(ErrorCode::kNetwork, "cannot bind " + config_.host + ":" +
                                         std::to_string(config_.port));
  }
  return port_;
}

void PredictionServer::listen() {
  bind();
  spdlog::info("serving on {}:{} with {} workers", config_.host, port_,
               config_.worker_count);
  server_->listen_after_bind();
}

void PredictionServer::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void PredictionServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace urlsentinel
