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

#ifndef URLSENTINEL_SERVICE_H_
#define URLSENTINEL_SERVICE_H_

#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "urlsentinel/model_store.h"
#include "urlsentinel/pipeline.h"

namespace httplib {
class Server;
}

namespace urlsentinel {

inline constexpr std::size_t kMaxBatchUrls = 1000;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t worker_count = 4;
  std::size_t max_batch = kMaxBatchUrls;
};

// Splits "host:port". A bare port binds 0.0.0.0. Throws Error(kConfig).
ServiceConfig parse_bind_address(const std::string& bind);

std::string prediction_to_json(const PredictionResult& result);

// Short identifier derived from the bundle's serialized bytes.
std::string bundle_version(const ModelBundle& bundle);

// JSON prediction API over a shared read-only bundle.
//
//   GET  /health          {status, model_version}; 503 without a model
//   POST /classify        {"url": "..."} -> prediction
//   POST /classify/batch  {"urls": [...]} -> {"results": [...], "errors": [...]}
//   GET  /model/info      metadata and metric snapshot
//
// Every response carries permissive CORS headers.
class PredictionServer {
 public:
  explicit PredictionServer(ServiceConfig config);
  ~PredictionServer();

  PredictionServer(const PredictionServer&) = delete;
  PredictionServer& operator=(const PredictionServer&) = delete;

  // Swaps the served bundle. Requests in flight keep the one they started with.
  void set_bundle(std::shared_ptr<const ModelBundle> bundle);
  std::shared_ptr<const ModelBundle> bundle() const;
  std::string model_version() const;

  // Binds the socket and returns the bound port. Throws Error(kNetwork).
  int bind();
  // Blocks until stop(). Binds first if needed.
  void listen();
  // Runs listen() on a background thread and waits until it accepts.
  void start();
  void stop();

  int port() const { return port_; }
  const ServiceConfig& config() const { return config_; }

 private:
  struct Snapshot {
    std::shared_ptr<const ModelBundle> bundle;
    std::string version;
  };
  Snapshot snapshot() const;
  void install_routes();

  ServiceConfig config_;
  std::unique_ptr<httplib::Server> server_;
  mutable std::mutex mu_;
  Snapshot current_;
  int port_ = -1;
  std::thread thread_;
};

}  // namespace urlsentinel

#endif  // URLSENTINEL_SERVICE_H_
