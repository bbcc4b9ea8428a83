#pragma once

// HTTP inference service. Service holds the request logic and is usable
// without sockets; Server binds it to cpp-httplib.
//
//   GET  /model/info  -> {dim, n_file_cycles, method, bounds, param_count, model_bytes, ...}
//   POST /trace       {seeds: [[x, y], ...], cycles: "all" | [j, ...]}
//                     -> {trajectories: [{positions, valid}], cycles, inference_ms}
// Errors carry {"error": message}: 400 for malformed requests, 503 when no
// model is loaded.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "flowmap/mlp.hpp"

namespace flowmap {

struct HttpReply {
  int status = 200;
  std::string body;  // application/json
};

class Service {
 public:
  Service() = default;
  Service(MlpModel model, std::uintmax_t model_bytes);
  static Service from_file(const std::filesystem::path& path);

  bool loaded() const { return model_.has_value(); }
  HttpReply model_info() const;
  HttpReply trace(std::string_view request_body) const;

 private:
  std::optional<MlpModel> model_;
  std::uintmax_t model_bytes_ = 0;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;                 // 0 picks a free port
  std::string cors_origin = "*";
};

class Server {
 public:
  Server(const Service& service, ServeOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts answering on a background thread; returns the port.
  /// Throws Error if the address cannot be bound.
  int start();
  /// Binds, calls on_bound(port), then answers on the calling thread until
  /// stop() is called.
  void run(const std::function<void(int)>& on_bound = {});
  void stop();
  int port() const { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace flowmap
