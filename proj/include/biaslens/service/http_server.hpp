#pragma once

#include <memory>
#include <string>
#include <thread>

#include "biaslens/service/service.hpp"

namespace httplib {
class Server;
}

namespace biaslens::service {

/// Routes:
///   POST /analyze                 POST /analyze/batch
///   GET  /jobs/{id}               GET  /report/{id}
///   POST /report/{id}/notes       GET  /report/{id}/download
///   POST /mapping                 GET  /health
/// The token, when configured, is read from the Authorization header
/// ("Bearer <token>") or X-Biaslens-Token.
class HttpServer {
 public:
  explicit HttpServer(AnalysisService& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);

  /// Serves until stop(). Requires a prior bind().
  void listen();

  /// bind() + listen() on a background thread.
  int start(const std::string& host, int port);

  void stop();

 private:
  AnalysisService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::jthread thread_;
};

}  // namespace biaslens::service
