#include "biaslens/service/http_server.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "biaslens/common.hpp"

namespace biaslens::service {

namespace {

void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body, api.content_type);
}

}  // namespace

HttpServer::HttpServer(AnalysisService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;

  s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    if (req.method == "OPTIONS") {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type, Authorization, X-Biaslens-Token");
      res.status = 204;
      return httplib::Server::HandlerResponse::Handled;
    }
    if (!service_.token_required() || req.path == "/health") return httplib::Server::HandlerResponse::Unhandled;
    auto credential = req.has_header("X-Biaslens-Token") ? req.get_header_value("X-Biaslens-Token")
                                                         : req.get_header_value("Authorization");
    if (service_.authorized(credential)) return httplib::Server::HandlerResponse::Unhandled;
    send(res, {401, R"({"error": {"code": "unauthorized", "message": "missing or wrong token"}})"});
    return httplib::Server::HandlerResponse::Handled;
  });

  s.Post("/analyze", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.analyze(req.body));
  });
  s.Post("/analyze/batch", [this](const httplib::Request& req, httplib::Response& res) {
    // Multipart uploads carry the file in the first file part; plain bodies are the file itself.
    if (req.is_multipart_form_data() && !req.files.empty()) {
      send(res, service_.submit_batch(req.files.begin()->second.content));
    } else {
      send(res, service_.submit_batch(req.body));
    }
  });
  s.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.job(req.matches[1]));
  });
  s.Get(R"(/report/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.report(req.matches[1]));
  });
  s.Post(R"(/report/([^/]+)/notes)", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.add_note(req.matches[1], req.body));
  });
  s.Get(R"(/report/([^/]+)/download)", [this](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    auto api = service_.download(id);
    if (api.status == 200) {
      res.set_header("Content-Disposition", "attachment; filename=\"" + id + ".json\"");
    }
    send(res, api);
  });
  s.Post("/mapping", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, service_.mapping(req.body));
  });
  s.Get("/health", [this](const httplib::Request&, httplib::Response& res) { send(res, service_.health()); });

  s.set_exception_handler([](const httplib::Request& req, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "unknown error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    spdlog::error("{} {}: {}", req.method, req.path, message);
    nlohmann::ordered_json body{{"error", {{"code", "internal"}, {"message", message}}}};
    res.status = 500;
    res.set_content(body.dump(2), "application/json");
  });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    nlohmann::ordered_json body{{"error", {{"code", res.status == 404 ? "not_found" : "http_error"},
                                           {"message", req.method + " " + req.path}}}};
    res.set_content(body.dump(2), "application/json");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() {
  if (!server_->listen_after_bind()) throw Error(ErrorCode::io_error, "HTTP server stopped unexpectedly");
}

int HttpServer::start(const std::string& host, int port) {
  int bound = bind(host, port);
  thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace biaslens::service
