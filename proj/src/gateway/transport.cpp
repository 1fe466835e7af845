#include "biaslens/gateway/transport.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace biaslens::gateway {

std::string_view to_string(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::live: return "live";
    case GatewayMode::record: return "record";
    case GatewayMode::replay: return "replay";
  }
  return "live";
}

GatewayMode parse_mode(std::string_view text) {
  if (text == "live") return GatewayMode::live;
  if (text == "record") return GatewayMode::record;
  if (text == "replay") return GatewayMode::replay;
  throw Error(ErrorCode::invalid_argument, fmt::format("unknown gateway mode '{}'", text));
}

void ProviderConfig::validate() const {
  if (embedding_dimension == 0) {
    throw Error(ErrorCode::invalid_argument, "embedding dimension must be positive");
  }
  if (max_retries < 0) throw Error(ErrorCode::invalid_argument, "max retries must be >= 0");
  if (mode != GatewayMode::live && fixture_path.empty()) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("{} mode requires a fixture path", to_string(mode)));
  }
}

namespace {

using nlohmann::json;

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const ProviderConfig& config) : config_(config) {
    // Split "https://host:port/base" into the client origin and a path prefix.
    auto scheme_end = config.endpoint.find("://");
    auto path_start = config.endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    origin_ = config.endpoint.substr(0, path_start);
    base_path_ = path_start == std::string::npos ? "" : config.endpoint.substr(path_start);
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
  }

  std::string chat(const std::string& prompt) override {
    json body = {{"model", config_.model},
                 {"temperature", 0},
                 {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    auto response = post("/chat/completions", body);
    try {
      return response.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw TransportError(fmt::format("malformed chat response: {}", e.what()), false);
    }
  }

  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    json body = {{"model", config_.embedding_model}, {"input", texts}};
    auto response = post("/embeddings", body);
    std::vector<Embedding> out(texts.size());
    try {
      for (const auto& item : response.at("data")) {
        auto index = item.at("index").get<std::size_t>();
        if (index >= out.size()) throw TransportError("embedding index out of range", false);
        out[index] = item.at("embedding").get<Embedding>();
      }
    } catch (const json::exception& e) {
      throw TransportError(fmt::format("malformed embedding response: {}", e.what()), false);
    }
    return out;
  }

 private:
  json post(const std::string& path, const json& body) {
    httplib::Client client(origin_);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(config_.request_timeout);
    client.set_connection_timeout(seconds);
    client.set_read_timeout(seconds);
    client.set_write_timeout(seconds);
    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
    auto result = client.Post(base_path_ + path, headers, body.dump(), "application/json");
    if (!result) {
      throw TransportError(
          fmt::format("request to {} failed: {}", path, httplib::to_string(result.error())), true);
    }
    if (result->status < 200 || result->status >= 300) {
      bool retryable = result->status == 429 || result->status >= 500;
      throw TransportError(fmt::format("{} returned HTTP {}", path, result->status), retryable);
    }
    try {
      return json::parse(result->body);
    } catch (const json::exception& e) {
      throw TransportError(fmt::format("{} returned invalid JSON: {}", path, e.what()), false);
    }
  }

  ProviderConfig config_;
  std::string origin_;
  std::string base_path_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const ProviderConfig& config) {
  return std::make_unique<HttpTransport>(config);
}

}  // namespace biaslens::gateway
