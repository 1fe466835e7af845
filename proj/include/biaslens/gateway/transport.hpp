#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "biaslens/common.hpp"

namespace biaslens::gateway {

enum class GatewayMode { live, record, replay };

std::string_view to_string(GatewayMode mode);
GatewayMode parse_mode(std::string_view text);

struct ProviderConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo-16k";
  std::string embedding_model = "text-embedding-ada-002";
  std::size_t embedding_dimension = 1536;
  std::chrono::milliseconds request_timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1'000};
  GatewayMode mode = GatewayMode::live;
  std::filesystem::path fixture_path;
  /// Name of the environment variable holding the bearer token.
  std::string api_key_env = "OPENAI_API_KEY";

  /// Throws Error(invalid_argument) when an invariant is violated.
  void validate() const;
};

/// Raised by transports. `retryable` distinguishes network errors and
/// 429/5xx from permanent rejections.
class TransportError : public Error {
 public:
  TransportError(const std::string& message, bool retryable)
      : Error(ErrorCode::transport_failure, message), retryable_(retryable) {}
  [[nodiscard]] bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

/// Wire-level access to a chat-completion and embedding provider.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string chat(const std::string& prompt) = 0;
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) = 0;
};

/// OpenAI-compatible HTTP(S) transport: POST {endpoint}/chat/completions and
/// {endpoint}/embeddings, temperature pinned to 0.
std::unique_ptr<Transport> make_http_transport(const ProviderConfig& config);

}  // namespace biaslens::gateway
