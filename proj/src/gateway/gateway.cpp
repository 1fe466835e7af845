#include "biaslens/gateway/gateway.hpp"

#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace biaslens::gateway {

namespace {
constexpr std::string_view kEmbeddingTag = "embedding";
}

Gateway::Gateway(ProviderConfig config, PromptLibrary prompts,
                 std::shared_ptr<Transport> transport)
    : config_(std::move(config)), prompts_(std::move(prompts)), transport_(std::move(transport)) {
  config_.validate();
  if (config_.mode == GatewayMode::replay) {
    fixtures_ = FixtureStore::load(config_.fixture_path, true);
  } else if (!transport_) {
    transport_ = make_http_transport(config_);
  }
}

template <typename Call>
auto Gateway::with_retries(Call&& call) -> decltype(call()) {
  auto delay = config_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return call();
    } catch (const TransportError& e) {
      if (!e.retryable() || attempt >= config_.max_retries) {
        throw TransportError(
            fmt::format("{} (after {} attempt(s))", e.what(), attempt + 1), false);
      }
      spdlog::warn("provider call failed ({}); retry {}/{} in {} ms", e.what(), attempt + 1,
                   config_.max_retries, delay.count());
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

std::string Gateway::lookup_or_miss(const std::string& digest, std::string_view what) const {
  if (const auto* hit = fixtures_.find(digest)) return *hit;
  throw Error(ErrorCode::replay_miss,
              fmt::format("no recorded response for {} (digest {})", what, digest));
}

std::string Gateway::complete_chat(PromptKind kind, const SlotMap& slots) {
  auto rendered = prompts_.get(kind).render(slots);
  return complete_rendered(to_string(kind), rendered);
}

std::string Gateway::complete_rendered(std::string_view tag, const std::string& prompt) {
  auto digest = request_digest(tag, prompt, config_.model);
  if (config_.mode == GatewayMode::replay) {
    return lookup_or_miss(digest, fmt::format("{} prompt", tag));
  }
  auto response = with_retries([&] { return transport_->chat(prompt); });
  if (config_.mode == GatewayMode::record) {
    std::lock_guard lock(record_mutex_);
    FixtureStore::append(config_.fixture_path, digest, response);
    fixtures_.put(digest, response);
  }
  return response;
}

Embedding Gateway::decode_embedding(const std::string& payload) const {
  Embedding vec;
  try {
    vec = nlohmann::json::parse(payload).get<Embedding>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, fmt::format("bad recorded embedding: {}", e.what()));
  }
  return vec;
}

std::vector<Embedding> Gateway::embed_texts(const std::vector<std::string>& texts) {
  if (texts.empty()) throw Error(ErrorCode::empty_input, "embed_texts called with no texts");
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (text::is_blank(texts[i])) {
      throw Error(ErrorCode::empty_input, fmt::format("text #{} is blank", i));
    }
  }

  auto check = [&](const Embedding& v, std::size_t i) {
    if (v.size() != config_.embedding_dimension) {
      throw Error(ErrorCode::dimension_mismatch,
                  fmt::format("embedding #{} has dimension {}, expected {}", i, v.size(),
                              config_.embedding_dimension));
    }
  };

  std::vector<Embedding> out;
  out.reserve(texts.size());
  if (config_.mode == GatewayMode::replay) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto digest = request_digest(kEmbeddingTag, texts[i], config_.embedding_model);
      out.push_back(decode_embedding(lookup_or_miss(digest, "embedding")));
      check(out.back(), i);
    }
    return out;
  }

  out = with_retries([&] { return transport_->embed(texts); });
  if (out.size() != texts.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("provider returned {} embeddings for {} texts", out.size(),
                            texts.size()));
  }
  for (std::size_t i = 0; i < out.size(); ++i) check(out[i], i);

  if (config_.mode == GatewayMode::record) {
    std::lock_guard lock(record_mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto digest = request_digest(kEmbeddingTag, texts[i], config_.embedding_model);
      auto payload = nlohmann::json(out[i]).dump();
      FixtureStore::append(config_.fixture_path, digest, payload);
      fixtures_.put(digest, std::move(payload));
    }
  }
  return out;
}

}  // namespace biaslens::gateway
