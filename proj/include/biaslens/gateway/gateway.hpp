#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "biaslens/gateway/fixture_store.hpp"
#include "biaslens/gateway/prompt.hpp"
#include "biaslens/gateway/tagged_line.hpp"
#include "biaslens/gateway/transport.hpp"

namespace biaslens::gateway {

/// Uniform boundary to the chat and embedding providers.
///
/// live:   every call goes to the transport.
/// record: every call goes to the transport; the response is appended to the
///         fixture file before it is returned.
/// replay: responses come from the fixture file only; a missing digest is an
///         Error(replay_miss). The transport is never touched.
///
/// Safe for concurrent use. Fixture writes are serialized; replay lookups
/// read an immutable map.
class Gateway {
 public:
  /// `transport` defaults to the HTTP transport in live/record mode.
  explicit Gateway(ProviderConfig config, PromptLibrary prompts = PromptLibrary::defaults(),
                   std::shared_ptr<Transport> transport = nullptr);

  /// Renders the template for `kind` and completes it. Throws
  /// Error(missing_slot) before any provider traffic if a slot is absent.
  std::string complete_chat(PromptKind kind, const SlotMap& slots);

  /// Completes an already-rendered prompt. `tag` namespaces the digest.
  std::string complete_rendered(std::string_view tag, const std::string& prompt);

  /// One vector per text, in input order, each of the configured dimension.
  std::vector<Embedding> embed_texts(const std::vector<std::string>& texts);

  [[nodiscard]] const ProviderConfig& config() const { return config_; }
  [[nodiscard]] const PromptLibrary& prompts() const { return prompts_; }

 private:
  template <typename Call>
  auto with_retries(Call&& call) -> decltype(call());

  std::string lookup_or_miss(const std::string& digest, std::string_view what) const;
  Embedding decode_embedding(const std::string& payload) const;

  ProviderConfig config_;
  PromptLibrary prompts_;
  std::shared_ptr<Transport> transport_;
  FixtureStore fixtures_;
  std::mutex record_mutex_;
};

}  // namespace biaslens::gateway
