#pragma once

#include <string>
#include <vector>

#include "biaslens/engine/spans.hpp"
#include "biaslens/engine/types.hpp"
#include "biaslens/engine/voting.hpp"
#include "biaslens/gateway/gateway.hpp"
#include "biaslens/store/vector_store.hpp"

namespace biaslens::engine {

struct EngineOptions {
  std::size_t m = 5;            // indicators retrieved per descriptor
  std::size_t parallelism = 1;  // concurrent mapping calls per article
};

/// A failure inside analyze_article, tagged with the stage it came from
/// ("descriptor-generation", "matching", "prediction", "mapping").
class AnalysisError : public Error {
 public:
  AnalysisError(ErrorCode code, std::string stage, const std::string& message)
      : Error(code, message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// Online analysis over an immutable store. Holds no mutable state of its
/// own, so one engine may serve concurrent calls.
class AnalysisEngine {
 public:
  AnalysisEngine(gateway::Gateway& gateway, const store::VectorStore& store,
                 EngineOptions options = {}, Clock clock = system_clock());

  /// One descriptor-generation call, then one embedding batch. No parsable
  /// line yields an empty list and a warning.
  std::vector<Descriptor> generate_descriptors(const Article& article,
                                               std::vector<std::string>* warnings = nullptr) const;

  std::vector<DescriptorMatchSet> match_descriptors(std::span<const Descriptor> descriptors) const;

  SpanMapping map_descriptor_to_spans(std::string descriptor_id, const std::string& descriptor_text,
                                      const Article& article) const;

  /// descriptors -> matches -> prediction -> one mapping per descriptor.
  /// An article without descriptors is reported neutral with
  /// `no_descriptors` set. Throws AnalysisError.
  AnalysisReport analyze_article(const Article& article) const;

  [[nodiscard]] const EngineOptions& options() const { return options_; }
  [[nodiscard]] const store::VectorStore& store() const { return store_; }

 private:
  gateway::Gateway& gateway_;
  const store::VectorStore& store_;
  EngineOptions options_;
  Clock clock_;
};

}  // namespace biaslens::engine
