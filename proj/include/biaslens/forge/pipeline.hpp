#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biaslens/forge/clustering.hpp"
#include "biaslens/forge/verification.hpp"
#include "biaslens/gateway/gateway.hpp"

namespace biaslens::forge {

struct BuildOptions {
  ClusterParams cluster;
  int confidence_threshold = 6;
  std::size_t parallelism = 1;
  /// Also write a store of every verified indicator (no clustering), used by
  /// the clustering ablation.
  std::optional<std::filesystem::path> unclustered_out;
};

struct BuildSummary {
  std::size_t raw_count = 0;
  std::size_t conflict_free_count = 0;
  std::size_t verified_count = 0;
  std::size_t cluster_count = 0;
  std::size_t final_count = 0;
  double alpha = 0.0;
  int confidence_threshold = 0;
  bool per_leaning = false;
  std::string build_params_digest;
  std::size_t warning_count = 0;
};

/// Single-line JSON rendering of the summary.
std::string to_json_line(const BuildSummary& summary);

/// One JSON object per line with fields id, body, leaning. Any malformed
/// line, duplicate id or empty body is an Error(schema_violation) naming
/// the line.
std::vector<LabeledArticle> load_corpus(const std::filesystem::path& path);

std::string build_params_digest(const BuildOptions& options, const gateway::ProviderConfig& provider);

/// generate -> eliminate conflicts -> score/filter -> embed verified set ->
/// cluster -> representatives -> write the vector store to `output`.
/// Gateway failures of any article or indicator abort the build with an
/// aggregated Error after the stage completes.
BuildSummary build_database(gateway::Gateway& gateway, std::span<const LabeledArticle> corpus,
                            const BuildOptions& options, const std::filesystem::path& output);

BuildSummary build_database(gateway::Gateway& gateway, const std::filesystem::path& corpus_path,
                            const BuildOptions& options, const std::filesystem::path& output);

}  // namespace biaslens::forge
