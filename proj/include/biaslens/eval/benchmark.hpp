#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biaslens/eval/dataset.hpp"
#include "biaslens/eval/metrics.hpp"
#include "biaslens/gateway/gateway.hpp"
#include "biaslens/store/vector_store.hpp"

namespace biaslens::eval {

/// Which parts of the system are switched off. Without the indicator
/// database each item is classified by a direct zero-shot prompt; without
/// strict clustering the unclustered (verified-only) store is queried.
struct AblationConfig {
  bool use_indicator_database = true;
  bool use_strict_clustering = true;

  /// Throws Error(invalid_argument) if clustering is on without the database.
  void validate() const;
};

struct BenchmarkOptions {
  std::size_t m = 5;
  AblationConfig ablation;
  std::size_t parallelism = 1;
  double max_failure_rate = 0.05;
  /// Optional exemplars for the zero-shot/few-shot classification prompt.
  std::string classification_examples;
};

struct ItemFailure {
  std::string item_id;
  std::string stage;
  std::string message;
};

struct DatasetResult {
  std::string name;
  LabelScheme source_scheme = LabelScheme::three_way;
  std::size_t item_count = 0;
  std::size_t evaluated = 0;
  ConfusionCounts counts;
  MetricsRow metrics;
  std::vector<RelabelEntry> mapping;
  std::vector<ItemFailure> failures;
};

struct BenchmarkReport {
  AblationConfig ablation;
  std::size_t m = 0;
  std::vector<DatasetResult> datasets;
};

/// Classifies `body` with the zero-shot prompt. Throws Error(format_error)
/// when the reply names no leaning.
Leaning classify_direct(gateway::Gateway& gateway, const std::string& body,
                        const std::string& examples);

/// Runs every dataset through the configured pipeline, relabels gold and
/// predicted labels to biased/non-biased and computes metrics. Item
/// failures are reported per dataset; a dataset whose failure rate exceeds
/// `max_failure_rate` aborts the run with Error(too_many_failures).
///
/// `store` is required when the database is used with clustering,
/// `unclustered_store` when it is used without.
BenchmarkReport run_benchmark(gateway::Gateway& gateway, std::span<const LabeledDataset> datasets,
                              const store::VectorStore* store,
                              const store::VectorStore* unclustered_store,
                              const BenchmarkOptions& options);

nlohmann::ordered_json to_json(const BenchmarkReport& report);

/// Aligned plain-text table: one column per dataset, rows Precision,
/// Recall, F1, Micro F1, Macro F1, values in percent.
std::string render_table(const BenchmarkReport& report);

}  // namespace biaslens::eval
