#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "biaslens/engine/types.hpp"

namespace biaslens::eval {

enum class LabelScheme { three_way, tone, binary };

std::string_view to_string(LabelScheme scheme);

/// Per-dataset field names for one-record-per-line JSON files.
struct FieldMap {
  std::string id_field = "id";
  std::vector<std::string> body_fields = {"body", "text", "sentence", "article"};
  std::string label_field = "label";
  /// Raw label value -> canonical label string, applied before parsing
  /// (e.g. {"0": "non-biased", "1": "biased"}).
  std::map<std::string, std::string> label_aliases;
};

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct LabeledDataset {
  std::string name;
  std::vector<engine::Article> items;
  LabelScheme scheme = LabelScheme::three_way;
  std::vector<LineError> errors;  // lines skipped during loading
};

/// Parses one JSON line into an article. `fallback_id` is used when the
/// record has no id. When `require_label` is false a missing label is
/// accepted; a present but unknown label is always an error.
std::variant<engine::Article, LineError> parse_article_line(std::string_view line,
                                                             std::size_t line_no,
                                                             const std::string& fallback_id,
                                                             const FieldMap& fields,
                                                             bool require_label);

/// Loads a labeled dataset. Blank lines are ignored. Lines that fail to
/// parse are collected; if they exceed `max_error_rate` of the non-blank
/// lines the dataset is rejected with Error(schema_violation).
LabeledDataset load_dataset(const std::filesystem::path& path, const std::string& name,
                            const FieldMap& fields = {}, double max_error_rate = 0.01);

LabelScheme infer_scheme(const std::vector<engine::Article>& items);

/// left/right/pro/anti/biased -> biased; neutral/non-biased -> non-biased.
engine::GoldLabel to_binary(engine::GoldLabel label);

/// Engine predictions use the same mapping: left/right -> biased,
/// neutral -> non-biased.
engine::GoldLabel binary_prediction(Leaning predicted);

struct RelabelEntry {
  engine::GoldLabel from;
  engine::GoldLabel to;
  std::size_t count = 0;
};

struct RelabeledDataset {
  LabeledDataset dataset;               // scheme binary
  std::vector<RelabelEntry> mapping;    // audit table, ordered by source label
};

/// Total over all gold labels; idempotent on binary datasets. Throws
/// Error(schema_violation) if an item has no gold label.
RelabeledDataset relabel_binary(const LabeledDataset& dataset);

}  // namespace biaslens::eval
