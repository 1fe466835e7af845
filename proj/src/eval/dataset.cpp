#include "biaslens/eval/dataset.hpp"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace biaslens::eval {

using engine::GoldLabel;

std::string_view to_string(LabelScheme scheme) {
  switch (scheme) {
    case LabelScheme::three_way: return "three-way";
    case LabelScheme::tone: return "tone";
    case LabelScheme::binary: return "binary";
  }
  return "three-way";
}

std::variant<engine::Article, LineError> parse_article_line(std::string_view line,
                                                             std::size_t line_no,
                                                             const std::string& fallback_id,
                                                             const FieldMap& fields,
                                                             bool require_label) {
  auto error = [&](std::string message) { return LineError{line_no, std::move(message)}; };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    return error("not valid JSON");
  }
  if (!j.is_object()) return error("record is not a JSON object");

  engine::Article article;
  if (auto it = j.find(fields.id_field); it != j.end() && !it->is_null()) {
    article.id = it->is_string() ? it->get<std::string>() : it->dump();
  }
  if (article.id.empty()) article.id = fallback_id;

  for (const auto& field : fields.body_fields) {
    if (auto it = j.find(field); it != j.end() && it->is_string()) {
      article.body = it->get<std::string>();
      break;
    }
  }
  if (text::is_blank(article.body)) return error("missing or empty body");

  auto it = j.find(fields.label_field);
  if (it == j.end() || it->is_null()) {
    if (require_label) return error(fmt::format("missing label field '{}'", fields.label_field));
    return article;
  }
  auto raw = it->is_string() ? it->get<std::string>() : it->dump();
  if (auto alias = fields.label_aliases.find(raw); alias != fields.label_aliases.end()) {
    raw = alias->second;
  }
  auto label = engine::parse_gold_label(raw);
  if (!label) return error(fmt::format("unknown label '{}'", raw));
  article.gold = *label;
  return article;
}

LabelScheme infer_scheme(const std::vector<engine::Article>& items) {
  bool all_binary = !items.empty();
  bool any_tone = false;
  for (const auto& item : items) {
    if (!item.gold) continue;
    auto g = *item.gold;
    if (g != GoldLabel::biased && g != GoldLabel::non_biased) all_binary = false;
    if (g == GoldLabel::pro || g == GoldLabel::anti) any_tone = true;
  }
  if (all_binary) return LabelScheme::binary;
  return any_tone ? LabelScheme::tone : LabelScheme::three_way;
}

LabeledDataset load_dataset(const std::filesystem::path& path, const std::string& name,
                            const FieldMap& fields, double max_error_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("dataset file {} not found", path.string()));

  LabeledDataset dataset;
  dataset.name = name;
  std::string line;
  std::size_t line_no = 0;
  std::size_t non_blank = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    ++non_blank;
    auto parsed = parse_article_line(line, line_no, fmt::format("{}:{}", name, line_no), fields, true);
    if (auto* article = std::get_if<engine::Article>(&parsed)) {
      dataset.items.push_back(std::move(*article));
    } else {
      dataset.errors.push_back(std::get<LineError>(parsed));
    }
  }

  if (non_blank == 0) {
    throw Error(ErrorCode::schema_violation, fmt::format("dataset {} is empty", name));
  }
  auto rate = static_cast<double>(dataset.errors.size()) / static_cast<double>(non_blank);
  if (rate > max_error_rate) {
    std::string detail;
    for (std::size_t i = 0; i < std::min<std::size_t>(dataset.errors.size(), 5); ++i) {
      detail += fmt::format("\n  line {}: {}", dataset.errors[i].line, dataset.errors[i].message);
    }
    throw Error(ErrorCode::schema_violation,
                fmt::format("dataset {}: {} of {} lines unreadable ({:.1f}% > {:.1f}%){}", name,
                            dataset.errors.size(), non_blank, rate * 100.0, max_error_rate * 100.0,
                            detail));
  }
  if (!dataset.errors.empty()) {
    spdlog::warn("dataset {}: skipped {} unreadable line(s), first at line {}", name,
                 dataset.errors.size(), dataset.errors.front().line);
  }
  dataset.scheme = infer_scheme(dataset.items);
  return dataset;
}

GoldLabel to_binary(GoldLabel label) {
  switch (label) {
    case GoldLabel::left:
    case GoldLabel::right:
    case GoldLabel::pro:
    case GoldLabel::anti:
    case GoldLabel::biased:
      return GoldLabel::biased;
    case GoldLabel::neutral:
    case GoldLabel::non_biased:
      return GoldLabel::non_biased;
  }
  return GoldLabel::non_biased;
}

GoldLabel binary_prediction(Leaning predicted) {
  return predicted == Leaning::neutral ? GoldLabel::non_biased : GoldLabel::biased;
}

RelabeledDataset relabel_binary(const LabeledDataset& dataset) {
  RelabeledDataset out;
  out.dataset = dataset;
  out.dataset.scheme = LabelScheme::binary;
  std::map<GoldLabel, std::size_t> counts;
  for (auto& item : out.dataset.items) {
    if (!item.gold) {
      throw Error(ErrorCode::schema_violation,
                  fmt::format("item {} of {} has no gold label", item.id, dataset.name));
    }
    ++counts[*item.gold];
    item.gold = to_binary(*item.gold);
  }
  for (const auto& [from, count] : counts) out.mapping.push_back({from, to_binary(from), count});
  return out;
}

}  // namespace biaslens::eval
