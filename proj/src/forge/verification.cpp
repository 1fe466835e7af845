#include "biaslens/forge/verification.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "biaslens/detail/parallel.hpp"

namespace biaslens::forge {

namespace {

template <typename T>
struct Outcome {
  std::optional<T> value;
  std::optional<ArticleFailure> failure;
  std::vector<std::string> warnings;
};

ArticleFailure failure_from(const std::string& id, std::string_view stage, const std::exception& e) {
  auto code = ErrorCode::transport_failure;
  if (const auto* err = dynamic_cast<const Error*>(&e)) code = err->code();
  return {id, std::string(stage), code, e.what()};
}

bool by_id(const IndicatorRecord& a, const IndicatorRecord& b) { return a.id < b.id; }

}  // namespace

GenerationResult generate_indicators(gateway::Gateway& gateway,
                                     std::span<const LabeledArticle> corpus,
                                     std::size_t parallelism) {
  if (corpus.empty()) throw Error(ErrorCode::invalid_argument, "corpus is empty");

  std::vector<Outcome<std::vector<IndicatorRecord>>> outcomes(corpus.size());
  detail::parallel_for(corpus.size(), parallelism, [&](std::size_t i) {
    const auto& article = corpus[i];
    auto& out = outcomes[i];
    try {
      auto response = gateway.complete_chat(
          gateway::PromptKind::indicator_generation,
          {{"DESC_EX", gateway.prompts().category_demonstrations()},
           {"TEXT_INPUT", article.body},
           {"GIVEN_LABEL", std::string(to_string(article.leaning))}});
      auto parsed = gateway::parse_tagged_lines(response);
      out.warnings = std::move(parsed.warnings);
      if (parsed.lines.empty()) {
        out.warnings.push_back(
            fmt::format("article {} yielded no parsable indicator lines", article.id));
      }
      std::vector<IndicatorRecord> records;
      for (std::size_t k = 0; k < parsed.lines.size(); ++k) {
        auto& line = parsed.lines[k];
        records.push_back({fmt::format("{}#{:03}", article.id, k + 1), line.category,
                           std::move(line.text), line.leaning, std::nullopt, article.id,
                           Stage::raw});
      }
      out.value = std::move(records);
    } catch (const std::exception& e) {
      out.failure = failure_from(article.id, "generation", e);
    }
  });

  GenerationResult result;
  for (auto& o : outcomes) {
    if (o.value) {
      for (auto& r : *o.value) result.records.push_back(std::move(r));
    }
    if (o.failure) result.failures.push_back(std::move(*o.failure));
    for (auto& w : o.warnings) {
      spdlog::warn("{}", w);
      result.warnings.push_back(std::move(w));
    }
  }
  std::sort(result.records.begin(), result.records.end(), by_id);
  return result;
}

std::string normalize_indicator_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (std::ispunct(static_cast<unsigned char>(out.back())) || out.back() == ' ')) {
    out.pop_back();
  }
  return out;
}

std::vector<IndicatorRecord> eliminate_conflicts(std::span<const IndicatorRecord> records) {
  struct Group {
    std::vector<const IndicatorRecord*> members;
    bool conflicting = false;
  };
  std::map<std::string, Group> groups;
  for (const auto& r : records) {
    if (r.stage != Stage::raw) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("conflict elimination expects raw records, {} is {}", r.id,
                              to_string(r.stage)));
    }
    auto& g = groups[normalize_indicator_text(r.text)];
    if (!g.members.empty() && g.members.front()->leaning != r.leaning) g.conflicting = true;
    g.members.push_back(&r);
  }

  std::vector<IndicatorRecord> out;
  for (auto& [text, g] : groups) {
    if (g.conflicting) continue;
    out.push_back(**std::min_element(g.members.begin(), g.members.end(),
                                     [](auto* a, auto* b) { return a->id < b->id; }));
  }
  std::sort(out.begin(), out.end(), by_id);
  return out;
}

ScoringResult score_and_filter(gateway::Gateway& gateway, std::span<const IndicatorRecord> records,
                               int threshold, std::size_t parallelism) {
  if (threshold < 1 || threshold > 10) {
    throw Error(ErrorCode::invalid_argument,
                fmt::format("confidence threshold {} outside [1, 10]", threshold));
  }

  std::vector<Outcome<IndicatorRecord>> outcomes(records.size());
  detail::parallel_for(records.size(), parallelism, [&](std::size_t i) {
    const auto& rec = records[i];
    auto& out = outcomes[i];
    try {
      auto response = gateway.complete_chat(
          gateway::PromptKind::confidence_scoring,
          {{"CATEGORY", std::string(display_name(rec.category))},
           {"INDICATOR", rec.text},
           {"GIVEN_LABEL", std::string(to_string(rec.leaning))}});
      auto score = gateway::parse_confidence(response);
      if (!score) {
        out.warnings.push_back(
            fmt::format("indicator {} dropped: unparsable confidence response", rec.id));
        return;
      }
      if (*score < threshold) return;
      auto scored = rec;
      scored.confidence = *score;
      out.value = advance(std::move(scored), Stage::verified);
    } catch (const std::exception& e) {
      out.failure = failure_from(rec.id, "verification", e);
    }
  });

  ScoringResult result;
  for (auto& o : outcomes) {
    if (o.value) result.records.push_back(std::move(*o.value));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
    for (auto& w : o.warnings) {
      spdlog::warn("{}", w);
      result.warnings.push_back(std::move(w));
    }
  }
  std::sort(result.records.begin(), result.records.end(), by_id);
  return result;
}

}  // namespace biaslens::forge
