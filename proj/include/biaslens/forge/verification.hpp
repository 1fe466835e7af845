#pragma once

#include <span>
#include <string>
#include <vector>

#include "biaslens/gateway/gateway.hpp"
#include "biaslens/indicator.hpp"

namespace biaslens::forge {

struct LabeledArticle {
  std::string id;
  std::string body;
  Leaning leaning = Leaning::neutral;
};

struct ArticleFailure {
  std::string article_id;
  std::string stage;
  ErrorCode code = ErrorCode::transport_failure;
  std::string message;
};

struct GenerationResult {
  std::vector<IndicatorRecord> records;  // stage raw, ordered by id
  std::vector<ArticleFailure> failures;
  std::vector<std::string> warnings;
};

/// One indicator-generation call per article (GIVEN_LABEL is the article's
/// leaning). Record ids are `<article-id>#<nnn>`. Gateway errors are
/// collected per article; an article yielding no parsable line only warns.
/// Throws Error(invalid_argument) for an empty corpus.
GenerationResult generate_indicators(gateway::Gateway& gateway,
                                     std::span<const LabeledArticle> corpus,
                                     std::size_t parallelism = 1);

/// Case-folded, whitespace-collapsed text without terminal punctuation.
std::string normalize_indicator_text(std::string_view text);

/// Drops every record whose normalized text appears with more than one
/// leaning; collapses same-leaning duplicates onto the lowest id. Output is
/// ordered by id. Idempotent.
std::vector<IndicatorRecord> eliminate_conflicts(std::span<const IndicatorRecord> records);

struct ScoringResult {
  std::vector<IndicatorRecord> records;  // stage verified, ordered by id
  std::vector<ArticleFailure> failures;  // keyed by indicator id
  std::vector<std::string> warnings;
};

/// Backward verification: one confidence-scoring call per record; keeps
/// records scoring >= threshold. Unparsable scores drop the record with a
/// warning.
ScoringResult score_and_filter(gateway::Gateway& gateway, std::span<const IndicatorRecord> records,
                               int threshold, std::size_t parallelism = 1);

}  // namespace biaslens::forge
