#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "biaslens/common.hpp"
#include "biaslens/store/vector_store.hpp"

namespace biaslens::engine {

/// Gold labels as they appear across datasets: three-way political
/// leanings, MFC-style tones, or already-binary labels.
enum class GoldLabel { left, neutral, right, pro, anti, biased, non_biased };

std::string_view to_string(GoldLabel label);
/// left/right/neutral/center/centre/pro/anti/biased/non-biased (and common
/// spellings), case-insensitive.
std::optional<GoldLabel> parse_gold_label(std::string_view text);

struct Article {
  std::string id;
  std::string body;
  std::optional<GoldLabel> gold;
};

struct Descriptor {
  std::string id;
  Category category = Category::tone_and_language;
  std::string text;
  Leaning leaning_as_generated = Leaning::neutral;  // displayed only, never votes
  Embedding embedding;
};

struct DescriptorMatchSet {
  std::string descriptor_id;
  std::vector<store::MatchResult> matches;  // similarity descending
  std::array<double, 3> distribution{};     // (left, neutral, right) match fractions
};

struct BiasPrediction {
  Leaning label = Leaning::neutral;
  std::array<std::size_t, 3> votes{};
  std::array<double, 3> similarity_mass{};
  bool tie_broken = false;

  friend bool operator==(const BiasPrediction&, const BiasPrediction&) = default;
};

/// Half-open range [start, end) in Unicode code points of the article body.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct SpanMapping {
  std::string descriptor_id;
  std::vector<Span> spans;  // sorted, pairwise disjoint
  std::vector<std::string> unmatched_phrases;
};

struct Note {
  std::string timestamp;
  std::string author;
  std::string text;
};

struct AnalysisReport {
  std::string id;  // "<article id>@<created_at>"
  std::string created_at;
  Article article;
  std::vector<Descriptor> descriptors;
  std::vector<DescriptorMatchSet> match_sets;
  BiasPrediction prediction;
  std::vector<SpanMapping> mappings;
  std::vector<Note> notes;
  bool no_descriptors = false;
  std::vector<std::string> warnings;
};

}  // namespace biaslens::engine
