#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biaslens/common.hpp"

namespace biaslens::gateway {

inline constexpr std::size_t kMaxIndicatorWords = 30;

/// One `category - text - leaning` line of model output.
struct TaggedLine {
  Category category = Category::tone_and_language;
  std::string text;
  Leaning leaning = Leaning::neutral;
  bool overlong = false;  // more than kMaxIndicatorWords words; kept, warned

  friend bool operator==(const TaggedLine&, const TaggedLine&) = default;
};

struct TaggedLineParse {
  std::vector<TaggedLine> lines;
  std::size_t skipped = 0;  // non-blank lines that did not parse
  std::vector<std::string> warnings;
};

/// Never throws. parsed + skipped equals the number of non-blank lines.
///
/// Each line is split on " - ": the category is everything before the first
/// separator, the leaning everything after the last one, and the text is
/// what lies between (so the text may itself contain dashes). Numbering and
/// bullet prefixes, markdown emphasis and surrounding quotes are ignored.
TaggedLineParse parse_tagged_lines(std::string_view response) noexcept;

/// First integer in [1, 10] appearing in a confidence-scoring response.
std::optional<int> parse_confidence(std::string_view response) noexcept;

}  // namespace biaslens::gateway
