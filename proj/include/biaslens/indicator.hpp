#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "biaslens/common.hpp"

namespace biaslens {

/// Lifecycle of an indicator through the offline build. Transitions only
/// go forward: raw -> verified -> final.
enum class Stage : std::uint8_t { raw = 0, verified = 1, final = 2 };

std::string_view to_string(Stage stage);

struct IndicatorRecord {
  std::string id;
  Category category = Category::tone_and_language;
  std::string text;
  Leaning leaning = Leaning::neutral;
  std::optional<int> confidence;  // 1..10, required once verified
  std::string source_article_id;
  Stage stage = Stage::raw;

  friend bool operator==(const IndicatorRecord&, const IndicatorRecord&) = default;
};

/// Returns a copy advanced to `next`. Throws invalid_argument on a backward
/// or skipped transition, or when a verified/final record lacks a
/// confidence in [1, 10].
IndicatorRecord advance(IndicatorRecord record, Stage next);

}  // namespace biaslens
