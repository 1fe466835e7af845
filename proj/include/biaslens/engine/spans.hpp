#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaslens/engine/types.hpp"

namespace biaslens::engine {

/// Contents of every `[ ... ]` group in a mapping response, trimmed, with
/// surrounding quotes removed; empty groups are dropped.
std::vector<std::string> parse_bracketed_phrases(std::string_view response);

/// Sorts spans, drops empty ones and merges any that overlap or touch.
std::vector<Span> merge_spans(std::vector<Span> spans);

/// Locates each phrase in `body` by case-insensitive, whitespace-normalized
/// substring search (first occurrence). Found phrases become code-point
/// spans; the rest are reported as unmatched.
SpanMapping locate_phrases(std::string descriptor_id, std::span<const std::string> phrases,
                           std::string_view body);

}  // namespace biaslens::engine
