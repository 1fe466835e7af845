#include "biaslens/engine/spans.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace biaslens::engine {

namespace {

struct Normalized {
  std::string text;
  std::vector<std::size_t> origin;  // byte offset in the source for each byte of text
};

Normalized normalize(std::string_view s) {
  Normalized n;
  n.text.reserve(s.size());
  n.origin.reserve(s.size());
  bool in_space = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      if (!in_space) {
        n.text.push_back(' ');
        n.origin.push_back(i);
      }
      in_space = true;
      continue;
    }
    in_space = false;
    n.text.push_back(static_cast<char>(std::tolower(c)));
    n.origin.push_back(i);
  }
  return n;
}

std::string strip_quotes(std::string s) {
  s = text::trim(s);
  auto is_quote = [](char c) { return c == '"' || c == '\'' || c == '`'; };
  while (s.size() >= 2 && is_quote(s.front()) && s.back() == s.front()) {
    s = text::trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

std::string strip_edge_punctuation(std::string_view s) {
  auto is_edge = [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) || std::isspace(static_cast<unsigned char>(c));
  };
  while (!s.empty() && is_edge(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_edge(s.back())) s.remove_suffix(1);
  return std::string(s);
}

/// Byte range of `phrase` in the source of `body`.
std::optional<std::pair<std::size_t, std::size_t>> find(const Normalized& body,
                                                        std::string_view phrase) {
  auto needle = text::trim(normalize(phrase).text);
  if (needle.empty()) return std::nullopt;
  auto pos = body.text.find(needle);
  if (pos == std::string::npos) return std::nullopt;
  return std::pair{body.origin[pos], body.origin[pos + needle.size() - 1] + 1};
}

}  // namespace

std::vector<std::string> parse_bracketed_phrases(std::string_view response) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = response.find('[', pos)) != std::string_view::npos) {
    auto close = response.find(']', pos + 1);
    if (close == std::string_view::npos) break;
    auto inner = response.substr(pos + 1, close - pos - 1);
    // "[[x]]" or "[a [b] c]": restart from the innermost opening bracket
    if (auto nested = inner.rfind('['); nested != std::string_view::npos) {
      pos += nested + 1;
      continue;
    }
    auto phrase = strip_quotes(std::string(inner));
    if (!phrase.empty()) out.push_back(std::move(phrase));
    pos = close + 1;
  }
  return out;
}

std::vector<Span> merge_spans(std::vector<Span> spans) {
  std::sort(spans.begin(), spans.end(),
            [](const Span& a, const Span& b) { return a.start != b.start ? a.start < b.start : a.end < b.end; });
  std::vector<Span> merged;
  for (const auto& s : spans) {
    if (s.start >= s.end) continue;
    if (!merged.empty() && s.start <= merged.back().end) {
      merged.back().end = std::max(merged.back().end, s.end);
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

SpanMapping locate_phrases(std::string descriptor_id, std::span<const std::string> phrases,
                           std::string_view body) {
  SpanMapping mapping;
  mapping.descriptor_id = std::move(descriptor_id);
  auto normalized = normalize(body);
  auto code_points = [&](std::size_t byte_offset) {
    return text::utf8_length(body.substr(0, byte_offset));
  };

  std::vector<Span> spans;
  for (const auto& phrase : phrases) {
    auto hit = find(normalized, phrase);
    if (!hit) hit = find(normalized, strip_edge_punctuation(phrase));
    if (!hit) {
      mapping.unmatched_phrases.push_back(phrase);
      continue;
    }
    spans.push_back({code_points(hit->first), code_points(hit->second)});
  }
  mapping.spans = merge_spans(std::move(spans));
  return mapping;
}

}  // namespace biaslens::engine
