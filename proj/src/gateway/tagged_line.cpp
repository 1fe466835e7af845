#include "biaslens/gateway/tagged_line.hpp"

#include <cctype>
#include <regex>

#include <fmt/format.h>

namespace biaslens::gateway {

namespace {

constexpr std::string_view kSeparator = " - ";

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

std::string strip_prefix(const std::string& line) {
  static const std::regex kPrefix(R"(^\s*(\(?\d{1,3}[.):]\s*|[-*+]\s+|•\s*))");
  return std::regex_replace(line, kPrefix, "", std::regex_constants::format_first_only);
}

std::string strip_quotes(std::string s) {
  s = text::trim(s);
  while (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = text::trim(std::string_view(s).substr(1, s.size() - 2));
  }
  return s;
}

std::optional<TaggedLine> parse_line(std::string line) {
  replace_all(line, "**", "");
  replace_all(line, " \u2013 ", " - ");  // en dash
  replace_all(line, " \u2014 ", " - ");  // em dash
  line = text::trim(strip_prefix(line));

  auto first = line.find(kSeparator);
  auto last = line.rfind(kSeparator);
  if (first == std::string::npos || first == last) return std::nullopt;

  auto category = match_category(std::string_view(line).substr(0, first));
  auto leaning = parse_leaning(std::string_view(line).substr(last + kSeparator.size()));
  auto body = strip_quotes(line.substr(first + kSeparator.size(), last - first - kSeparator.size()));
  if (!category || !leaning || body.empty()) return std::nullopt;

  TaggedLine out{*category, std::move(body), *leaning, false};
  out.overlong = text::word_count(out.text) > kMaxIndicatorWords;
  return out;
}

}  // namespace

TaggedLineParse parse_tagged_lines(std::string_view response) noexcept {
  TaggedLineParse result;
  try {
    for (auto& raw : text::split_lines(response)) {
      if (text::is_blank(raw)) continue;
      auto parsed = parse_line(raw);
      if (!parsed) {
        ++result.skipped;
        continue;
      }
      if (parsed->overlong) {
        result.warnings.push_back(fmt::format("indicator exceeds {} words ({}): {}",
                                              kMaxIndicatorWords,
                                              text::word_count(parsed->text), parsed->text));
      }
      result.lines.push_back(std::move(*parsed));
    }
  } catch (const std::exception& e) {
    // Only allocation or regex failures land here; report rather than throw.
    result.warnings.push_back(fmt::format("parser aborted: {}", e.what()));
  }
  return result;
}

std::optional<int> parse_confidence(std::string_view response) noexcept {
  std::size_t i = 0;
  while (i < response.size()) {
    if (!std::isdigit(static_cast<unsigned char>(response[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    long value = 0;
    while (j < response.size() && std::isdigit(static_cast<unsigned char>(response[j]))) {
      if (value < 1000) value = value * 10 + (response[j] - '0');
      ++j;
    }
    if (value >= 1 && value <= 10) return static_cast<int>(value);
    i = j;
  }
  return std::nullopt;
}

}  // namespace biaslens::gateway
