#include "biaslens/common.hpp"

#include <algorithm>
#include <cctype>
#include <ctime>

#include <fmt/format.h>

namespace biaslens {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::missing_slot: return "missing_slot";
    case ErrorCode::transport_failure: return "transport_failure";
    case ErrorCode::replay_miss: return "replay_miss";
    case ErrorCode::empty_input: return "empty_input";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::zero_norm: return "zero_norm";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::format_error: return "format_error";
    case ErrorCode::version_mismatch: return "version_mismatch";
    case ErrorCode::checksum_mismatch: return "checksum_mismatch";
    case ErrorCode::empty_store: return "empty_store";
    case ErrorCode::no_matches: return "no_matches";
    case ErrorCode::schema_violation: return "schema_violation";
    case ErrorCode::too_many_failures: return "too_many_failures";
  }
  return "unknown";
}

std::string_view to_string(Leaning leaning) {
  switch (leaning) {
    case Leaning::left: return "left";
    case Leaning::neutral: return "neutral";
    case Leaning::right: return "right";
  }
  return "neutral";
}

namespace {

std::vector<std::string> letter_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : s) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

std::optional<Leaning> parse_leaning(std::string_view raw) {
  // "Political leaning: Left" -> "Left"
  if (auto colon = raw.rfind(':'); colon != std::string_view::npos) raw = raw.substr(colon + 1);
  std::vector<std::string> kept;
  for (auto& token : letter_tokens(raw)) {
    if (token == "leaning" || token == "lean" || token == "leans" || token == "political" ||
        token == "politically" || token == "wing") {
      continue;
    }
    kept.push_back(std::move(token));
  }
  if (kept.size() != 1) return std::nullopt;
  const auto& t = kept.front();
  if (t == "left") return Leaning::left;
  if (t == "right") return Leaning::right;
  if (t == "neutral" || t == "center" || t == "centre" || t == "centrist") return Leaning::neutral;
  return std::nullopt;
}

std::string_view display_name(Category category) {
  switch (category) {
    case Category::tone_and_language: return "Tone and Language";
    case Category::sources_and_citations: return "Sources and Citations";
    case Category::coverage_and_balance: return "Coverage and Balance";
    case Category::agenda_and_framing: return "Agenda and Framing";
    case Category::examples_and_analogies: return "Examples and Analogies";
  }
  return "Tone and Language";
}

std::optional<Category> match_category(std::string_view raw) {
  auto tokens = letter_tokens(raw);
  if (tokens.empty() || tokens.size() > 6) return std::nullopt;

  struct Keyword {
    std::string_view stem;
    Category category;
  };
  static constexpr Keyword kKeywords[] = {
      {"tone", Category::tone_and_language},
      {"language", Category::tone_and_language},
      {"wording", Category::tone_and_language},
      {"source", Category::sources_and_citations},
      {"citation", Category::sources_and_citations},
      {"coverage", Category::coverage_and_balance},
      {"balance", Category::coverage_and_balance},
      {"agenda", Category::agenda_and_framing},
      {"fram", Category::agenda_and_framing},
      {"example", Category::examples_and_analogies},
      {"analog", Category::examples_and_analogies},
  };

  std::array<int, 5> score{};
  for (const auto& token : tokens) {
    for (const auto& kw : kKeywords) {
      if (token.starts_with(kw.stem)) ++score[static_cast<std::size_t>(kw.category)];
    }
  }
  auto best = std::max_element(score.begin(), score.end());
  if (*best == 0 || std::count(score.begin(), score.end(), *best) > 1) return std::nullopt;
  return static_cast<Category>(best - score.begin());
}

Clock system_clock() {
  return [] { return std::chrono::system_clock::now(); };
}

std::string format_timestamp(std::chrono::system_clock::time_point tp) {
  using namespace std::chrono;
  auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  auto secs = static_cast<std::time_t>(ms / 1000);
  auto millis = ms % 1000;
  if (millis < 0) {
    millis += 1000;
    secs -= 1;
  }
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900,
                     tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, millis);
}

namespace text {

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t word_count(std::string_view s) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string_view::npos) end = s.size();
    auto line = s.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
    i += extra + 1;
  }
  return true;
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

}  // namespace text

}  // namespace biaslens
