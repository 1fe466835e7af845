#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens {

enum class ErrorCode {
  invalid_argument,
  missing_slot,
  transport_failure,
  replay_miss,
  empty_input,
  dimension_mismatch,
  zero_norm,
  io_error,
  format_error,
  version_mismatch,
  checksum_mismatch,
  empty_store,
  no_matches,
  schema_violation,
  too_many_failures,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries a machine-readable code so
/// that the CLI and the HTTP layer can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Political leaning. The enumerator order is the order used for every
/// per-leaning array in the project: (left, neutral, right).
enum class Leaning : std::uint8_t { left = 0, neutral = 1, right = 2 };

inline constexpr std::array<Leaning, 3> kAllLeanings = {Leaning::left, Leaning::neutral,
                                                        Leaning::right};

constexpr std::size_t index_of(Leaning l) { return static_cast<std::size_t>(l); }

std::string_view to_string(Leaning leaning);

/// Accepts left/right/neutral/center/centre (any case, surrounding
/// punctuation ignored, "-leaning" suffixes allowed). center maps to neutral.
std::optional<Leaning> parse_leaning(std::string_view text);

enum class Category : std::uint8_t {
  tone_and_language = 0,
  sources_and_citations = 1,
  coverage_and_balance = 2,
  agenda_and_framing = 3,
  examples_and_analogies = 4,
};

inline constexpr std::array<Category, 5> kAllCategories = {
    Category::tone_and_language, Category::sources_and_citations,
    Category::coverage_and_balance, Category::agenda_and_framing,
    Category::examples_and_analogies};

/// Human-readable name, e.g. "Tone and Language". Also the wire format.
std::string_view display_name(Category category);

/// Case-insensitive fuzzy match onto the five categories ("Framing" ->
/// agenda_and_framing). Returns nullopt when nothing plausible matches.
std::optional<Category> match_category(std::string_view text);

using Embedding = std::vector<float>;

using Clock = std::function<std::chrono::system_clock::time_point()>;

Clock system_clock();

/// ISO-8601 UTC with millisecond precision, e.g. 2024-05-01T12:00:00.000Z.
std::string format_timestamp(std::chrono::system_clock::time_point tp);

namespace text {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::size_t word_count(std::string_view s);
bool is_blank(std::string_view s);
/// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(std::string_view s);
bool is_valid_utf8(std::string_view s);
/// Number of code points in a valid UTF-8 string.
std::size_t utf8_length(std::string_view s);

}  // namespace text

}  // namespace biaslens
