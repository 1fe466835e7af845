#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "biaslens/indicator.hpp"

namespace biaslens::store {

inline constexpr std::uint32_t kFormatVersion = 1;

struct StoreHeader {
  std::uint32_t format_version = kFormatVersion;
  std::uint32_t dimension = 0;
  std::uint64_t entry_count = 0;
  std::string embedding_model;
  std::string build_params_digest;

  friend bool operator==(const StoreHeader&, const StoreHeader&) = default;
};

struct IndicatorEntry {
  IndicatorRecord record;
  Embedding embedding;

  friend bool operator==(const IndicatorEntry&, const IndicatorEntry&) = default;
};

/// One retrieved indicator. `similarity` is cosine similarity (higher means
/// closer), not a distance.
struct MatchResult {
  std::string indicator_id;
  double similarity = 0.0;
  Leaning leaning = Leaning::neutral;
  Category category = Category::tone_and_language;
  std::string text;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// dot(a, b) / (|a| |b|), accumulated in double. Throws
/// Error(dimension_mismatch) or Error(zero_norm).
double cosine_similarity(std::span<const float> a, std::span<const float> b);

/// Exact, linear-scan vector database of final indicators. Immutable once
/// built or loaded, so concurrent queries need no locking.
///
/// File layout (all integers little-endian):
///   magic "BLVS" | u32 version | u32 dimension | u64 entry count |
///   str embedding model | str build-params digest |
///   entry* | u32 CRC-32 of every preceding byte
/// where str = u32 byte length + UTF-8 bytes and each entry is
///   str id | u8 category | str text | u8 leaning | u8 confidence (0 = none) |
///   str source article id | u8 stage | dimension x f32 embedding
class VectorStore {
 public:
  VectorStore(std::uint32_t dimension, std::string embedding_model,
              std::string build_params_digest);

  /// Throws on dimension mismatch, zero-norm embedding or duplicate id.
  void add(IndicatorRecord record, Embedding embedding);

  /// min(m, size()) entries, similarity descending, ties by lowest id.
  [[nodiscard]] std::vector<MatchResult> top_m_query(std::span<const float> query,
                                                     std::size_t m) const;

  [[nodiscard]] const StoreHeader& header() const { return header_; }
  [[nodiscard]] const std::vector<IndicatorEntry>& entries() const { return entries_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] bool empty() const { return entries_.empty(); }
  [[nodiscard]] std::array<std::size_t, 3> leaning_counts() const;

  [[nodiscard]] std::vector<std::uint8_t> serialize() const;
  static VectorStore deserialize(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static VectorStore load(const std::filesystem::path& path);

  friend bool operator==(const VectorStore& a, const VectorStore& b) {
    return a.header_ == b.header_ && a.entries_ == b.entries_;
  }

 private:
  StoreHeader header_;
  std::vector<IndicatorEntry> entries_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace biaslens::store
