#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace biaslens::gateway {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Replay key for one request: hash of (kind tag, fully rendered request,
/// model id).
std::string request_digest(std::string_view kind, std::string_view rendered,
                           std::string_view model);

/// Recorded provider responses keyed by request digest.
///
/// On disk: one record per line, `<digest>\t<response as a JSON string
/// literal>`, UTF-8. Later lines win when a digest repeats.
class FixtureStore {
 public:
  FixtureStore() = default;

  /// Reads `path`. A missing file yields an empty store unless
  /// `must_exist`, in which case Error(io_error) is thrown.
  static FixtureStore load(const std::filesystem::path& path, bool must_exist);

  [[nodiscard]] const std::string* find(std::string_view digest) const;
  [[nodiscard]] std::size_t size() const { return entries_.size(); }

  void put(std::string digest, std::string response);

  /// Appends one record to `path` and flushes before returning.
  static void append(const std::filesystem::path& path, std::string_view digest,
                     std::string_view response);

  /// Rewrites `path` with every entry, sorted by digest.
  void save(const std::filesystem::path& path) const;

  static std::string encode_line(std::string_view digest, std::string_view response);

 private:
  std::unordered_map<std::string, std::string> entries_;
};

}  // namespace biaslens::gateway
