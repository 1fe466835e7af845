#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "biaslens/engine/types.hpp"

namespace biaslens::service {

enum class ReportStatus { pending, complete, failed };

std::string_view to_string(ReportStatus status);

struct ReportEntry {
  std::string id;
  ReportStatus status = ReportStatus::pending;
  std::optional<std::string> error;
};

/// One JSON file per report under `<dir>/reports`, plus `<dir>/index.json`
/// holding statuses and the id sequence. Every write goes to a temporary
/// file first and is renamed into place.
///
/// Entries still pending when the repository is opened were interrupted by
/// a shutdown and are marked failed.
class ReportRepository {
 public:
  explicit ReportRepository(std::filesystem::path dir);

  /// New pending entry with a fresh id ("r000001", ...).
  std::string reserve();

  /// Writes the report (its id is set to `id`) and marks the entry complete.
  void complete(const std::string& id, engine::AnalysisReport report);

  void fail(const std::string& id, std::string error);

  /// Rewrites an already complete report, e.g. after a note was appended.
  void update(const engine::AnalysisReport& report);

  [[nodiscard]] std::optional<ReportEntry> entry(const std::string& id) const;

  /// Stored bytes of a complete report.
  [[nodiscard]] std::optional<std::string> raw(const std::string& id) const;
  [[nodiscard]] std::optional<engine::AnalysisReport> load(const std::string& id) const;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] const std::filesystem::path& directory() const { return dir_; }

 private:
  [[nodiscard]] std::filesystem::path report_path(const std::string& id) const;
  void write_index() const;  // caller holds mutex_

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::uint64_t next_sequence_ = 1;
  std::map<std::string, ReportEntry> entries_;
};

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
void write_atomically(const std::filesystem::path& path, const std::string& bytes);

}  // namespace biaslens::service
