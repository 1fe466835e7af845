#include "biaslens/service/report_repository.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "biaslens/engine/report.hpp"

namespace biaslens::service {

namespace fs = std::filesystem;

namespace {

std::optional<ReportStatus> parse_status(std::string_view s) {
  if (s == "pending") return ReportStatus::pending;
  if (s == "complete") return ReportStatus::complete;
  if (s == "failed") return ReportStatus::failed;
  return std::nullopt;
}

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string_view to_string(ReportStatus status) {
  switch (status) {
    case ReportStatus::pending: return "pending";
    case ReportStatus::complete: return "complete";
    case ReportStatus::failed: return "failed";
  }
  return "pending";
}

void write_atomically(const fs::path& path, const std::string& bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, fmt::format("short write to {}", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::io_error, fmt::format("cannot replace {}: {}", path.string(), ec.message()));
}

ReportRepository::ReportRepository(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_ / "reports", ec);
  if (ec) throw Error(ErrorCode::io_error, fmt::format("cannot create {}: {}", dir_.string(), ec.message()));

  auto text = read_file(dir_ / "index.json");
  if (!text) return;
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(*text);
    next_sequence_ = index.at("next_sequence").get<std::uint64_t>();
    for (const auto& e : index.at("entries")) {
      ReportEntry entry;
      entry.id = e.at("id").get<std::string>();
      auto status = parse_status(e.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::format_error, "unknown status in index");
      entry.status = *status;
      if (auto it = e.find("error"); it != e.end() && it->is_string()) entry.error = it->get<std::string>();
      entries_.emplace(entry.id, std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, fmt::format("corrupt report index: {}", e.what()));
  }

  std::size_t interrupted = 0;
  for (auto& [id, entry] : entries_) {
    if (entry.status == ReportStatus::pending) {
      entry.status = ReportStatus::failed;
      entry.error = "interrupted by service shutdown";
      ++interrupted;
    }
  }
  if (interrupted > 0) {
    spdlog::warn("{} pending report(s) from a previous run marked failed", interrupted);
    write_index();
  }
}

fs::path ReportRepository::report_path(const std::string& id) const {
  return dir_ / "reports" / (id + ".json");
}

void ReportRepository::write_index() const {
  nlohmann::ordered_json index;
  index["next_sequence"] = next_sequence_;
  auto& list = index["entries"] = nlohmann::ordered_json::array();
  for (const auto& [id, entry] : entries_) {
    nlohmann::ordered_json e{{"id", id}, {"file", "reports/" + id + ".json"}, {"status", to_string(entry.status)}};
    if (entry.error) e["error"] = *entry.error;
    list.push_back(std::move(e));
  }
  write_atomically(dir_ / "index.json", index.dump(2) + "\n");
}

std::string ReportRepository::reserve() {
  std::lock_guard lock(mutex_);
  auto id = fmt::format("r{:06}", next_sequence_++);
  entries_.emplace(id, ReportEntry{id, ReportStatus::pending, std::nullopt});
  write_index();
  return id;
}

void ReportRepository::complete(const std::string& id, engine::AnalysisReport report) {
  report.id = id;
  auto bytes = engine::serialize_report(report);
  std::lock_guard lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::invalid_argument, fmt::format("unknown report {}", id));
  write_atomically(report_path(id), bytes);
  it->second.status = ReportStatus::complete;
  it->second.error.reset();
  write_index();
}

void ReportRepository::fail(const std::string& id, std::string error) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) throw Error(ErrorCode::invalid_argument, fmt::format("unknown report {}", id));
  it->second.status = ReportStatus::failed;
  it->second.error = std::move(error);
  write_index();
}

void ReportRepository::update(const engine::AnalysisReport& report) {
  auto bytes = engine::serialize_report(report);
  std::lock_guard lock(mutex_);
  auto it = entries_.find(report.id);
  if (it == entries_.end() || it->second.status != ReportStatus::complete) {
    throw Error(ErrorCode::invalid_argument, fmt::format("report {} is not complete", report.id));
  }
  write_atomically(report_path(report.id), bytes);
}

std::optional<ReportEntry> ReportRepository::entry(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ReportRepository::raw(const std::string& id) const {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end() || it->second.status != ReportStatus::complete) return std::nullopt;
  }
  auto text = read_file(report_path(id));
  if (!text) throw Error(ErrorCode::io_error, fmt::format("report file for {} is missing", id));
  return text;
}

std::optional<engine::AnalysisReport> ReportRepository::load(const std::string& id) const {
  auto text = raw(id);
  if (!text) return std::nullopt;
  try {
    return engine::report_from_json(nlohmann::json::parse(*text));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, fmt::format("report {} is corrupt: {}", id, e.what()));
  }
}

std::size_t ReportRepository::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace biaslens::service
