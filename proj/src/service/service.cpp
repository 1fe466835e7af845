#include "biaslens/service/service.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "biaslens/engine/report.hpp"
#include "biaslens/eval/dataset.hpp"

namespace biaslens::service {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kDownloadFormat = "biaslens-report/1";

ApiResponse error_response(int status, std::string_view code, std::string_view message,
                           std::optional<std::string_view> stage = std::nullopt) {
  ordered_json err{{"code", code}, {"message", message}};
  if (stage) err["stage"] = *stage;
  return {status, ordered_json{{"error", std::move(err)}}.dump(2)};
}

ApiResponse error_response(const Error& e, std::optional<std::string_view> stage = std::nullopt) {
  return error_response(http_status_for(e.code()), to_string(e.code()), e.what(), stage);
}

ApiResponse ok(const ordered_json& body, int status = 200) { return {status, body.dump(2)}; }

std::optional<json> parse_object(const std::string& request) {
  try {
    auto j = json::parse(request);
    if (j.is_object()) return j;
  } catch (const json::exception&) {
  }
  return std::nullopt;
}

std::string string_field(const json& j, std::string_view key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

/// Validates an article body; returns an error response on failure.
std::optional<ApiResponse> check_text(std::string_view field, const std::string& text, std::size_t limit) {
  if (text::is_blank(text)) {
    return error_response(400, "empty_input", fmt::format("field '{}' is empty", field));
  }
  if (text.size() > limit) {
    return error_response(400, "invalid_argument",
                          fmt::format("field '{}' exceeds {} bytes", field, limit));
  }
  if (!text::is_valid_utf8(text)) {
    return error_response(400, "invalid_argument", fmt::format("field '{}' is not valid UTF-8", field));
  }
  return std::nullopt;
}

ordered_json envelope(const ReportEntry& entry, const std::optional<std::string>& raw) {
  ordered_json j{{"report_id", entry.id}, {"status", to_string(entry.status)}};
  if (entry.error) j["error"] = *entry.error;
  if (raw) j["report"] = ordered_json::parse(*raw);
  return j;
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::empty_input:
    case ErrorCode::schema_violation:
    case ErrorCode::format_error:
    case ErrorCode::missing_slot:
      return 400;
    case ErrorCode::transport_failure:
    case ErrorCode::replay_miss:
      return 503;
    default:
      return 500;
  }
}

AnalysisService::AnalysisService(gateway::Gateway& gateway, const store::VectorStore& store,
                                 ServiceConfig config, engine::EngineOptions options, Clock clock)
    : gateway_(gateway),
      store_(store),
      config_(std::move(config)),
      engine_(gateway, store, options, clock),
      clock_(std::move(clock)),
      repository_(config_.data_dir) {
  auto n = std::max<std::size_t>(config_.workers, 1);
  for (std::size_t i = 0; i < n; ++i) {
    workers_.emplace_back([this](std::stop_token st) { worker_loop(st); });
  }
}

AnalysisService::~AnalysisService() {
  for (auto& w : workers_) w.request_stop();
  queue_cv_.notify_all();
  workers_.clear();
}

void AnalysisService::enqueue(std::function<void()> task) {
  {
    std::lock_guard lock(queue_mutex_);
    queue_.push_back(std::move(task));
  }
  queue_cv_.notify_one();
}

void AnalysisService::worker_loop(std::stop_token stop) {
  while (true) {
    std::function<void()> task;
    {
      std::unique_lock lock(queue_mutex_);
      if (!queue_cv_.wait(lock, stop, [&] { return !queue_.empty(); })) return;
      task = std::move(queue_.front());
      queue_.pop_front();
      ++running_;
    }
    task();
    {
      std::lock_guard lock(queue_mutex_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

void AnalysisService::wait_idle() {
  std::unique_lock lock(queue_mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && running_ == 0; });
}

std::mutex& AnalysisService::report_lock(const std::string& id) {
  std::lock_guard lock(locks_mutex_);
  auto& slot = report_locks_[id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void AnalysisService::run_analysis(const std::string& report_id, const engine::Article& article) {
  try {
    repository_.complete(report_id, engine_.analyze_article(article));
  } catch (const engine::AnalysisError& e) {
    repository_.fail(report_id, fmt::format("[{}] {}", e.stage(), e.what()));
  } catch (const std::exception& e) {
    repository_.fail(report_id, e.what());
  }
}

ApiResponse AnalysisService::analyze(const std::string& request) {
  auto j = parse_object(request);
  if (!j) return error_response(400, "invalid_argument", "request must be a JSON object with a 'body' field");
  engine::Article article;
  article.body = string_field(*j, "body");
  if (auto err = check_text("body", article.body, config_.max_article_bytes)) return *err;
  article.id = string_field(*j, "id");

  auto report_id = repository_.reserve();
  if (article.id.empty()) article.id = report_id;
  try {
    repository_.complete(report_id, engine_.analyze_article(article));
  } catch (const engine::AnalysisError& e) {
    repository_.fail(report_id, fmt::format("[{}] {}", e.stage(), e.what()));
    int status = http_status_for(e.code());
    // A bad article that got past validation is still a server-side stage failure.
    if (status == 400) status = 500;
    return error_response(status, to_string(e.code()), e.what(), e.stage());
  } catch (const Error& e) {
    repository_.fail(report_id, e.what());
    return error_response(e);
  }
  return ok(envelope(*repository_.entry(report_id), repository_.raw(report_id)));
}

ApiResponse AnalysisService::submit_batch(const std::string& upload) {
  if (upload.size() > config_.max_batch_bytes) {
    return error_response(413, "invalid_argument",
                          fmt::format("batch exceeds {} bytes", config_.max_batch_bytes));
  }
  if (upload.find('\0') != std::string::npos || !text::is_valid_utf8(upload)) {
    return error_response(400, "format_error", "batch upload is not UTF-8 text");
  }

  struct Line {
    std::size_t number;
    std::variant<engine::Article, eval::LineError> parsed;
  };
  std::vector<Line> lines;
  auto raw_lines = text::split_lines(upload);
  for (std::size_t i = 0; i < raw_lines.size(); ++i) {
    if (text::is_blank(raw_lines[i])) continue;
    lines.push_back({i + 1, eval::parse_article_line(raw_lines[i], i + 1, "", eval::FieldMap{}, false)});
  }
  if (lines.size() > config_.max_batch_lines) {
    return error_response(413, "invalid_argument",
                          fmt::format("batch has {} articles; limit is {}", lines.size(),
                                      config_.max_batch_lines));
  }
  auto valid = std::count_if(lines.begin(), lines.end(), [](const Line& l) {
    return std::holds_alternative<engine::Article>(l.parsed);
  });
  if (valid == 0) return error_response(400, "format_error", "batch contains no readable article line");

  auto job = std::make_shared<BatchJob>();
  {
    std::lock_guard lock(jobs_mutex_);
    job->id = fmt::format("job{:06}", next_job_++);
  }
  job->submitted_at = format_timestamp(clock_());

  auto rejected = ordered_json::array();
  std::vector<std::pair<std::string, engine::Article>> work;
  for (auto& line : lines) {
    auto report_id = repository_.reserve();
    job->report_ids.push_back(report_id);
    if (auto* err = std::get_if<eval::LineError>(&line.parsed)) {
      auto detail = fmt::format("line {}: {}", err->line, err->message);
      repository_.fail(report_id, detail);
      rejected.push_back({{"report_id", report_id}, {"line", err->line}, {"error", err->message}});
      job->finished.fetch_add(1);
      continue;
    }
    auto article = std::get<engine::Article>(std::move(line.parsed));
    if (article.id.empty()) article.id = fmt::format("{}:{}", job->id, line.number);
    work.emplace_back(report_id, std::move(article));
  }
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_.emplace(job->id, job);
  }
  for (auto& [report_id, article] : work) {
    enqueue([this, job, report_id = report_id, article = std::move(article)] {
      run_analysis(report_id, article);
      job->finished.fetch_add(1);
    });
  }
  spdlog::info("batch {}: {} article(s) queued, {} rejected line(s)", job->id, work.size(), rejected.size());
  return ok({{"job_id", job->id},
             {"report_ids", job->report_ids},
             {"total", job->report_ids.size()},
             {"rejected", std::move(rejected)}},
            202);
}

ApiResponse AnalysisService::job(const std::string& job_id) const {
  std::shared_ptr<BatchJob> job;
  {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) return error_response(404, "not_found", fmt::format("unknown job {}", job_id));
    job = it->second;
  }
  auto reports = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& id : job->report_ids) {
    auto entry = repository_.entry(id);
    ordered_json r{{"report_id", id}, {"status", to_string(entry->status)}};
    if (entry->error) r["error"] = *entry->error;
    if (entry->status == ReportStatus::failed) ++failed;
    reports.push_back(std::move(r));
  }
  auto finished = job->finished.load();
  return ok({{"job_id", job->id},
             {"submitted_at", job->submitted_at},
             {"total", job->report_ids.size()},
             {"completed", finished},
             {"failed", failed},
             {"done", finished == job->report_ids.size()},
             {"reports", std::move(reports)}});
}

ApiResponse AnalysisService::report(const std::string& report_id) const {
  auto entry = repository_.entry(report_id);
  if (!entry) return error_response(404, "not_found", fmt::format("unknown report {}", report_id));
  return ok(envelope(*entry, repository_.raw(report_id)));
}

ApiResponse AnalysisService::add_note(const std::string& report_id, const std::string& request) {
  auto j = parse_object(request);
  if (!j) return error_response(400, "invalid_argument", "request must be a JSON object with a 'note' field");
  auto note_text = string_field(*j, "note");
  if (auto err = check_text("note", note_text, config_.max_article_bytes)) return *err;
  auto author = text::trim(string_field(*j, "author"));
  if (author.empty()) author = "anonymous";

  std::lock_guard lock(report_lock(report_id));
  auto entry = repository_.entry(report_id);
  if (!entry) return error_response(404, "not_found", fmt::format("unknown report {}", report_id));
  if (entry->status != ReportStatus::complete) {
    return error_response(409, "not_complete",
                          fmt::format("report {} is {}", report_id, to_string(entry->status)));
  }
  auto report = *repository_.load(report_id);
  auto stamp = format_timestamp(clock_());
  // ISO timestamps order lexically; never let a clock step back reorder notes.
  if (!report.notes.empty() && stamp < report.notes.back().timestamp) stamp = report.notes.back().timestamp;
  report.notes.push_back({stamp, std::string(author), std::move(note_text)});
  repository_.update(report);
  return ok(envelope(*repository_.entry(report_id), repository_.raw(report_id)));
}

ApiResponse AnalysisService::download(const std::string& report_id) const {
  auto entry = repository_.entry(report_id);
  if (!entry) return error_response(404, "not_found", fmt::format("unknown report {}", report_id));
  if (entry->status != ReportStatus::complete) {
    return error_response(409, "not_complete",
                          fmt::format("report {} is {}", report_id, to_string(entry->status)));
  }
  ordered_json doc{{"format", kDownloadFormat}, {"report", ordered_json::parse(*repository_.raw(report_id))}};
  return ok(doc);
}

ApiResponse AnalysisService::mapping(const std::string& request) {
  auto j = parse_object(request);
  if (!j) {
    return error_response(400, "invalid_argument",
                          "request must be a JSON object with 'descriptor' and 'article' fields");
  }
  auto descriptor = string_field(*j, "descriptor");
  engine::Article article{"custom", string_field(*j, "article"), std::nullopt};
  if (auto err = check_text("descriptor", descriptor, config_.max_article_bytes)) return *err;
  if (auto err = check_text("article", article.body, config_.max_article_bytes)) return *err;
  try {
    auto m = engine_.map_descriptor_to_spans("custom", descriptor, article);
    return ok(engine::to_json(m, article.body));
  } catch (const Error& e) {
    return error_response(e, "mapping");
  }
}

ApiResponse AnalysisService::health() const {
  const auto& h = store_.header();
  auto counts = store_.leaning_counts();
  return ok({{"status", "ok"},
             {"mode", to_string(gateway_.config().mode)},
             {"store",
              {{"format_version", h.format_version},
               {"dimension", h.dimension},
               {"entry_count", h.entry_count},
               {"embedding_model", h.embedding_model},
               {"build_params_digest", h.build_params_digest},
               {"leaning_counts", {{"left", counts[0]}, {"neutral", counts[1]}, {"right", counts[2]}}}}},
             {"reports", repository_.size()}});
}

bool AnalysisService::authorized(std::string_view credential) const {
  if (!config_.token) return true;
  constexpr std::string_view kBearer = "Bearer ";
  if (credential.starts_with(kBearer)) credential.remove_prefix(kBearer.size());
  return credential == *config_.token;
}

}  // namespace biaslens::service
