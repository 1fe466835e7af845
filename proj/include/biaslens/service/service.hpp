#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "biaslens/engine/engine.hpp"
#include "biaslens/service/report_repository.hpp"

namespace biaslens::service {

struct ServiceConfig {
  std::filesystem::path data_dir = "biaslens-data";
  std::size_t max_article_bytes = 256 * 1024;
  std::size_t max_batch_bytes = 16 * 1024 * 1024;
  std::size_t max_batch_lines = 10000;
  std::size_t workers = 2;
  /// When set, every endpoint except /health requires this shared token.
  std::optional<std::string> token;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct BatchJob {
  std::string id;
  std::string submitted_at;
  std::vector<std::string> report_ids;  // in input line order, failed lines included
  std::atomic<std::size_t> finished{0};
};

/// Transport-independent implementation of every HTTP endpoint. Request
/// and response bodies are JSON; errors are
/// {"error": {"code", "message", "stage"?}}.
class AnalysisService {
 public:
  AnalysisService(gateway::Gateway& gateway, const store::VectorStore& store, ServiceConfig config,
                  engine::EngineOptions options = {}, Clock clock = system_clock());
  ~AnalysisService();

  AnalysisService(const AnalysisService&) = delete;
  AnalysisService& operator=(const AnalysisService&) = delete;

  /// {"body": text, "id"?: text} -> {"report_id", "status", "report"}
  ApiResponse analyze(const std::string& request);
  /// JSONL upload, one article per line -> 202 {"job_id", "report_ids", "total", "rejected"}
  ApiResponse submit_batch(const std::string& upload);
  ApiResponse job(const std::string& job_id) const;
  /// {"report_id", "status", "error"?, "report"?}
  ApiResponse report(const std::string& report_id) const;
  /// {"note": text, "author"?: text} -> updated report envelope
  ApiResponse add_note(const std::string& report_id, const std::string& request);
  /// {"format": "biaslens-report/1", "report": ...}; byte-stable for a fixed report.
  ApiResponse download(const std::string& report_id) const;
  /// {"descriptor": text, "article": text} -> SpanMapping, no report created
  ApiResponse mapping(const std::string& request);
  ApiResponse health() const;

  /// Accepts "Bearer <token>" or the bare token.
  [[nodiscard]] bool authorized(std::string_view credential) const;
  [[nodiscard]] bool token_required() const { return config_.token.has_value(); }

  /// Blocks until the worker queue is empty and no job is running.
  void wait_idle();

  [[nodiscard]] ReportRepository& repository() { return repository_; }

 private:
  void enqueue(std::function<void()> task);
  void worker_loop(std::stop_token stop);
  std::mutex& report_lock(const std::string& id);
  void run_analysis(const std::string& report_id, const engine::Article& article);

  gateway::Gateway& gateway_;
  const store::VectorStore& store_;
  ServiceConfig config_;
  engine::AnalysisEngine engine_;
  Clock clock_;
  ReportRepository repository_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<BatchJob>> jobs_;
  std::size_t next_job_ = 1;

  std::mutex locks_mutex_;
  std::map<std::string, std::unique_ptr<std::mutex>> report_locks_;

  std::mutex queue_mutex_;
  std::condition_variable_any queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::function<void()>> queue_;
  std::size_t running_ = 0;
  std::vector<std::jthread> workers_;
};

/// HTTP status for a library error: 400 for bad input, 503 when the
/// provider or replay fixtures cannot answer, 500 otherwise.
int http_status_for(ErrorCode code);

}  // namespace biaslens::service
