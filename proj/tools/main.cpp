#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>
#include <spdlog/sinks/stdout_color_sinks.h>

#include "biaslens/eval/benchmark.hpp"
#include "biaslens/forge/pipeline.hpp"
#include "biaslens/service/http_server.hpp"

namespace fs = std::filesystem;
using namespace biaslens;

namespace {

struct ProviderFlags {
  std::string mode = "live";
  std::string fixtures;
  std::string endpoint;
  std::string model;
  std::string embedding_model;
  std::size_t dimension = 0;
  std::string prompts;
  int max_retries = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "live, record or replay")
        ->check(CLI::IsMember({"live", "record", "replay"}));
    cmd->add_option("--fixtures", fixtures, "Fixture file for record/replay");
    cmd->add_option("--endpoint", endpoint, "OpenAI-compatible API base URL");
    cmd->add_option("--model", model, "Chat model");
    cmd->add_option("--embedding-model", embedding_model, "Embedding model");
    cmd->add_option("--dimension", dimension, "Embedding dimension");
    cmd->add_option("--prompts", prompts, "Directory overriding the built-in prompt templates");
    cmd->add_option("--max-retries", max_retries, "Transport retries per call");
  }

  /// `store` fills in the embedding model and dimension unless given.
  gateway::ProviderConfig config(const store::VectorStore* store = nullptr) const {
    gateway::ProviderConfig c;
    c.mode = gateway::parse_mode(mode);
    c.fixture_path = fixtures;
    if (!endpoint.empty()) c.endpoint = endpoint;
    if (!model.empty()) c.model = model;
    if (store) {
      c.embedding_model = store->header().embedding_model;
      c.embedding_dimension = store->header().dimension;
    }
    if (!embedding_model.empty()) c.embedding_model = embedding_model;
    if (dimension > 0) c.embedding_dimension = dimension;
    if (max_retries >= 0) c.max_retries = max_retries;
    c.validate();
    return c;
  }

  gateway::PromptLibrary prompt_library() const {
    return prompts.empty() ? gateway::PromptLibrary::defaults()
                           : gateway::PromptLibrary::from_directory(prompts);
  }
};

service::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

int forge_build(const ProviderFlags& provider, const std::string& corpus, double alpha, int threshold,
                bool per_leaning, std::size_t parallelism, const std::string& out,
                const std::string& unclustered_out) {
  forge::BuildOptions options;
  options.cluster.alpha = alpha;
  options.cluster.per_leaning = per_leaning;
  options.confidence_threshold = threshold;
  options.parallelism = parallelism;
  if (!unclustered_out.empty()) options.unclustered_out = unclustered_out;

  gateway::Gateway gw(provider.config(), provider.prompt_library());
  auto summary = forge::build_database(gw, fs::path(corpus), options, out);
  std::cout << forge::to_json_line(summary) << '\n';
  return 0;
}

int store_inspect(const std::string& path) {
  auto s = store::VectorStore::load(path);
  const auto& h = s.header();
  auto leanings = s.leaning_counts();
  std::map<std::string, std::size_t> categories;
  for (const auto& e : s.entries()) ++categories[std::string(display_name(e.record.category))];
  nlohmann::ordered_json j{
      {"format_version", h.format_version},
      {"dimension", h.dimension},
      {"entry_count", h.entry_count},
      {"embedding_model", h.embedding_model},
      {"build_params_digest", h.build_params_digest},
      {"leaning_counts", {{"left", leanings[0]}, {"neutral", leanings[1]}, {"right", leanings[2]}}},
      {"category_counts", categories},
  };
  std::cout << j.dump(2) << '\n';
  return 0;
}

int bench_run(const ProviderFlags& provider, const std::vector<std::string>& dataset_args,
              const std::string& store_path, const std::string& unclustered_path,
              const eval::BenchmarkOptions& options, const eval::FieldMap& fields,
              const std::string& examples_path, const std::string& out) {
  std::vector<eval::LabeledDataset> datasets;
  for (const auto& arg : dataset_args) {
    auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::invalid_argument, fmt::format("--dataset expects name=path, got '{}'", arg));
    }
    auto name = arg.substr(0, eq);
    for (const auto& d : datasets) {
      if (d.name == name) throw Error(ErrorCode::invalid_argument, fmt::format("duplicate dataset name {}", name));
    }
    datasets.push_back(eval::load_dataset(arg.substr(eq + 1), name, fields));
  }

  std::optional<store::VectorStore> clustered, unclustered;
  if (!store_path.empty()) clustered = store::VectorStore::load(store_path);
  if (!unclustered_path.empty()) unclustered = store::VectorStore::load(unclustered_path);

  auto opts = options;
  if (!examples_path.empty()) {
    std::ifstream in(examples_path);
    if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot read {}", examples_path));
    opts.classification_examples.assign(std::istreambuf_iterator<char>(in), {});
  }

  const store::VectorStore* reference = clustered ? &*clustered : unclustered ? &*unclustered : nullptr;
  gateway::Gateway gw(provider.config(reference), provider.prompt_library());
  auto report = eval::run_benchmark(gw, datasets, clustered ? &*clustered : nullptr,
                                    unclustered ? &*unclustered : nullptr, opts);
  auto json = eval::to_json(report).dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << json;
  } else {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error(ErrorCode::io_error, fmt::format("cannot write {}", out));
    f << json;
  }
  std::cerr << eval::render_table(report);
  return 0;
}

int serve(const ProviderFlags& provider, const std::string& store_path, const std::string& host, int port,
          service::ServiceConfig config, std::size_t m) {
  auto s = store::VectorStore::load(store_path);
  gateway::Gateway gw(provider.config(&s), provider.prompt_library());
  service::AnalysisService svc(gw, s, std::move(config), engine::EngineOptions{m, 4});
  service::HttpServer server(svc);
  int bound = server.bind(host, port);
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  spdlog::info("serving {} indicators on http://{}:{}", s.size(), host, bound);
  server.listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biaslens: indicator-based media bias analysis"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  ProviderFlags provider;

  // forge build
  auto* forge_cmd = app.add_subcommand("forge", "Offline indicator database construction");
  forge_cmd->require_subcommand(1);
  auto* build_cmd = forge_cmd->add_subcommand("build", "Build an indicator store from a labeled corpus");
  std::string corpus, out, unclustered_out;
  double alpha = 0.0;
  int threshold = 6;
  bool per_leaning = false;
  std::size_t parallelism = 4;
  build_cmd->add_option("--corpus", corpus, "JSONL corpus with id, body, leaning")->required();
  build_cmd->add_option("--alpha", alpha, "Clustering distance threshold")->required()->check(CLI::NonNegativeNumber);
  build_cmd->add_option("--confidence-threshold", threshold, "Minimum confidence score kept")
      ->check(CLI::Range(1, 10));
  build_cmd->add_option("--out", out, "Output store path")->required();
  build_cmd->add_option("--unclustered-out", unclustered_out, "Also write the unclustered verified store");
  build_cmd->add_flag("--per-leaning", per_leaning, "Cluster each leaning separately");
  build_cmd->add_option("--parallelism", parallelism, "Concurrent provider calls")->check(CLI::PositiveNumber);
  provider.attach(build_cmd);

  // store inspect
  auto* store_cmd = app.add_subcommand("store", "Vector store utilities");
  store_cmd->require_subcommand(1);
  auto* inspect_cmd = store_cmd->add_subcommand("inspect", "Print the header and label counts of a store");
  std::string inspect_path;
  inspect_cmd->add_option("path", inspect_path, "Store file")->required();

  // bench run
  auto* bench_cmd = app.add_subcommand("bench", "Benchmark and ablation runs");
  bench_cmd->require_subcommand(1);
  auto* run_cmd = bench_cmd->add_subcommand("run", "Evaluate labeled datasets");
  std::vector<std::string> dataset_args;
  std::string store_path, unclustered_path, examples_path, bench_out;
  eval::BenchmarkOptions bench;
  eval::FieldMap fields;
  bool ablate_clustering = false, ablate_indicators = false;
  std::vector<std::string> aliases;
  run_cmd->add_option("--dataset", dataset_args, "name=path, repeatable")->required();
  run_cmd->add_option("--store", store_path, "Clustered indicator store");
  run_cmd->add_option("--unclustered-store", unclustered_path, "Unclustered store for the clustering ablation");
  run_cmd->add_option("--m", bench.m, "Indicators retrieved per descriptor")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--ablate-clustering", ablate_clustering, "Query the unclustered store");
  run_cmd->add_flag("--ablate-indicators", ablate_indicators, "Classify directly without the database");
  run_cmd->add_option("--examples", examples_path, "Exemplars for direct classification (few-shot)");
  run_cmd->add_option("--label-field", fields.label_field, "Label field name");
  run_cmd->add_option("--label-alias", aliases, "raw=canonical label rewrite, repeatable");
  run_cmd->add_option("--parallelism", bench.parallelism, "Concurrent items")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", bench_out, "Report path (default stdout)");
  provider.attach(run_cmd);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP analysis service");
  std::string serve_store, host = "127.0.0.1", token;
  int port = 8080;
  std::size_t serve_m = 5;
  service::ServiceConfig service_config;
  std::string data_dir = service_config.data_dir.string();
  serve_cmd->add_option("--store", serve_store, "Indicator store")->required();
  serve_cmd->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--data-dir", data_dir, "Report directory");
  serve_cmd->add_option("--workers", service_config.workers, "Batch worker threads")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--m", serve_m, "Indicators retrieved per descriptor")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--token", token, "Shared access token");
  provider.attach(serve_cmd);

  CLI11_PARSE(app, argc, argv);
  // stdout carries JSON results; diagnostics go to stderr.
  spdlog::set_default_logger(spdlog::stderr_color_mt("biaslens"));
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (build_cmd->parsed()) {
      return forge_build(provider, corpus, alpha, threshold, per_leaning, parallelism, out, unclustered_out);
    }
    if (inspect_cmd->parsed()) return store_inspect(inspect_path);
    if (run_cmd->parsed()) {
      bench.ablation.use_indicator_database = !ablate_indicators;
      bench.ablation.use_strict_clustering = !ablate_indicators && !ablate_clustering;
      for (const auto& a : aliases) {
        auto eq = a.find('=');
        if (eq == std::string::npos) {
          throw Error(ErrorCode::invalid_argument, fmt::format("--label-alias expects raw=label, got '{}'", a));
        }
        fields.label_aliases[a.substr(0, eq)] = a.substr(eq + 1);
      }
      return bench_run(provider, dataset_args, store_path, unclustered_path, bench, fields, examples_path,
                       bench_out);
    }
    if (serve_cmd->parsed()) {
      service_config.data_dir = data_dir;
      if (!token.empty()) service_config.token = token;
      return serve(provider, serve_store, host, port, service_config, serve_m);
    }
  } catch (const Error& e) {
    spdlog::error("{} ({})", e.what(), to_string(e.code()));
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 1;
}
