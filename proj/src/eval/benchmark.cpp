#include "biaslens/eval/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "biaslens/detail/parallel.hpp"
#include "biaslens/engine/engine.hpp"

namespace biaslens::eval {

namespace {

struct ItemOutcome {
  std::string id;
  engine::GoldLabel gold = engine::GoldLabel::non_biased;
  std::optional<engine::GoldLabel> predicted;
  std::optional<ItemFailure> failure;
};

double round1(double pct) { return std::round(pct * 10.0) / 10.0; }

}  // namespace

void AblationConfig::validate() const {
  if (use_strict_clustering && !use_indicator_database) {
    throw Error(ErrorCode::invalid_argument, "strict clustering requires the indicator database");
  }
}

Leaning classify_direct(gateway::Gateway& gateway, const std::string& body,
                        const std::string& examples) {
  auto prompt = gateway.prompts().zero_shot_classification().render(
      {{"TEXT", body}, {"EXAMPLES", examples}});
  auto response = gateway.complete_rendered("zero_shot_classification", prompt);
  std::string token;
  auto flush = [&]() -> std::optional<Leaning> {
    auto l = token.empty() ? std::nullopt : parse_leaning(token);
    token.clear();
    return l;
  };
  for (char c : response + " ") {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (auto l = flush()) {
      return *l;
    }
  }
  throw Error(ErrorCode::format_error,
              fmt::format("classification reply names no leaning: {}", text::trim(response)));
}

BenchmarkReport run_benchmark(gateway::Gateway& gateway, std::span<const LabeledDataset> datasets,
                              const store::VectorStore* store,
                              const store::VectorStore* unclustered_store,
                              const BenchmarkOptions& options) {
  if (datasets.empty()) throw Error(ErrorCode::invalid_argument, "no datasets given");
  options.ablation.validate();

  const store::VectorStore* active = nullptr;
  if (options.ablation.use_indicator_database) {
    active = options.ablation.use_strict_clustering ? store : unclustered_store;
    if (!active) {
      throw Error(ErrorCode::invalid_argument,
                  options.ablation.use_strict_clustering
                      ? "benchmark requires a store"
                      : "clustering ablation requires an unclustered store");
    }
  }
  std::optional<engine::AnalysisEngine> analysis;
  if (active) analysis.emplace(gateway, *active, engine::EngineOptions{options.m, 1});

  BenchmarkReport report;
  report.ablation = options.ablation;
  report.m = options.m;

  for (const auto& dataset : datasets) {
    auto relabeled = relabel_binary(dataset);
    const auto& items = relabeled.dataset.items;

    std::vector<ItemOutcome> outcomes(items.size());
    detail::parallel_for(items.size(), options.parallelism, [&](std::size_t i) {
      const auto& item = items[i];
      auto& out = outcomes[i];
      out.id = item.id;
      out.gold = *item.gold;
      try {
        Leaning label;
        if (analysis) {
          label = analysis->analyze_article(item).prediction.label;
        } else {
          label = classify_direct(gateway, item.body, options.classification_examples);
        }
        out.predicted = binary_prediction(label);
      } catch (const engine::AnalysisError& e) {
        out.failure = ItemFailure{item.id, e.stage(), e.what()};
      } catch (const std::exception& e) {
        out.failure = ItemFailure{item.id, analysis ? "analysis" : "classification", e.what()};
      }
    });
    std::sort(outcomes.begin(), outcomes.end(),
              [](const ItemOutcome& a, const ItemOutcome& b) { return a.id < b.id; });

    DatasetResult result;
    result.name = dataset.name;
    result.source_scheme = dataset.scheme;
    result.item_count = items.size();
    result.mapping = relabeled.mapping;
    for (auto& o : outcomes) {
      if (o.failure) {
        result.failures.push_back(std::move(*o.failure));
        continue;
      }
      bool gold_biased = o.gold == engine::GoldLabel::biased;
      bool pred_biased = *o.predicted == engine::GoldLabel::biased;
      if (gold_biased && pred_biased) ++result.counts.tp;
      if (!gold_biased && pred_biased) ++result.counts.fp;
      if (gold_biased && !pred_biased) ++result.counts.fn;
      if (!gold_biased && !pred_biased) ++result.counts.tn;
      ++result.evaluated;
    }

    auto rate = items.empty() ? 0.0
                              : static_cast<double>(result.failures.size()) /
                                    static_cast<double>(items.size());
    if (rate > options.max_failure_rate || result.evaluated == 0) {
      std::string ids;
      for (const auto& f : result.failures) ids += fmt::format("\n  {} [{}]: {}", f.item_id, f.stage, f.message);
      throw Error(ErrorCode::too_many_failures,
                  fmt::format("dataset {}: {} of {} items failed{}", dataset.name,
                              result.failures.size(), items.size(), ids));
    }
    if (!result.failures.empty()) {
      spdlog::warn("dataset {}: {} item(s) failed and were excluded", dataset.name,
                   result.failures.size());
    }
    result.metrics = compute_metrics(result.counts);
    report.datasets.push_back(std::move(result));
  }
  return report;
}

nlohmann::ordered_json to_json(const BenchmarkReport& report) {
  using nlohmann::ordered_json;
  auto rows = ordered_json::array();
  for (const auto& d : report.datasets) {
    const auto& m = d.metrics;
    auto mapping = ordered_json::array();
    for (const auto& e : d.mapping) {
      mapping.push_back({{"from", engine::to_string(e.from)},
                         {"to", engine::to_string(e.to)},
                         {"count", e.count}});
    }
    auto failures = ordered_json::array();
    for (const auto& f : d.failures) {
      failures.push_back({{"id", f.item_id}, {"stage", f.stage}, {"message", f.message}});
    }
    rows.push_back({
        {"dataset", d.name},
        {"source_scheme", to_string(d.source_scheme)},
        {"items", d.item_count},
        {"evaluated", d.evaluated},
        {"counts", {{"tp", d.counts.tp}, {"fp", d.counts.fp}, {"fn", d.counts.fn}, {"tn", d.counts.tn}}},
        {"metrics",
         {{"precision", m.precision},
          {"recall", m.recall},
          {"f1", m.f1},
          {"micro_f1", m.micro_f1},
          {"macro_f1", m.macro_f1}}},
        {"flags",
         {{"precision_undefined", m.precision_undefined},
          {"recall_undefined", m.recall_undefined},
          {"f1_undefined", m.f1_undefined},
          {"non_biased_precision_undefined", m.non_biased_precision_undefined},
          {"non_biased_recall_undefined", m.non_biased_recall_undefined},
          {"non_biased_f1_undefined", m.non_biased_f1_undefined}}},
        {"rounded_f1_consistent",
         f1_consistent(round1(m.precision * 100), round1(m.recall * 100), round1(m.f1 * 100), 0.15)},
        {"label_mapping", std::move(mapping)},
        {"failures", std::move(failures)},
    });
  }
  return ordered_json{{"ablation",
                       {{"use_indicator_database", report.ablation.use_indicator_database},
                        {"use_strict_clustering", report.ablation.use_strict_clustering}}},
                      {"m", report.m},
                      {"columns", {"Precision", "Recall", "F1", "Micro F1", "Macro F1"}},
                      {"datasets", std::move(rows)}};
}

std::string render_table(const BenchmarkReport& report) {
  static constexpr std::string_view kRows[] = {"Precision", "Recall", "F1", "Micro F1", "Macro F1"};
  std::size_t label_width = std::string_view("Precision").size();
  std::vector<std::size_t> widths;
  for (const auto& d : report.datasets) widths.push_back(std::max<std::size_t>(d.name.size(), 6));

  std::string out = fmt::format("{:<{}}", "", label_width);
  for (std::size_t i = 0; i < report.datasets.size(); ++i) {
    out += fmt::format("  {:>{}}", report.datasets[i].name, widths[i]);
  }
  out += '\n';
  for (std::size_t r = 0; r < std::size(kRows); ++r) {
    out += fmt::format("{:<{}}", kRows[r], label_width);
    for (std::size_t i = 0; i < report.datasets.size(); ++i) {
      const auto& m = report.datasets[i].metrics;
      const double values[] = {m.precision, m.recall, m.f1, m.micro_f1, m.macro_f1};
      out += fmt::format("  {:>{}.1f}", values[r] * 100.0, widths[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace biaslens::eval
