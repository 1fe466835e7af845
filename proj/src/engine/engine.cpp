#include "biaslens/engine/engine.hpp"

#include <optional>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "biaslens/detail/parallel.hpp"

namespace biaslens::engine {

namespace {

template <typename Fn>
auto in_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const AnalysisError&) {
    throw;
  } catch (const Error& e) {
    throw AnalysisError(e.code(), std::string(stage), fmt::format("{}: {}", stage, e.what()));
  } catch (const std::exception& e) {
    throw AnalysisError(ErrorCode::invalid_argument, std::string(stage),
                        fmt::format("{}: {}", stage, e.what()));
  }
}

}  // namespace

AnalysisEngine::AnalysisEngine(gateway::Gateway& gateway, const store::VectorStore& store,
                               EngineOptions options, Clock clock)
    : gateway_(gateway), store_(store), options_(options), clock_(std::move(clock)) {
  if (options_.m == 0) throw Error(ErrorCode::invalid_argument, "m must be at least 1");
}

std::vector<Descriptor> AnalysisEngine::generate_descriptors(const Article& article,
                                                             std::vector<std::string>* warnings) const {
  if (text::is_blank(article.body)) throw Error(ErrorCode::empty_input, "article body is empty");

  auto response = gateway_.complete_chat(
      gateway::PromptKind::descriptor_generation,
      {{"TEXT", article.body}, {"EXAMPLES", gateway_.prompts().descriptor_examples()}});
  auto parsed = gateway::parse_tagged_lines(response);
  for (auto& w : parsed.warnings) {
    if (warnings) warnings->push_back(w);
  }
  if (parsed.lines.empty()) {
    auto message = fmt::format("article {}: no descriptor could be parsed", article.id);
    spdlog::warn("{}", message);
    if (warnings) warnings->push_back(std::move(message));
    return {};
  }

  std::vector<std::string> texts;
  for (const auto& line : parsed.lines) texts.push_back(line.text);
  auto embeddings = gateway_.embed_texts(texts);

  std::vector<Descriptor> out;
  for (std::size_t i = 0; i < parsed.lines.size(); ++i) {
    auto& line = parsed.lines[i];
    if (embeddings[i].size() != store_.header().dimension) {
      throw Error(ErrorCode::dimension_mismatch,
                  fmt::format("descriptor embedding dimension {} differs from store dimension {}",
                              embeddings[i].size(), store_.header().dimension));
    }
    out.push_back({fmt::format("d{:02}", i + 1), line.category, std::move(line.text), line.leaning,
                   std::move(embeddings[i])});
  }
  return out;
}

std::vector<DescriptorMatchSet> AnalysisEngine::match_descriptors(
    std::span<const Descriptor> descriptors) const {
  if (store_.empty()) throw Error(ErrorCode::empty_store, "indicator store is empty");
  std::vector<DescriptorMatchSet> out;
  out.reserve(descriptors.size());
  for (const auto& d : descriptors) {
    DescriptorMatchSet set;
    set.descriptor_id = d.id;
    set.matches = store_.top_m_query(d.embedding, options_.m);
    set.distribution = leaning_distribution(set.matches);
    out.push_back(std::move(set));
  }
  return out;
}

SpanMapping AnalysisEngine::map_descriptor_to_spans(std::string descriptor_id,
                                                    const std::string& descriptor_text,
                                                    const Article& article) const {
  if (text::is_blank(descriptor_text) || text::is_blank(article.body)) {
    throw Error(ErrorCode::empty_input, "descriptor and article text must both be non-empty");
  }
  auto response = gateway_.complete_chat(gateway::PromptKind::descriptor_mapping,
                                         {{"TEXT", article.body}, {"DEP", descriptor_text}});
  auto phrases = parse_bracketed_phrases(response);
  return locate_phrases(std::move(descriptor_id), phrases, article.body);
}

AnalysisReport AnalysisEngine::analyze_article(const Article& article) const {
  AnalysisReport report;
  report.created_at = format_timestamp(clock_());
  report.id = fmt::format("{}@{}", article.id, report.created_at);
  report.article = article;

  report.descriptors = in_stage("descriptor-generation",
                                [&] { return generate_descriptors(article, &report.warnings); });
  if (report.descriptors.empty()) {
    report.no_descriptors = true;
    report.prediction = BiasPrediction{};
    return report;
  }

  report.match_sets = in_stage("matching", [&] { return match_descriptors(report.descriptors); });
  report.prediction = in_stage("prediction", [&] { return predict_bias(report.match_sets); });

  std::vector<std::optional<SpanMapping>> mappings(report.descriptors.size());
  std::vector<std::optional<AnalysisError>> errors(report.descriptors.size());
  detail::parallel_for(report.descriptors.size(), options_.parallelism, [&](std::size_t i) {
    const auto& d = report.descriptors[i];
    try {
      mappings[i] = in_stage("mapping", [&] { return map_descriptor_to_spans(d.id, d.text, article); });
    } catch (const AnalysisError& e) {
      errors[i] = e;
    }
  });
  for (auto& e : errors) {
    if (e) throw *e;
  }
  for (auto& m : mappings) report.mappings.push_back(std::move(*m));
  return report;
}

}  // namespace biaslens::engine
