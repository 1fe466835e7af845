#include "biaslens/forge/pipeline.hpp"

#include <fstream>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "biaslens/store/vector_store.hpp"

namespace biaslens::forge {

namespace {

constexpr std::size_t kEmbedBatch = 64;

void throw_if_failed(const std::vector<ArticleFailure>& failures) {
  if (failures.empty()) return;
  std::string message = fmt::format("{} item(s) failed:", failures.size());
  for (const auto& f : failures) {
    message += fmt::format("\n  [{}] {}: {}", f.stage, f.article_id, f.message);
  }
  throw Error(failures.front().code, message);
}

std::vector<Embedding> embed_all(gateway::Gateway& gateway,
                                 const std::vector<IndicatorRecord>& records) {
  std::vector<Embedding> out;
  out.reserve(records.size());
  for (std::size_t start = 0; start < records.size(); start += kEmbedBatch) {
    std::vector<std::string> batch;
    for (std::size_t i = start; i < std::min(records.size(), start + kEmbedBatch); ++i) {
      batch.push_back(records[i].text);
    }
    for (auto& v : gateway.embed_texts(batch)) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::string to_json_line(const BuildSummary& s) {
  nlohmann::ordered_json j = {
      {"raw", s.raw_count},
      {"conflict_free", s.conflict_free_count},
      {"verified", s.verified_count},
      {"clusters", s.cluster_count},
      {"final", s.final_count},
      {"alpha", s.alpha},
      {"confidence_threshold", s.confidence_threshold},
      {"per_leaning", s.per_leaning},
      {"build_params_digest", s.build_params_digest},
      {"warnings", s.warning_count},
  };
  return j.dump();
}

std::vector<LabeledArticle> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, fmt::format("cannot open corpus {}", path.string()));

  std::vector<LabeledArticle> corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    auto fail = [&](std::string_view why) {
      return Error(ErrorCode::schema_violation,
                   fmt::format("{}:{}: {}", path.string(), line_no, why));
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw fail("not valid JSON");
    }
    if (!j.is_object()) throw fail("record is not an object");
    LabeledArticle article;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
      throw fail("missing string field 'id'");
    }
    if (!j.contains("body") || !j["body"].is_string()) throw fail("missing string field 'body'");
    if (!j.contains("leaning") || !j["leaning"].is_string()) {
      throw fail("missing string field 'leaning'");
    }
    article.id = j["id"].get<std::string>();
    article.body = j["body"].get<std::string>();
    if (text::is_blank(article.body)) throw fail("empty body");
    auto leaning = parse_leaning(j["leaning"].get<std::string>());
    if (!leaning) throw fail(fmt::format("unknown leaning '{}'", j["leaning"].get<std::string>()));
    article.leaning = *leaning;
    if (!seen.insert(article.id).second) throw fail(fmt::format("duplicate id '{}'", article.id));
    corpus.push_back(std::move(article));
  }
  return corpus;
}

std::string build_params_digest(const BuildOptions& options,
                                const gateway::ProviderConfig& provider) {
  auto canonical = fmt::format("alpha={:.17g};threshold={};per_leaning={};linkage=complete;"
                               "model={};embedding_model={};dimension={}",
                               options.cluster.alpha, options.confidence_threshold,
                               options.cluster.per_leaning, provider.model,
                               provider.embedding_model, provider.embedding_dimension);
  return gateway::sha256_hex(canonical).substr(0, 16);
}

BuildSummary build_database(gateway::Gateway& gateway, std::span<const LabeledArticle> corpus,
                            const BuildOptions& options, const std::filesystem::path& output) {
  if (!(options.cluster.alpha > 0.0)) throw Error(ErrorCode::invalid_argument, "alpha must be > 0");

  BuildSummary summary;
  summary.alpha = options.cluster.alpha;
  summary.confidence_threshold = options.confidence_threshold;
  summary.per_leaning = options.cluster.per_leaning;
  summary.build_params_digest = build_params_digest(options, gateway.config());

  auto generated = generate_indicators(gateway, corpus, options.parallelism);
  throw_if_failed(generated.failures);
  summary.raw_count = generated.records.size();
  summary.warning_count += generated.warnings.size();

  auto conflict_free = eliminate_conflicts(generated.records);
  summary.conflict_free_count = conflict_free.size();

  auto scored = score_and_filter(gateway, conflict_free, options.confidence_threshold,
                                 options.parallelism);
  throw_if_failed(scored.failures);
  summary.verified_count = scored.records.size();
  summary.warning_count += scored.warnings.size();

  const auto dimension = static_cast<std::uint32_t>(gateway.config().embedding_dimension);
  const auto& model = gateway.config().embedding_model;
  store::VectorStore database(dimension, model, summary.build_params_digest);

  if (scored.records.empty()) {
    spdlog::warn("no indicator survived verification; writing an empty store");
    ++summary.warning_count;
  } else {
    auto embeddings = embed_all(gateway, scored.records);
    if (options.unclustered_out) {
      store::VectorStore flat(dimension, model, summary.build_params_digest + "-unclustered");
      for (std::size_t i = 0; i < scored.records.size(); ++i) {
        flat.add(advance(scored.records[i], Stage::final), embeddings[i]);
      }
      flat.save(*options.unclustered_out);
    }

    auto clusters = cluster_indicators(scored.records, embeddings, options.cluster);
    summary.cluster_count = clusters.size();
    auto finals = select_representatives(clusters, scored.records, embeddings);
    summary.final_count = finals.size();

    std::unordered_map<std::string_view, std::size_t> position;
    for (std::size_t i = 0; i < scored.records.size(); ++i) position.emplace(scored.records[i].id, i);
    for (auto& rec : finals) {
      auto idx = position.at(rec.id);
      database.add(std::move(rec), embeddings[idx]);
    }
  }
  database.save(output);
  return summary;
}

BuildSummary build_database(gateway::Gateway& gateway, const std::filesystem::path& corpus_path,
                            const BuildOptions& options, const std::filesystem::path& output) {
  auto corpus = load_corpus(corpus_path);
  return build_database(gateway, corpus, options, output);
}

}  // namespace biaslens::forge
