#include "biaslens/engine/report.hpp"

#include <fmt/format.h>

namespace biaslens::engine {

std::string_view to_string(GoldLabel label) {
  switch (label) {
    case GoldLabel::left: return "left";
    case GoldLabel::neutral: return "neutral";
    case GoldLabel::right: return "right";
    case GoldLabel::pro: return "pro";
    case GoldLabel::anti: return "anti";
    case GoldLabel::biased: return "biased";
    case GoldLabel::non_biased: return "non-biased";
  }
  return "neutral";
}

std::optional<GoldLabel> parse_gold_label(std::string_view raw) {
  std::string key;
  for (char c : text::to_lower_ascii(text::trim(raw))) {
    if (std::isalnum(static_cast<unsigned char>(c))) key.push_back(c);
  }
  if (key == "left" || key == "liberal") return GoldLabel::left;
  if (key == "right" || key == "conservative") return GoldLabel::right;
  if (key == "neutral" || key == "center" || key == "centre" || key == "none") return GoldLabel::neutral;
  if (key == "pro") return GoldLabel::pro;
  if (key == "anti") return GoldLabel::anti;
  if (key == "biased" || key == "bias") return GoldLabel::biased;
  if (key == "nonbiased" || key == "unbiased" || key == "notbiased" || key == "nobias") {
    return GoldLabel::non_biased;
  }
  return std::nullopt;
}

namespace {

ordered_json per_leaning(const auto& values) {
  return ordered_json{{"left", values[0]}, {"neutral", values[1]}, {"right", values[2]}};
}

template <typename T>
std::array<T, 3> read_per_leaning(const nlohmann::json& j) {
  return {j.at("left").get<T>(), j.at("neutral").get<T>(), j.at("right").get<T>()};
}

Leaning leaning_from(const nlohmann::json& j) {
  auto l = parse_leaning(j.get<std::string>());
  if (!l) throw Error(ErrorCode::format_error, fmt::format("bad leaning {}", j.dump()));
  return *l;
}

Category category_from(const nlohmann::json& j) {
  auto c = match_category(j.get<std::string>());
  if (!c) throw Error(ErrorCode::format_error, fmt::format("bad category {}", j.dump()));
  return *c;
}

std::size_t byte_offset(std::string_view body, std::size_t code_point) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < body.size(); ++i) {
    if ((static_cast<unsigned char>(body[i]) & 0xC0) != 0x80) {
      if (seen == code_point) return i;
      ++seen;
    }
  }
  return body.size();
}

}  // namespace

std::string span_text(std::string_view body, const Span& span) {
  auto b = byte_offset(body, span.start);
  auto e = byte_offset(body, span.end);
  return std::string(body.substr(b, e - b));
}

ordered_json to_json(const BiasPrediction& p) {
  return ordered_json{{"label", to_string(p.label)},
                      {"votes", per_leaning(p.votes)},
                      {"similarity_mass", per_leaning(p.similarity_mass)},
                      {"tie_broken", p.tie_broken}};
}

ordered_json to_json(const SpanMapping& mapping, std::string_view body) {
  auto spans = ordered_json::array();
  for (const auto& s : mapping.spans) {
    spans.push_back({{"start", s.start}, {"end", s.end}, {"text", span_text(body, s)}});
  }
  return ordered_json{{"descriptor_id", mapping.descriptor_id},
                      {"spans", std::move(spans)},
                      {"unmatched_phrases", mapping.unmatched_phrases}};
}

ordered_json to_json(const AnalysisReport& r) {
  ordered_json article{{"id", r.article.id}, {"body", r.article.body}};
  article["gold_label"] = r.article.gold ? ordered_json(to_string(*r.article.gold)) : ordered_json();

  auto descriptors = ordered_json::array();
  for (const auto& d : r.descriptors) {
    descriptors.push_back({{"id", d.id},
                           {"category", display_name(d.category)},
                           {"text", d.text},
                           {"leaning", to_string(d.leaning_as_generated)}});
  }
  auto match_sets = ordered_json::array();
  for (const auto& set : r.match_sets) {
    auto matches = ordered_json::array();
    for (const auto& m : set.matches) {
      matches.push_back({{"indicator_id", m.indicator_id},
                         {"text", m.text},
                         {"category", display_name(m.category)},
                         {"leaning", to_string(m.leaning)},
                         {"similarity", m.similarity}});
    }
    match_sets.push_back({{"descriptor_id", set.descriptor_id},
                          {"matches", std::move(matches)},
                          {"distribution", per_leaning(set.distribution)}});
  }
  auto mappings = ordered_json::array();
  for (const auto& m : r.mappings) mappings.push_back(to_json(m, r.article.body));
  auto notes = ordered_json::array();
  for (const auto& n : r.notes) {
    notes.push_back({{"timestamp", n.timestamp}, {"author", n.author}, {"note", n.text}});
  }

  return ordered_json{{"id", r.id},
                      {"created_at", r.created_at},
                      {"article", std::move(article)},
                      {"descriptors", std::move(descriptors)},
                      {"match_sets", std::move(match_sets)},
                      {"prediction", to_json(r.prediction)},
                      {"no_descriptors", r.no_descriptors},
                      {"mappings", std::move(mappings)},
                      {"notes", std::move(notes)},
                      {"warnings", r.warnings}};
}

AnalysisReport report_from_json(const nlohmann::json& j) {
  try {
    AnalysisReport r;
    r.id = j.at("id").get<std::string>();
    r.created_at = j.at("created_at").get<std::string>();
    const auto& a = j.at("article");
    r.article.id = a.at("id").get<std::string>();
    r.article.body = a.at("body").get<std::string>();
    if (a.contains("gold_label") && !a["gold_label"].is_null()) {
      r.article.gold = parse_gold_label(a["gold_label"].get<std::string>());
    }
    for (const auto& d : j.at("descriptors")) {
      r.descriptors.push_back({d.at("id").get<std::string>(), category_from(d.at("category")),
                               d.at("text").get<std::string>(), leaning_from(d.at("leaning")), {}});
    }
    for (const auto& s : j.at("match_sets")) {
      DescriptorMatchSet set;
      set.descriptor_id = s.at("descriptor_id").get<std::string>();
      for (const auto& m : s.at("matches")) {
        set.matches.push_back({m.at("indicator_id").get<std::string>(),
                               m.at("similarity").get<double>(), leaning_from(m.at("leaning")),
                               category_from(m.at("category")), m.at("text").get<std::string>()});
      }
      set.distribution = read_per_leaning<double>(s.at("distribution"));
      r.match_sets.push_back(std::move(set));
    }
    const auto& p = j.at("prediction");
    r.prediction.label = leaning_from(p.at("label"));
    r.prediction.votes = read_per_leaning<std::size_t>(p.at("votes"));
    r.prediction.similarity_mass = read_per_leaning<double>(p.at("similarity_mass"));
    r.prediction.tie_broken = p.at("tie_broken").get<bool>();
    r.no_descriptors = j.at("no_descriptors").get<bool>();
    for (const auto& m : j.at("mappings")) {
      SpanMapping mapping;
      mapping.descriptor_id = m.at("descriptor_id").get<std::string>();
      for (const auto& s : m.at("spans")) {
        mapping.spans.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
      }
      mapping.unmatched_phrases = m.at("unmatched_phrases").get<std::vector<std::string>>();
      r.mappings.push_back(std::move(mapping));
    }
    for (const auto& n : j.at("notes")) {
      r.notes.push_back({n.at("timestamp").get<std::string>(), n.at("author").get<std::string>(),
                         n.at("note").get<std::string>()});
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, fmt::format("malformed report: {}", e.what()));
  }
}

std::string serialize_report(const AnalysisReport& report) { return to_json(report).dump(2); }

}  // namespace biaslens::engine
