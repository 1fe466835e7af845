#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "biaslens/engine/engine.hpp"
#include "biaslens/engine/report.hpp"
#include "biaslens/engine/spans.hpp"
#include "biaslens/engine/voting.hpp"
#include "biaslens/eval/dataset.hpp"
#include "biaslens/eval/metrics.hpp"
#include "biaslens/forge/clustering.hpp"
#include "biaslens/gateway/tagged_line.hpp"
#include "biaslens/store/vector_store.hpp"

namespace py = pybind11;
using namespace biaslens;

namespace {

Leaning leaning_arg(const std::string& s) {
  auto l = parse_leaning(s);
  if (!l) throw Error(ErrorCode::invalid_argument, "unknown leaning '" + s + "'");
  return *l;
}

py::dict match_dict(const store::MatchResult& m) {
  py::dict d;
  d["indicator_id"] = m.indicator_id;
  d["similarity"] = m.similarity;
  d["leaning"] = std::string(to_string(m.leaning));
  d["category"] = std::string(display_name(m.category));
  d["text"] = m.text;
  return d;
}

py::list parse_lines(const std::string& response) {
  py::list out;
  for (const auto& l : gateway::parse_tagged_lines(response).lines) {
    py::dict d;
    d["category"] = std::string(display_name(l.category));
    d["text"] = l.text;
    d["leaning"] = std::string(to_string(l.leaning));
    d["overlong"] = l.overlong;
    out.append(d);
  }
  return out;
}

py::list cluster(const std::vector<std::string>& ids, const std::vector<Embedding>& embeddings, double alpha,
                 std::optional<std::vector<std::string>> leanings, bool per_leaning) {
  std::vector<IndicatorRecord> records;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Leaning l = leanings && i < leanings->size() ? leaning_arg((*leanings)[i]) : Leaning::neutral;
    records.push_back({ids[i], Category::tone_and_language, "", l, 1, "", Stage::verified});
  }
  auto clusters = forge::cluster_indicators(records, embeddings, {alpha, per_leaning});
  forge::select_representatives(clusters, records, embeddings);
  py::list out;
  for (const auto& c : clusters) {
    py::dict d;
    d["members"] = c.member_ids;
    d["representative"] = c.representative_id;
    d["centroid"] = c.centroid;
    out.append(d);
  }
  return out;
}

py::dict metrics(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
  auto m = eval::compute_metrics({tp, fp, fn, tn});
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["micro_f1"] = m.micro_f1;
  d["macro_f1"] = m.macro_f1;
  d["precision_undefined"] = m.precision_undefined;
  d["recall_undefined"] = m.recall_undefined;
  return d;
}

/// `pools` holds one list of (leaning, similarity) matches per descriptor.
py::dict predict(const std::vector<std::vector<std::pair<std::string, double>>>& pools) {
  std::vector<engine::DescriptorMatchSet> sets;
  std::size_t n = 0;
  for (const auto& pool : pools) {
    engine::DescriptorMatchSet s;
    s.descriptor_id = "d" + std::to_string(sets.size() + 1);
    for (const auto& [leaning, sim] : pool) {
      s.matches.push_back({"m" + std::to_string(++n), sim, leaning_arg(leaning), Category::tone_and_language, ""});
    }
    sets.push_back(std::move(s));
  }
  auto p = engine::predict_bias(sets);
  py::dict d;
  d["label"] = std::string(to_string(p.label));
  d["votes"] = p.votes;
  d["similarity_mass"] = p.similarity_mass;
  d["tie_broken"] = p.tie_broken;
  return d;
}

std::string locate(const std::vector<std::string>& phrases, const std::string& body) {
  auto m = engine::locate_phrases("custom", phrases, body);
  return engine::to_json(m, body).dump();
}

std::vector<std::string> relabel(const std::vector<std::string>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) {
    auto g = engine::parse_gold_label(l);
    if (!g) throw Error(ErrorCode::schema_violation, "unknown label '" + l + "'");
    out.emplace_back(engine::to_string(eval::to_binary(*g)));
  }
  return out;
}

std::string analyze(const std::string& body, const std::filesystem::path& store_path,
                    const std::filesystem::path& fixtures, const std::string& mode, const std::string& model,
                    std::size_t m, const std::string& article_id) {
  auto s = store::VectorStore::load(store_path);
  gateway::ProviderConfig config;
  config.mode = gateway::parse_mode(mode);
  config.fixture_path = fixtures;
  if (!model.empty()) config.model = model;
  config.embedding_model = s.header().embedding_model;
  config.embedding_dimension = s.header().dimension;
  config.validate();
  gateway::Gateway gw(config);
  engine::AnalysisEngine eng(gw, s, {m, 1});
  return engine::serialize_report(eng.analyze_article({article_id, body, std::nullopt}));
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Native core of the biaslens media-bias analysis toolkit.";

  static py::exception<Error> error_type(mod, "BiaslensError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  mod.def("parse_tagged_lines", &parse_lines, py::arg("response"));
  mod.def("cosine_similarity",
          [](const Embedding& a, const Embedding& b) { return store::cosine_similarity(a, b); }, py::arg("a"),
          py::arg("b"));
  mod.def("cluster", &cluster, py::arg("ids"), py::arg("embeddings"), py::arg("alpha"),
          py::arg("leanings") = py::none(), py::arg("per_leaning") = false);
  mod.def("compute_metrics", &metrics, py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"));
  mod.def("f1_score", &eval::f1_score, py::arg("precision"), py::arg("recall"));
  mod.def("predict_bias", &predict, py::arg("pools"));
  mod.def("_locate_phrases", &locate, py::arg("phrases"), py::arg("body"));
  mod.def("relabel_binary", &relabel, py::arg("labels"));
  mod.def("_analyze", &analyze, py::arg("body"), py::arg("store"), py::arg("fixtures"), py::arg("mode"),
          py::arg("model"), py::arg("m"), py::arg("article_id"));

  py::class_<store::VectorStore>(mod, "VectorStore")
      .def_static("load", &store::VectorStore::load, py::arg("path"))
      .def("__len__", &store::VectorStore::size)
      .def("query",
           [](const store::VectorStore& s, const Embedding& q, std::size_t m) {
             py::list out;
             for (const auto& r : s.top_m_query(q, m)) out.append(match_dict(r));
             return out;
           },
           py::arg("query"), py::arg("m") = 5)
      .def_property_readonly("dimension", [](const store::VectorStore& s) { return s.header().dimension; })
      .def_property_readonly("embedding_model",
                             [](const store::VectorStore& s) { return s.header().embedding_model; })
      .def_property_readonly("build_params_digest",
                             [](const store::VectorStore& s) { return s.header().build_params_digest; })
      .def("leaning_counts", [](const store::VectorStore& s) {
        auto c = s.leaning_counts();
        py::dict d;
        d["left"] = c[0];
        d["neutral"] = c[1];
        d["right"] = c[2];
        return d;
      });
}
