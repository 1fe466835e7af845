#include <doctest.h>

#include <fstream>

#include "biaslens/eval/benchmark.hpp"
#include "biaslens/eval/dataset.hpp"
#include "biaslens/eval/metrics.hpp"
#include "oracles.hpp"
#include "scenario.hpp"
#include "scripted_transport.hpp"

using namespace biaslens;
using namespace biaslens::eval;
using engine::GoldLabel;
using testing::ScriptedTransport;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::invalid_argument;
}

void write_lines(const std::filesystem::path& p, const std::vector<std::string>& lines) {
  std::ofstream out(p, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

// Twenty items whose only content word marks the gold leaning. The store
// holds that same word under the same leaning, so retrieval is perfectly
// aligned with the gold labels.
constexpr std::array<const char*, 3> kMarkers = {"leftish", "centrish", "rightish"};

LabeledDataset aligned_dataset() {
  LabeledDataset d;
  d.name = "aligned";
  for (std::size_t i = 0; i < 20; ++i) {
    auto l = kAllLeanings[i % 3];
    d.items.push_back({fmt::format("item-{:02}", i), fmt::format("Story {} is {}.", i, kMarkers[index_of(l)]),
                       l == Leaning::left ? GoldLabel::left
                                          : (l == Leaning::right ? GoldLabel::right : GoldLabel::neutral)});
  }
  return d;
}

store::VectorStore aligned_store() {
  store::VectorStore s(testing::kDimension, testing::kEmbeddingModel, "aligned");
  for (auto l : kAllLeanings) {
    for (int k = 0; k < 3; ++k) {
      s.add({fmt::format("{}-{}", kMarkers[index_of(l)], k), Category::tone_and_language, kMarkers[index_of(l)], l,
             8, "synthetic", Stage::final},
            testing::hash_embedding(kMarkers[index_of(l)], testing::kDimension));
    }
  }
  return s;
}

std::shared_ptr<ScriptedTransport> aligned_transport() {
  auto t = std::make_shared<ScriptedTransport>(testing::kDimension);
  t->on([](const std::string& prompt) -> std::optional<std::string> {
    if (prompt.find("and a DESCRIPTOR") != std::string::npos) return "[is]";
    for (auto l : kAllLeanings) {
      if (prompt.find(kMarkers[index_of(l)]) == std::string::npos) continue;
      if (prompt.find("summarize the bias indicator") != std::string::npos) {
        return fmt::format("Tone and Language - {} - {}", kMarkers[index_of(l)], to_string(l));
      }
      // The direct classifier always answers "left" except on right items.
      if (prompt.find("What is the political leaning") != std::string::npos) {
        return l == Leaning::right ? "Neutral." : "Left";
      }
    }
    return std::nullopt;
  });
  return t;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("load three labelled lines") {
    auto dir = testing::scratch_dir("eval-load");
    write_lines(dir / "d.jsonl", {R"({"id":"a","body":"x","label":"left"})", "",
                                  R"({"id":"b","text":"y","label":"Center"})", R"({"body":"z","label":"right"})"});
    auto d = load_dataset(dir / "d.jsonl", "d");
    REQUIRE(d.items.size() == 3);
    CHECK(d.items[1].gold == GoldLabel::neutral);
    CHECK(d.items[1].body == "y");
    CHECK_FALSE(d.items[2].id.empty());
    CHECK(d.scheme == LabelScheme::three_way);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("one corrupt line in two hundred is skipped") {
    auto dir = testing::scratch_dir("eval-corrupt");
    std::vector<std::string> lines;
    for (int i = 0; i < 200; ++i) {
      lines.push_back(i == 57 ? R"({"id": "broken", "body": )"
                              : fmt::format(R"({{"id":"n{}","body":"b","label":"pro"}})", i));
    }
    write_lines(dir / "d.jsonl", lines);
    auto d = load_dataset(dir / "d.jsonl", "d");
    CHECK(d.items.size() == 199);
    REQUIRE(d.errors.size() == 1);
    CHECK(d.errors[0].line == 58);
    CHECK(d.scheme == LabelScheme::tone);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("labels missing everywhere is a schema violation") {
    auto dir = testing::scratch_dir("eval-nolabel");
    write_lines(dir / "d.jsonl", {R"({"id":"a","body":"x"})", R"({"id":"b","body":"y"})"});
    CHECK(code_of([&] { (void)load_dataset(dir / "d.jsonl", "d"); }) == ErrorCode::schema_violation);
    CHECK(code_of([&] { (void)load_dataset(dir / "none.jsonl", "d"); }) == ErrorCode::io_error);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("field maps and aliases") {
    FieldMap f;
    f.body_fields = {"sentence"};
    f.label_field = "bias";
    f.label_aliases = {{"1", "biased"}, {"0", "non-biased"}};
    auto ok = parse_article_line(R"({"sentence":"s","bias":1})", 1, "fb", f, true);
    REQUIRE(std::holds_alternative<engine::Article>(ok));
    CHECK(std::get<engine::Article>(ok).gold == GoldLabel::biased);
    CHECK(std::get<engine::Article>(ok).id == "fb");
    auto bad = parse_article_line(R"({"sentence":"s","bias":"maybe"})", 4, "fb", f, false);
    REQUIRE(std::holds_alternative<LineError>(bad));
    CHECK(std::get<LineError>(bad).line == 4);
    auto unlabeled = parse_article_line(R"({"sentence":"s"})", 1, "fb", f, false);
    CHECK(std::holds_alternative<engine::Article>(unlabeled));
  }

  TEST_CASE("binary relabelling") {
    CHECK(to_binary(GoldLabel::left) == GoldLabel::biased);
    CHECK(to_binary(GoldLabel::neutral) == GoldLabel::non_biased);
    CHECK(to_binary(GoldLabel::pro) == GoldLabel::biased);
    CHECK(to_binary(GoldLabel::anti) == GoldLabel::biased);
    CHECK(binary_prediction(Leaning::right) == GoldLabel::biased);
    CHECK(binary_prediction(Leaning::neutral) == GoldLabel::non_biased);

    LabeledDataset d;
    d.items = {{"a", "x", GoldLabel::left}, {"b", "x", GoldLabel::neutral}, {"c", "x", GoldLabel::left}};
    auto r = relabel_binary(d);
    CHECK(r.dataset.scheme == LabelScheme::binary);
    REQUIRE(r.mapping.size() == 2);
    CHECK(r.mapping[0].from == GoldLabel::left);
    CHECK(r.mapping[0].count == 2);
    auto again = relabel_binary(r.dataset);
    for (std::size_t i = 0; i < d.items.size(); ++i) CHECK(again.dataset.items[i].gold == r.dataset.items[i].gold);

    d.items.push_back({"d", "x", std::nullopt});
    CHECK(code_of([&] { (void)relabel_binary(d); }) == ErrorCode::schema_violation);
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("hand-computed example") {
    auto m = compute_metrics({2, 1, 0, 1});
    CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(m.micro_f1 == doctest::Approx(0.75).epsilon(1e-12));
    // non-biased: P = 1/1, R = 1/2 -> F1 = 2/3
    CHECK(m.macro_f1 == doctest::Approx((0.8 + 2.0 / 3.0) / 2).epsilon(1e-12));
  }

  TEST_CASE("all correct is all ones") {
    auto m = compute_metrics({5, 0, 0, 5});
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.micro_f1 == 1.0);
    CHECK(m.macro_f1 == 1.0);
  }

  TEST_CASE("zero denominators are flagged") {
    auto m = compute_metrics({0, 0, 0, 4});
    CHECK(m.precision == 0.0);
    CHECK(m.precision_undefined);
    CHECK(m.recall_undefined);
    CHECK(m.f1 == 0.0);
    CHECK_FALSE(m.non_biased_precision_undefined);
    CHECK(code_of([] { (void)compute_metrics({}); }) == ErrorCode::empty_input);
  }

  TEST_CASE("published rows are internally consistent") {
    struct Row {
      double p, r, f1;
    };
    // Published precision, recall and F1 per dataset, in percent.
    for (auto row : {Row{62.9, 72.4, 67.3}, Row{35.2, 34.2, 34.7}, Row{66.4, 69.1, 67.7}, Row{86.4, 80.0, 83.1}}) {
      CHECK(f1_consistent(row.p, row.r, row.f1, 0.15));
      CHECK_FALSE(f1_consistent(row.p, row.r, row.f1 + 1.0, 0.15));
    }
    CHECK(f1_score(0.629, 0.724) == doctest::Approx(0.6732).epsilon(1e-3));
  }

  TEST_CASE("random matrices agree with the oracle") {
    oracle::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      ConfusionCounts c{oracle::pick(rng, 0, 5), oracle::pick(rng, 0, 5), oracle::pick(rng, 0, 5),
                        oracle::pick(rng, 0, 5)};
      if (c.total() == 0) continue;
      auto got = compute_metrics(c);
      auto want = oracle::metrics(c.tp, c.fp, c.fn, c.tn);
      CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
      CHECK(got.macro_f1 == doctest::Approx(want.macro).epsilon(1e-12));
      CHECK(got.precision_undefined == want.p_undef);
      CHECK(got.recall_undefined == want.r_undef);
    }
  }
}

TEST_SUITE("benchmark") {
  TEST_CASE("aligned store scores perfectly") {
    auto transport = aligned_transport();
    gateway::Gateway gw(testing::provider(gateway::GatewayMode::live), gateway::PromptLibrary::defaults(), transport);
    auto s = aligned_store();
    std::vector<LabeledDataset> data{aligned_dataset()};
    BenchmarkOptions opt;
    opt.m = 3;
    opt.parallelism = 3;
    auto r = run_benchmark(gw, data, &s, nullptr, opt);
    REQUIRE(r.datasets.size() == 1);
    const auto& d = r.datasets[0];
    CHECK(d.evaluated == 20);
    CHECK(d.failures.empty());
    CHECK(d.counts.tp == 13);
    CHECK(d.counts.tn == 7);
    CHECK(d.metrics.precision == 1.0);
    CHECK(d.metrics.recall == 1.0);
    CHECK(d.metrics.f1 == 1.0);
    CHECK(d.metrics.micro_f1 == 1.0);
    CHECK(d.metrics.macro_f1 == 1.0);

    auto table = render_table(r);
    CHECK(table.find("aligned") != std::string::npos);
    CHECK(table.find("100.0") != std::string::npos);
    CHECK(table.find("Precision") < table.find("Recall"));
    CHECK(table.find("Micro F1") < table.find("Macro F1"));
  }

  TEST_CASE("direct classification under replay is byte-deterministic") {
    auto dir = testing::scratch_dir("bench-replay");
    auto fixtures = dir / "zs.fixtures";
    std::vector<LabeledDataset> data{aligned_dataset()};
    BenchmarkOptions opt;
    opt.ablation.use_indicator_database = false;
    opt.ablation.use_strict_clustering = false;
    {
      gateway::Gateway rec(testing::provider(gateway::GatewayMode::record, fixtures),
                           gateway::PromptLibrary::defaults(), aligned_transport());
      (void)run_benchmark(rec, data, nullptr, nullptr, opt);
    }
    std::string first, second;
    for (auto* out : {&first, &second}) {
      gateway::Gateway replay(testing::provider(gateway::GatewayMode::replay, fixtures));
      opt.parallelism = out == &first ? 1 : 4;
      *out = to_json(run_benchmark(replay, data, nullptr, nullptr, opt)).dump(2);
    }
    CHECK(first == second);
    auto j = nlohmann::json::parse(first);
    // left items -> Left, neutral items -> Left (false positive), right items -> Neutral (miss)
    CHECK(j["datasets"][0]["counts"]["tp"] == 7);
    CHECK(j["datasets"][0]["counts"]["fp"] == 7);
    CHECK(j["datasets"][0]["counts"]["fn"] == 6);
    CHECK(j["datasets"][0]["counts"]["tn"] == 0);
    CHECK(j["ablation"]["use_indicator_database"] == false);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("preconditions") {
    gateway::Gateway gw(testing::provider(gateway::GatewayMode::live), gateway::PromptLibrary::defaults(),
                        aligned_transport());
    auto s = aligned_store();
    std::vector<LabeledDataset> none;
    CHECK(code_of([&] { (void)run_benchmark(gw, none, &s, nullptr, {}); }) == ErrorCode::invalid_argument);
    std::vector<LabeledDataset> data{aligned_dataset()};
    CHECK(code_of([&] { (void)run_benchmark(gw, data, nullptr, nullptr, {}); }) == ErrorCode::invalid_argument);
    BenchmarkOptions bad;
    bad.ablation.use_indicator_database = false;
    CHECK(code_of([&] { (void)run_benchmark(gw, data, &s, nullptr, bad); }) == ErrorCode::invalid_argument);
    BenchmarkOptions unclustered;
    unclustered.ablation.use_strict_clustering = false;
    CHECK(code_of([&] { (void)run_benchmark(gw, data, &s, nullptr, unclustered); }) == ErrorCode::invalid_argument);
  }

  TEST_CASE("too many item failures abort the run") {
    auto transport = std::make_shared<ScriptedTransport>(testing::kDimension);
    transport->on({"Story 0 "}, "Tone and Language - leftish - left");  // every other item has no script
    gateway::Gateway gw(testing::provider(gateway::GatewayMode::live), gateway::PromptLibrary::defaults(), transport);
    auto s = aligned_store();
    std::vector<LabeledDataset> data{aligned_dataset()};
    CHECK(code_of([&] { (void)run_benchmark(gw, data, &s, nullptr, {}); }) == ErrorCode::too_many_failures);
  }
}
