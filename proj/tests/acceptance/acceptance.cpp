// Acceptance suite: one PASS/FAIL line per criterion, each checked against
// its tolerance and time budget. Exit status is non-zero if any fails.

#include <chrono>
#include <iostream>
#include <set>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "biaslens/engine/engine.hpp"
#include "biaslens/engine/report.hpp"
#include "biaslens/eval/metrics.hpp"
#include "biaslens/forge/clustering.hpp"
#include "biaslens/forge/pipeline.hpp"
#include "biaslens/service/http_server.hpp"
#include "oracles.hpp"
#include "scenario.hpp"
#include "service_fixture.hpp"

using namespace biaslens;
using oracle::Rng;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

/// Collects failed expectations of one criterion.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, std::string what) {
    if (!ok && failures.size() < 5) failures.push_back(std::move(what));
  }
};

struct Criterion {
  int number;
  std::string title;
  double budget_seconds;
  std::function<void(Check&)> body;
};

// ---- 1 ----------------------------------------------------------------------

void table_consistency(Check& c) {
  struct Row {
    const char* dataset;
    double p, r, f1;
  };
  for (auto row : {Row{"FlipBias", 62.9, 72.4, 67.3}, Row{"BASIL", 35.2, 34.2, 34.7},
                   Row{"BABE", 66.4, 69.1, 67.7}, Row{"MFC", 86.4, 80.0, 83.1}}) {
    double derived = 100.0 * eval::f1_score(row.p / 100.0, row.r / 100.0);
    c.expect(std::abs(derived - row.f1) <= 0.15 && eval::f1_consistent(row.p, row.r, row.f1, 0.15),
             fmt::format("{}: F1 {:.3f} vs printed {}", row.dataset, derived, row.f1));
  }
}

// ---- 2 ----------------------------------------------------------------------

void vector_search(Check& c) {
  Rng rng(20240301);
  store::VectorStore s(64, "random", "acceptance");
  std::vector<std::pair<std::string, Embedding>> entries;
  for (std::size_t i = 0; i < 1000; ++i) {
    auto v = oracle::random_vector(rng, 64);
    s.add({oracle::padded_id(i), Category::tone_and_language, "t", kAllLeanings[i % 3], 7, "s", Stage::final}, v);
    entries.emplace_back(oracle::padded_id(i), std::move(v));
  }
  for (int q = 0; q < 100; ++q) {
    auto query = oracle::random_vector(rng, 64);
    std::vector<std::string> got;
    for (const auto& m : s.top_m_query(query, 5)) got.push_back(m.indicator_id);
    c.expect(got == oracle::brute_force_top_m(entries, query, 5), fmt::format("query {} differs", q));
  }
}

// ---- 3 ----------------------------------------------------------------------

void clustering(Check& c) {
  Rng rng(7);
  std::size_t with_merges = 0, with_splits = 0;
  for (int inst = 0; inst < 200; ++inst) {
    auto n = oracle::pick(rng, 10, 200);
    auto dim = oracle::pick(rng, 2, 32);
    // Spread alpha around the typical pairwise distance sqrt(2 dim).
    auto alpha = oracle::uniform(rng, 0.1, 1.6) * std::sqrt(2.0 * static_cast<double>(dim));
    std::vector<IndicatorRecord> records;
    std::vector<Embedding> vecs;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({oracle::padded_id(i), Category::tone_and_language, "t", Leaning::left, 7, "s",
                         Stage::verified});
      vecs.push_back(oracle::random_vector(rng, dim));
    }
    auto clusters = forge::cluster_indicators(records, vecs, {alpha, false});
    std::set<std::string> seen;
    double diameter = 0;
    for (const auto& cl : clusters) {
      for (std::size_t a = 0; a < cl.member_ids.size(); ++a) {
        c.expect(seen.insert(cl.member_ids[a]).second, fmt::format("instance {}: id twice", inst));
        for (std::size_t b = a + 1; b < cl.member_ids.size(); ++b) {
          diameter = std::max(diameter, oracle::distance(vecs[std::stoul(cl.member_ids[a].substr(2))],
                                                         vecs[std::stoul(cl.member_ids[b].substr(2))]));
        }
      }
    }
    c.expect(diameter <= alpha, fmt::format("instance {}: diameter {} > alpha {}", inst, diameter, alpha));
    c.expect(seen.size() == n, fmt::format("instance {}: not a partition", inst));
    with_merges += clusters.size() < n;
    with_splits += clusters.size() > 1;
  }
  // Guard against a degenerate alpha range that never exercises merging.
  c.expect(with_merges > 50 && with_splits > 50,
           fmt::format("only {} instances merged and {} split", with_merges, with_splits));

  std::vector<IndicatorRecord> records;
  for (const char* id : {"a", "b", "c"}) {
    records.push_back({id, Category::tone_and_language, "t", Leaning::left, 7, "s", Stage::verified});
  }
  std::vector<Embedding> line{{0.0f}, {0.1f}, {5.0f}};
  auto clusters = forge::cluster_indicators(records, line, {0.5, false});
  c.expect(clusters.size() == 2 && clusters[0].member_ids == std::vector<std::string>{"a", "b"} &&
               clusters[1].member_ids == std::vector<std::string>{"c"},
           "{0, 0.1, 5.0} at alpha 0.5 is not {0, 0.1}, {5.0}");
}

// ---- 4 ----------------------------------------------------------------------

void voting(Check& c) {
  Rng rng(99);
  std::size_t forced_vote_ties = 0, forced_mass_ties = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::pair<Leaning, double>> pool;
    int mode = i % 4;  // 0, 1: random; 2: vote tie; 3: vote and mass tie
    if (mode < 2) {
      for (std::size_t k = oracle::pick(rng, 1, 25); k > 0; --k) {
        pool.emplace_back(kAllLeanings[oracle::pick(rng, 0, 2)], oracle::uniform(rng, -1, 1));
      }
    } else {
      auto a = kAllLeanings[oracle::pick(rng, 0, 2)];
      auto b = kAllLeanings[(index_of(a) + oracle::pick(rng, 1, 2)) % 3];
      auto k = oracle::pick(rng, 1, 6);
      for (std::size_t j = 0; j < k; ++j) {
        // Quarter-steps are exact in binary, so equal masses stay equal.
        double s = static_cast<double>(oracle::pick(rng, 0, 4)) / 4.0;
        pool.emplace_back(a, s);
        pool.emplace_back(b, mode == 3 ? s : oracle::uniform(rng, 0, 1));
      }
      // A third leaning with fewer votes may tag along.
      auto other = kAllLeanings[3 - index_of(a) - index_of(b)];
      for (std::size_t j = oracle::pick(rng, 0, k - 1); j > 0; --j) pool.emplace_back(other, oracle::uniform(rng, 0, 1));
      std::shuffle(pool.begin(), pool.end(), rng);
    }

    // Scatter the pool over a few descriptors.
    std::vector<engine::DescriptorMatchSet> sets(oracle::pick(rng, 1, 4));
    for (std::size_t k = 0; k < pool.size(); ++k) {
      sets[k % sets.size()].matches.push_back(
          {oracle::padded_id(k), pool[k].second, pool[k].first, Category::tone_and_language, "t"});
    }
    std::erase_if(sets, [](const auto& s) { return s.matches.empty(); });

    auto want = oracle::count_votes(pool);
    auto got = engine::predict_bias(sets);
    c.expect(got.label == want.label && got.votes == want.votes && got.tie_broken == want.tie_broken,
             fmt::format("pool {}: got {} want {}", i, to_string(got.label), to_string(want.label)));
    if (mode == 2) forced_vote_ties += got.tie_broken;
    if (mode == 3) {
      ++forced_mass_ties;
      c.expect(got.label == Leaning::neutral && got.tie_broken, fmt::format("pool {}: mass tie not neutral", i));
    }
  }
  c.expect(forced_vote_ties == 250 && forced_mass_ties == 250, "forced tie cases were not generated");
}

// ---- 5 ----------------------------------------------------------------------

void end_to_end(Check& c) {
  auto s = store::VectorStore::load(testing::fixture_dir() / "sample_store.blvs");
  auto counts = s.leaning_counts();
  c.expect(counts[0] > counts[1] + counts[2], "sample store is not left-dominated");
  gateway::Gateway gw(testing::provider(gateway::GatewayMode::replay, testing::fixture_dir() / "engine.fixtures"));
  engine::AnalysisEngine eng(gw, s, {}, testing::ticking_clock());
  engine::Article a{"case-study", testing::kBorderArticle, std::nullopt};

  auto first = eng.analyze_article(a);
  auto second = eng.analyze_article(a);
  c.expect(first.prediction.label == Leaning::left, "label is not left");
  bool negative = std::any_of(first.descriptors.begin(), first.descriptors.end(),
                              [](const auto& d) { return d.text.find("negative") != std::string::npos; });
  c.expect(negative, "no descriptor mentions 'negative'");
  auto len = text::utf8_length(a.body);
  bool span_inside = false;
  for (const auto& m : first.mappings) {
    for (const auto& sp : m.spans) span_inside |= sp.start < sp.end && sp.end <= len;
  }
  c.expect(span_inside, "no span inside the body");
  c.expect(first.created_at != second.created_at, "clock did not advance");
  for (auto* r : {&first, &second}) {
    r->id.clear();
    r->created_at.clear();
  }
  c.expect(engine::serialize_report(first) == engine::serialize_report(second), "runs differ beyond timestamps");
}

// ---- 6 ----------------------------------------------------------------------

void forge_counts(Check& c) {
  auto dir = testing::scratch_dir("acceptance-forge");
  auto build = [&](double alpha, const fs::path& out) {
    gateway::Gateway gw(testing::provider(gateway::GatewayMode::replay, testing::fixture_dir() / "forge.fixtures"));
    forge::BuildOptions opt;
    opt.cluster.alpha = alpha;
    return forge::build_database(gw, testing::fixture_dir() / "forge_corpus.jsonl", opt, out);
  };
  auto mid = build(0.5, dir / "mid.blvs");
  c.expect(mid.final_count <= mid.verified_count && mid.verified_count <= mid.raw_count,
           fmt::format("counts {} / {} / {} out of order", mid.final_count, mid.verified_count, mid.raw_count));
  auto tight = build(1e-9, dir / "tight.blvs");
  c.expect(tight.final_count == tight.verified_count, "alpha -> 0 does not keep every verified indicator");
  auto loose = build(1e9, dir / "loose.blvs");
  c.expect(loose.final_count == 1, "alpha -> infinity does not give one indicator");

  auto loaded = store::VectorStore::load(dir / "mid.blvs");
  loaded.save(dir / "again.blvs");
  c.expect(testing::read_file(dir / "mid.blvs") == testing::read_file(dir / "again.blvs"),
           "load(save()) is not byte-stable");
  c.expect(loaded.size() == mid.final_count, "stored entry count differs from the summary");
  fs::remove_all(dir);
}

// ---- 7 ----------------------------------------------------------------------

void metrics(Check& c) {
  Rng rng(2718);
  std::size_t flagged = 0;
  for (int i = 0; i < 1000; ++i) {
    // Every fifth matrix zeroes one or two cells to hit the undefined ratios.
    std::array<std::uint64_t, 4> cells{};
    for (auto& x : cells) x = oracle::pick(rng, 0, 1000);
    if (i % 5 == 0) cells[oracle::pick(rng, 0, 3)] = 0;
    if (i % 10 == 0) {
      cells[oracle::pick(rng, 0, 1)] = 0;
      cells[2] = 0;
    }
    if (cells[0] + cells[1] + cells[2] + cells[3] == 0) cells[3] = 1;
    auto got = eval::compute_metrics({cells[0], cells[1], cells[2], cells[3]});
    auto want = oracle::metrics(cells[0], cells[1], cells[2], cells[3]);
    bool ok = std::abs(got.precision - want.precision) <= 1e-9 && std::abs(got.recall - want.recall) <= 1e-9 &&
              std::abs(got.f1 - want.f1) <= 1e-9 && std::abs(got.micro_f1 - want.micro) <= 1e-9 &&
              std::abs(got.macro_f1 - want.macro) <= 1e-9 && got.precision_undefined == want.p_undef &&
              got.recall_undefined == want.r_undef;
    c.expect(ok, fmt::format("matrix {} {} {} {}", cells[0], cells[1], cells[2], cells[3]));
    flagged += want.p_undef || want.r_undef;
  }
  c.expect(flagged > 0, "no zero-denominator case was exercised");
}

// ---- 8 ----------------------------------------------------------------------

void service_contract(Check& c) {
  testing::ServiceFixture f("acceptance-service");
  service::HttpServer server(*f.service);
  int port = server.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(10, 0);
  auto status = [](const httplib::Result& r) { return r ? r->status : -1; };

  auto analyzed = client.Post("/analyze", json{{"body", testing::kBorderArticle}}.dump(), "application/json");
  c.expect(status(analyzed) == 200, "analyze did not return 200");
  std::string id = analyzed ? json::parse(analyzed->body).value("report_id", "") : "";
  c.expect(analyzed && json::parse(analyzed->body)["report"]["prediction"]["label"] == "left", "analyze label");
  c.expect(status(client.Post("/analyze", R"({"body": ""})", "application/json")) == 400, "empty body not 400");

  // Batch with one malformed line in the middle.
  auto batch = client.Post("/analyze/batch", testing::read_file(testing::fixture_dir() / "batch_partial.jsonl"),
                           "application/x-ndjson");
  c.expect(status(batch) == 202, "batch not accepted");
  if (batch && batch->status == 202) {
    f.service->wait_idle();
    auto job = json::parse(client.Get("/jobs/" + json::parse(batch->body)["job_id"].get<std::string>())->body);
    c.expect(job["done"] == true && job["failed"] == 1 && job["reports"][0]["status"] == "complete" &&
                 job["reports"][1]["status"] == "failed" && job["reports"][2]["status"] == "complete",
             "batch failure was not isolated to the bad line");
  }

  // Notes only ever append.
  std::vector<std::string> texts{"first", "second", "third"};
  for (const auto& t : texts) {
    c.expect(status(client.Post("/report/" + id + "/notes", json{{"note", t}}.dump(), "application/json")) == 200,
             "note rejected");
  }
  auto notes = json::parse(client.Get("/report/" + id)->body)["report"]["notes"];
  bool ordered = notes.size() == texts.size();
  for (std::size_t i = 0; ordered && i < texts.size(); ++i) ordered = notes[i]["note"] == texts[i];
  c.expect(ordered, "notes are not appended in order");
  c.expect(status(client.Post("/report/r999999/notes", R"({"note": "x"})", "application/json")) == 404,
           "note on unknown report not 404");

  auto d1 = client.Get("/report/" + id + "/download");
  auto d2 = client.Get("/report/" + id + "/download");
  c.expect(status(d1) == 200 && status(d2) == 200 && d1->body == d2->body, "downloads differ");
  c.expect(d1 && d1->body.find("third") != std::string::npos, "download lacks the notes");

  auto mapped = client.Post("/mapping",
                            json{{"descriptor", testing::kCustomMappings[0].descriptor},
                                 {"article", testing::kBorderArticle}}
                                .dump(),
                            "application/json");
  c.expect(status(mapped) == 200 && json::parse(mapped->body)["spans"].size() == 1, "custom mapping");
  server.stop();
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  std::vector<Criterion> criteria{
      {1, "published F1 equals the harmonic mean of P and R within 0.15 pp", 1.0, table_consistency},
      {2, "top-m search equals brute force on 1000 x 64-d vectors, 100 queries", 5.0, vector_search},
      {3, "200 random clustering instances respect alpha and partition", 30.0, clustering},
      {4, "voting equals the counting oracle on 1000 pools with forced ties", 5.0, voting},
      {5, "replayed case-study paragraph is left, deterministic, with spans", 10.0, end_to_end},
      {6, "offline pipeline counts, alpha limits and byte-stable store", 10.0, forge_counts},
      {7, "metrics equal the oracle on 1000 confusion matrices within 1e-9", 2.0, metrics},
      {8, "service contract over HTTP", 30.0, service_contract},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > cr.budget_seconds) {
      check.failures.push_back(fmt::format("took {:.2f} s, budget {:.0f} s", seconds, cr.budget_seconds));
    }
    bool ok = check.failures.empty();
    failed += !ok;
    std::cout << fmt::format("{} criterion {}: {} ({:.3f} s)", ok ? "PASS" : "FAIL", cr.number, cr.title, seconds);
    if (!ok) std::cout << " -- " << fmt::format("{}", fmt::join(check.failures, "; "));
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
