#include <doctest.h>

#include <thread>

#include <fmt/format.h>

#include "biaslens/engine/report.hpp"
#include "service_fixture.hpp"

using namespace biaslens;
using nlohmann::json;
using testing::ServiceFixture;

namespace {

std::string analyze_body(const std::string& body) { return json{{"body", body}}.dump(); }

std::string note_body(const std::string& note, const std::string& author = "") {
  json j{{"note", note}};
  if (!author.empty()) j["author"] = author;
  return j.dump();
}

json parse(const service::ApiResponse& r) { return json::parse(r.body); }

std::string analyzed_report(ServiceFixture& f) {
  auto r = f.service->analyze(analyze_body(testing::kBorderArticle));
  REQUIRE(r.status == 200);
  return parse(r)["report_id"];
}

}  // namespace

TEST_CASE("analyze returns a complete report") {
  ServiceFixture f("svc-analyze");
  auto r = f.service->analyze(json{{"body", testing::kBorderArticle}, {"id", "border"}}.dump());
  REQUIRE(r.status == 200);
  auto j = parse(r);
  CHECK(j["status"] == "complete");
  CHECK(j["report_id"] == "r000001");
  CHECK(j["report"]["id"] == "r000001");
  CHECK(j["report"]["article"]["id"] == "border");
  CHECK(j["report"]["prediction"]["label"] == "left");
  CHECK(j["report"]["descriptors"].size() == 3);
  CHECK(f.service->report("r000001").body == r.body);
}

TEST_CASE("analyze input errors") {
  ServiceFixture f("svc-bad");
  CHECK(f.service->analyze(analyze_body("   ")).status == 400);
  CHECK(f.service->analyze("not json").status == 400);
  CHECK(f.service->analyze(R"({"text": "wrong field"})").status == 400);
  CHECK(f.service->analyze(analyze_body(std::string(f.config.max_article_bytes + 1, 'a'))).status == 400);
  CHECK(f.service->analyze(std::string(R"({"body": "bad \udc80 surrogate"})")).status == 400);

  auto unseen = f.service->analyze(analyze_body(testing::kUnseenArticle));
  CHECK(unseen.status == 503);
  auto j = parse(unseen);
  CHECK(j["error"]["code"] == "replay_miss");
  CHECK(j["error"]["stage"] == "descriptor-generation");
  // The failed attempt is still on record.
  auto stored = parse(f.service->report("r000001"));
  CHECK(stored["status"] == "failed");
  CHECK(f.service->report("r999999").status == 404);
}

TEST_CASE("batch of three completes") {
  ServiceFixture f("svc-batch");
  auto r = f.service->submit_batch(testing::read_file(testing::fixture_dir() / "batch_ok.jsonl"));
  REQUIRE(r.status == 202);
  auto accepted = parse(r);
  CHECK(accepted["total"] == 3);
  CHECK(accepted["rejected"].empty());
  f.service->wait_idle();
  auto job = parse(f.service->job(accepted["job_id"]));
  CHECK(job["done"] == true);
  CHECK(job["failed"] == 0);
  REQUIRE(job["reports"].size() == 3);
  for (const auto& entry : job["reports"]) CHECK(entry["status"] == "complete");

  auto council = parse(f.service->report(job["reports"][2]["report_id"]));
  CHECK(council["report"]["no_descriptors"] == true);
  CHECK(council["report"]["prediction"]["label"] == "neutral");
  auto tariff = parse(f.service->report(job["reports"][1]["report_id"]));
  CHECK(tariff["report"]["article"]["id"] == "b-tariff");
  CHECK(f.service->job("job999999").status == 404);
}

TEST_CASE("a broken batch line fails alone") {
  ServiceFixture f("svc-partial");
  auto r = f.service->submit_batch(testing::read_file(testing::fixture_dir() / "batch_partial.jsonl"));
  REQUIRE(r.status == 202);
  auto accepted = parse(r);
  REQUIRE(accepted["rejected"].size() == 1);
  CHECK(accepted["rejected"][0]["line"] == 2);
  f.service->wait_idle();
  auto job = parse(f.service->job(accepted["job_id"]));
  CHECK(job["done"] == true);
  CHECK(job["failed"] == 1);
  CHECK(job["reports"][0]["status"] == "complete");
  CHECK(job["reports"][1]["status"] == "failed");
  CHECK(job["reports"][1]["error"].get<std::string>().rfind("line 2:", 0) == 0);
  CHECK(job["reports"][2]["status"] == "complete");
}

TEST_CASE("batch upload limits") {
  ServiceFixture f("svc-limits");
  CHECK(f.service->submit_batch(std::string("\x00\x01\x02", 3)).status == 400);
  CHECK(f.service->submit_batch("\xff\xfe binary").status == 400);
  CHECK(f.service->submit_batch("not json\nalso not json\n").status == 400);
  f.config.max_batch_lines = 2;
  f.restart();
  CHECK(f.service->submit_batch(testing::read_file(testing::fixture_dir() / "batch_ok.jsonl")).status == 413);
  f.config.max_batch_bytes = 10;
  f.restart();
  CHECK(f.service->submit_batch(testing::read_file(testing::fixture_dir() / "batch_ok.jsonl")).status == 413);
}

TEST_CASE("notes are append-only and ordered") {
  ServiceFixture f("svc-notes");
  auto id = analyzed_report(f);
  auto r = f.service->add_note(id, note_body("Second descriptor overstates it.", "ana"));
  REQUIRE(r.status == 200);
  auto notes = parse(r)["report"]["notes"];
  REQUIRE(notes.size() == 1);
  CHECK(notes[0]["author"] == "ana");
  CHECK(notes[0]["note"] == "Second descriptor overstates it.");

  for (int i = 0; i < 3; ++i) REQUIRE(f.service->add_note(id, note_body(fmt::format("n{}", i))).status == 200);
  notes = parse(f.service->report(id))["report"]["notes"];
  REQUIRE(notes.size() == 4);
  CHECK(notes[1]["author"] == "anonymous");
  for (std::size_t i = 1; i < notes.size(); ++i) {
    CHECK(notes[i - 1]["timestamp"].get<std::string>() <= notes[i]["timestamp"].get<std::string>());
    CHECK(notes[i]["note"] == fmt::format("n{}", i - 1));
  }
  // Descriptors and prediction are untouched.
  CHECK(parse(f.service->report(id))["report"]["descriptors"].size() == 3);

  CHECK(f.service->add_note("r999999", note_body("x")).status == 404);
  CHECK(f.service->add_note(id, note_body("  ")).status == 400);
  CHECK(f.service->add_note(id, "{}").status == 400);

  (void)f.service->analyze(analyze_body(testing::kUnseenArticle));
  auto failed_id = fmt::format("r{:06}", 2);
  CHECK(f.service->add_note(failed_id, note_body("x")).status == 409);
  CHECK(f.service->download(failed_id).status == 409);
}

TEST_CASE("concurrent notes all land") {
  ServiceFixture f("svc-concurrent");
  auto id = analyzed_report(f);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) CHECK(f.service->add_note(id, note_body(fmt::format("t{}-{}", t, i))).status == 200);
    });
  }
  threads.clear();
  auto notes = parse(f.service->report(id))["report"]["notes"];
  CHECK(notes.size() == 20);
}

TEST_CASE("download is stable and complete") {
  ServiceFixture f("svc-download");
  auto id = analyzed_report(f);
  REQUIRE(f.service->add_note(id, note_body("Worth a second look.", "lee")).status == 200);
  auto a = f.service->download(id);
  auto b = f.service->download(id);
  REQUIRE(a.status == 200);
  CHECK(a.body == b.body);
  auto doc = json::parse(a.body);
  CHECK(doc["format"] == "biaslens-report/1");
  for (const auto& d : parse(f.service->report(id))["report"]["descriptors"]) {
    CHECK(a.body.find(d["text"].get<std::string>()) != std::string::npos);
  }
  CHECK(a.body.find("Worth a second look.") != std::string::npos);
  CHECK(f.service->download("r999999").status == 404);
}

TEST_CASE("custom mapping") {
  ServiceFixture f("svc-mapping");
  auto call = [&](const testing::CustomMapping& m) {
    return f.service->mapping(json{{"descriptor", m.descriptor}, {"article", testing::kBorderArticle}}.dump());
  };
  auto one = call(testing::kCustomMappings[0]);
  REQUIRE(one.status == 200);
  auto j = parse(one);
  REQUIRE(j["spans"].size() == 1);
  CHECK(j["spans"][0]["text"] == "tarring Mexican migrants as rapists");

  auto none = parse(call(testing::kCustomMappings[1]));
  CHECK(none["spans"].empty());
  CHECK(none["unmatched_phrases"].size() == 1);

  auto merged = parse(call(testing::kCustomMappings[2]));
  CHECK(merged["spans"].size() == 1);

  CHECK(f.service->mapping(json{{"descriptor", ""}, {"article", "x"}}.dump()).status == 400);
  auto miss = f.service->mapping(json{{"descriptor", "never recorded"}, {"article", "x"}}.dump());
  CHECK(miss.status == 503);
  CHECK(parse(miss)["error"]["stage"] == "mapping");
}

TEST_CASE("reports survive a restart byte for byte") {
  ServiceFixture f("svc-restart");
  auto id = analyzed_report(f);
  REQUIRE(f.service->add_note(id, note_body("kept")).status == 200);
  auto before = f.service->download(id).body;
  f.restart();
  CHECK(f.service->download(id).body == before);
  CHECK(parse(f.service->health())["reports"] == 1);
  // New ids continue after the persisted ones.
  CHECK(parse(f.service->analyze(analyze_body(testing::kTariffArticle)))["report_id"] == "r000002");
}

TEST_CASE("health and tokens") {
  ServiceFixture f("svc-health", "s3cret");
  auto h = parse(f.service->health());
  CHECK(h["status"] == "ok");
  CHECK(h["mode"] == "replay");
  CHECK(h["store"]["leaning_counts"]["left"] == 6);
  CHECK(f.service->token_required());
  CHECK(f.service->authorized("s3cret"));
  CHECK(f.service->authorized("Bearer s3cret"));
  CHECK_FALSE(f.service->authorized("Bearer nope"));
  CHECK_FALSE(f.service->authorized(""));
}

TEST_CASE("status mapping") {
  CHECK(service::http_status_for(ErrorCode::empty_input) == 400);
  CHECK(service::http_status_for(ErrorCode::replay_miss) == 503);
  CHECK(service::http_status_for(ErrorCode::transport_failure) == 503);
  CHECK(service::http_status_for(ErrorCode::io_error) == 500);
}
