#include <filesystem>
#include <fstream>
#include <set>

#include "delib/annotate/client.hpp"
#include "delib/error.hpp"
#include "doctest.h"

using namespace delib;
using namespace delib::annotate;
namespace fs = std::filesystem;

namespace {

std::shared_ptr<const Rubric> stance_rubric(const std::vector<std::string>& agendas) {
  auto r = default_rubric(Dimension::Stance, "mock-model");
  for (const auto& a : agendas)
    for (std::size_t k = 0; k < kStanceFewShotsPerAgenda; ++k)
      r.few_shots[a].push_back({a, "example " + std::to_string(k) + " on " + a, int(k % 3), "because"});
  return std::make_shared<const Rubric>(std::move(r));
}

RubricSet rubrics(const std::vector<std::string>& agendas) {
  return {std::make_shared<const Rubric>(default_rubric(Dimension::Novelty, "mock-model")),
          std::make_shared<const Rubric>(default_rubric(Dimension::Justification, "mock-model")),
          stance_rubric(agendas)};
}

std::vector<Statement> corpus(std::size_t n) {
  std::vector<Statement> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"s" + std::to_string(i), "r" + std::to_string(i % 4), "a" + std::to_string(i % 2),
                   "p" + std::to_string(i % 7), long(i / 8 + 1), "statement number " + std::to_string(i)});
  }
  return out;
}

struct FakeClock {
  std::vector<std::chrono::milliseconds> waits;
  Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { waits.push_back(d); };
  }
};

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "delib_test_annotate";
  fs::create_directories(dir);
  const auto p = dir / name;
  fs::remove(p);
  return p;
}

}  // namespace

TEST_CASE("prompts are deterministic and carry prior context in order") {
  const Statement target{"s4", "r1", "a1", "p1", 4, "the target statement"};
  std::vector<Statement> prior;
  for (long k = 1; k <= 3; ++k) prior.push_back({"s" + std::to_string(k), "r1", "a1", "p2", k, "earlier " + std::to_string(k)});
  AnnotationRequest req{target, std::make_shared<const Rubric>(default_rubric(Dimension::Novelty)), prior};
  const auto p = build_prompt(req);
  CHECK(p == build_prompt(req));
  const auto a = p.find("earlier 1"), b = p.find("earlier 2"), c = p.find("earlier 3"), t = p.find("the target statement");
  REQUIRE(a != std::string::npos);
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < t);
  CHECK(p.find("RATING:") != std::string::npos);

  PromptOptions tight;
  tight.context_token_budget = 8;
  const auto trimmed = build_prompt(req, tight);
  CHECK(trimmed.find("earlier 1") == std::string::npos);
  CHECK(trimmed.find("omitted") != std::string::npos);
}

TEST_CASE("stance prompts need exactly the agenda's few-shots") {
  const Statement s{"s1", "r1", "a9", "p1", 1, "text"};
  AnnotationRequest req{s, stance_rubric({"a1"}), {}};
  try {
    build_prompt(req);
    FAIL("expected MissingFewShots");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFewShots);
  }
  req.rubric = stance_rubric({"a9"});
  const auto p = build_prompt(req);
  for (std::size_t k = 0; k < kStanceFewShotsPerAgenda; ++k) CHECK(p.find("example " + std::to_string(k) + " on a9") != std::string::npos);
}

TEST_CASE("response parsing") {
  const auto stance = default_rubric(Dimension::Stance);
  const auto ok = parse_response("RATING: 2\nRATIONALE: supports the proposal", stance);
  REQUIRE(ok.label);
  CHECK(*ok.label == 2);
  CHECK(ok.rationale == "supports the proposal");
  const auto out = parse_response("RATING: 7\nRATIONALE: x", stance);
  CHECK_FALSE(out.label);
  CHECK_FALSE(out.problem.empty());
  CHECK_FALSE(parse_response("I cannot decide", stance).label);
  CHECK(*parse_response("rating:  4", default_rubric(Dimension::Justification)).label == 4);
}

TEST_CASE("few-shot files parse and reject malformed entries") {
  const auto m = parse_few_shots(R"([{"agenda_id":"a1","statement":"x","label":2,"rationale":"r"}])");
  CHECK(m.at("a1").size() == 1);
  CHECK_THROWS_AS(parse_few_shots(R"([{"agenda_id":"a1"}])"), Error);
  CHECK_THROWS_AS(parse_few_shots("{"), Error);
}

TEST_CASE("retry delays follow the exponential policy with a cap") {
  RetryPolicy p;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.multiplier = 3.0;
  p.max_backoff = std::chrono::milliseconds(2000);
  CHECK(p.delay(1).count() == 100);
  CHECK(p.delay(2).count() == 300);
  CHECK(p.delay(3).count() == 900);
  CHECK(p.delay(4).count() == 2000);
}

TEST_CASE("a cache hit makes no transport call") {
  MockTransport mock;
  AnnotationCache cache;
  FakeClock clock;
  Annotator ann(mock, cache, {}, clock.sleeper());
  AnnotationRequest req{{"s1", "r1", "a1", "p1", 1, "hello"}, std::make_shared<const Rubric>(default_rubric(Dimension::Justification, "m")), {}};
  const auto first = ann.annotate(req);
  CHECK(mock.calls() == 1);
  CHECK_FALSE(first.from_cache);
  const auto second = ann.annotate(req);
  CHECK(mock.calls() == 1);
  CHECK(second.from_cache);
  CHECK(second.label == first.label);
  CHECK(ann.cache_hits() == 1);
}

TEST_CASE("transient failures are retried with backoff, permanent ones are not") {
  MockTransport mock;
  AnnotationCache cache;
  FakeClock clock;
  ClientConfig cfg;
  cfg.retry.initial_backoff = std::chrono::milliseconds(10);
  Annotator ann(mock, cache, cfg, clock.sleeper());
  auto rubric = std::make_shared<const Rubric>(default_rubric(Dimension::Novelty, "m"));
  mock.inject_failures(2);
  const auto r = ann.annotate({{"s1", "r1", "a1", "p1", 1, "x"}, rubric, {}});
  CHECK(r.attempts == 3);
  REQUIRE(clock.waits.size() == 2);
  CHECK(clock.waits[0].count() == 10);
  CHECK(clock.waits[1].count() == 20);
  CHECK(ann.retry_log().size() == 2);

  mock.inject_failures(10);
  try {
    ann.annotate({{"s2", "r1", "a1", "p1", 2, "y"}, rubric, {}});
    FAIL("expected TransportExhausted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TransportExhausted);
  }
  CHECK(mock.calls() == 3 + cfg.retry.max_attempts);

  MockTransport perm;
  perm.set_permanent_failure(true);
  Annotator ann2(perm, cache, cfg, clock.sleeper());
  CHECK_THROWS_AS(ann2.annotate({{"s3", "r1", "a1", "p1", 3, "z"}, rubric, {}}), Error);
  CHECK(perm.calls() == 1);
}

TEST_CASE("corpus annotation: three calls per statement, reruns hit the cache") {
  const auto st = corpus(3);
  const auto rs = rubrics({"a0", "a1"});
  MockTransport mock;
  AnnotationCache cache;
  FakeClock clock;
  Annotator ann(mock, cache, {}, clock.sleeper());
  const auto first = annotate_corpus(st, rs, ann, 2);
  CHECK(first.transport_calls == 9);
  CHECK(first.annotations.size() == 3);
  CHECK(first.failures.empty());
  const auto second = annotate_corpus(st, rs, ann, 2);
  CHECK(second.transport_calls == 0);
  CHECK(second.cache_hits == 9);
  CHECK(to_json(first).dump() == to_json(second).dump());
}

TEST_CASE("property: corpus output does not depend on concurrency") {
  const auto st = corpus(24);
  const auto rs = rubrics({"a0", "a1"});
  std::set<std::string> dumps;
  for (std::size_t threads : {1, 3, 8}) {
    MockTransport mock;
    AnnotationCache cache;
    FakeClock clock;
    Annotator ann(mock, cache, {}, clock.sleeper());
    dumps.insert(to_json(annotate_corpus(st, rs, ann, threads)).dump());
  }
  CHECK(dumps.size() == 1);
}

TEST_CASE("unparseable replies and missing few-shots land in the failure manifest") {
  auto st = corpus(2);
  st[1].agenda_id = "unknown";
  MockTransport mock([](const ChatRequest& r) {
    return r.prompt.find("statement number 0") != std::string::npos && r.prompt.find("0 to 2") != std::string::npos
               ? std::string("no rating here")
               : MockTransport::hashed_rating(r);
  });
  AnnotationCache cache;
  FakeClock clock;
  Annotator ann(mock, cache, {}, clock.sleeper());
  const auto res = annotate_corpus(st, rubrics({"a0"}), ann, 2);
  std::set<std::string> codes;
  for (const auto& f : res.failures) codes.insert(f.code);
  CHECK(codes.count("MissingFewShots") == 1);
  CHECK(codes.count("Unparseable") == 1);
  CHECK(res.annotations.empty());
}

TEST_CASE("the JSONL cache reloads and skips torn lines") {
  const auto path = temp_path("cache.jsonl");
  const auto st = corpus(4);
  const auto rs = rubrics({"a0", "a1"});
  {
    MockTransport mock;
    AnnotationCache cache(path);
    FakeClock clock;
    Annotator ann(mock, cache, {}, clock.sleeper());
    CHECK(annotate_corpus(st, rs, ann, 2).transport_calls == 12);
  }
  { std::ofstream(path, std::ios::app) << "{\"key\": \"abc\", \"raw_resp"; }
  MockTransport mock;
  AnnotationCache cache(path);
  CHECK(cache.size() == 12);
  CHECK(cache.skipped_lines() == 1);
  FakeClock clock;
  Annotator ann(mock, cache, {}, clock.sleeper());
  CHECK(annotate_corpus(st, rs, ann, 2).transport_calls == 0);
  CHECK(cache_key("p", "m") != cache_key("p", "m2"));
  CHECK(cache_key("ab", "c") != cache_key("a", "bc"));
}

TEST_CASE("an unwritable cache path fails with CacheWrite") {
  try {
    AnnotationCache cache(fs::path("/proc/definitely/not/here.jsonl"));
    FAIL("expected CacheWrite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CacheWrite);
  }
}
