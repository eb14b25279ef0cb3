#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "delib/csv.hpp"
#include "delib/error.hpp"
#include "delib/survey.hpp"
#include "delib/transcript.hpp"
#include "doctest.h"

using namespace delib;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected delib::Error");
  return ErrorCode::EmptyInput;
}

const char* kHeader = "participant_id,item_id,phase,value\n";

}  // namespace

TEST_CASE("csv handles quotes, embedded newlines and CRLF") {
  const auto t = csv::parse("a,b\r\n\"x, y\",\"line1\nline2\"\r\n\"he said \"\"hi\"\"\",2\r\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].fields[0] == "x, y");
  CHECK(t.rows[0].fields[1] == "line1\nline2");
  CHECK(t.rows[1].fields[0] == "he said \"hi\"");
  CHECK(t.rows[1].line == 4);
  CHECK(code_of([] { csv::parse("a,b\n1,2,3\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { csv::parse("a,b\n\"open,2\n"); }) == ErrorCode::MalformedRow);
}

TEST_CASE("csv escape round-trips through parse") {
  for (std::string field : {"plain", "with,comma", "with \"quote\"", "multi\nline", ""}) {
    std::ostringstream out;
    csv::write_row(out, {"h"});
    csv::write_row(out, {field});
    const auto t = csv::parse(out.str());
    REQUIRE(t.rows.size() == (field.empty() ? 0u : 1u));
    if (!field.empty()) CHECK(t.rows[0].fields[0] == field);
  }
}

TEST_CASE("survey rows parse to records") {
  const auto r = parse_surveys(std::string(kHeader) + "p1,q1,pre,7\np1,q2,pre,NA\n");
  REQUIRE(r.size() == 2);
  CHECK(r[0].participant_id == "p1");
  CHECK(r[0].item_id == "q1");
  CHECK(r[0].phase == Phase::Pre);
  CHECK(r[0].value.has_opinion());
  CHECK(r[0].value.score() == 7);
  CHECK_FALSE(r[1].value.has_opinion());
}

TEST_CASE("survey validation errors") {
  CHECK(code_of([] { parse_surveys(std::string(kHeader) + "p1,q1,pre,11\n"); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { parse_surveys(std::string(kHeader) + "p1,q1,pre,-1\n"); }) == ErrorCode::OutOfRange);
  CHECK(code_of([] { parse_surveys(std::string(kHeader) + "p1,q1,pre,na\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_surveys(std::string(kHeader) + "p1,q1,during,3\n"); }) == ErrorCode::MalformedRow);
  CHECK(code_of([] { parse_surveys(""); }) == ErrorCode::MalformedRow);
  try {
    parse_surveys(std::string(kHeader) + "p1,q1,pre,1\np2,q1,pre,x\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  auto dup = parse_surveys(std::string(kHeader) + "p1,q1,pre,1\np1,q1,pre,2\n");
  CHECK(code_of([&] { validate_unique(dup); }) == ErrorCode::DuplicateKey);
}

TEST_CASE("listwise deletion per item") {
  const auto recs = parse_surveys(std::string(kHeader) +
                                  "p1,q1,pre,3\np1,q1,post,5\np2,q1,pre,NA\np2,q1,post,4\np3,q1,post,6\n"
                                  "a,q2,pre,1\na,q2,post,1\nb,q2,pre,2\nb,q2,post,3\nc,q2,pre,0\nc,q2,post,10\n");
  const auto paired = pair_responses(recs);
  REQUIRE(paired.at("q1").n() == 1);
  CHECK(paired.at("q1").rows[0].participant_id == "p1");
  CHECK(paired.at("q1").rows[0].pre == 3);
  CHECK(paired.at("q1").rows[0].post == 5);
  CHECK(paired.at("q2").n() == 3);
  CHECK(paired.at("q2").rows[2].delta() == 10);
}

TEST_CASE("property: pairing is order invariant and matches an independent scan") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SurveyRecord> recs;
    for (int p = 0; p < 40; ++p) {
      for (int q = 0; q < 4; ++q) {
        for (auto phase : {Phase::Pre, Phase::Post}) {
          const auto roll = gen() % 10;
          if (roll == 0) continue;  // no record at all
          const auto value = roll == 1 ? ResponseValue::no_opinion() : ResponseValue::opinion(int(gen() % 11));
          recs.push_back({"p" + std::to_string(p), "q" + std::to_string(q), phase, value});
        }
      }
    }
    const auto base = pair_responses(recs);
    std::shuffle(recs.begin(), recs.end(), gen);
    const auto shuffled = pair_responses(recs);
    REQUIRE(base.size() == shuffled.size());
    for (const auto& [item, paired] : base) {
      const auto& other = shuffled.at(item);
      REQUIRE(paired.n() == other.n());
      for (std::size_t i = 0; i < paired.n(); ++i) {
        CHECK(paired.rows[i].participant_id == other.rows[i].participant_id);
        CHECK(paired.rows[i].pre == other.rows[i].pre);
        CHECK(paired.rows[i].post == other.rows[i].post);
      }
      std::set<std::string> pre_ok, post_ok;
      for (const auto& r : recs) {
        if (r.item_id != item || !r.value.has_opinion()) continue;
        (r.phase == Phase::Pre ? pre_ok : post_ok).insert(r.participant_id);
      }
      std::size_t both = 0;
      for (const auto& p : pre_ok) both += post_ok.count(p);
      CHECK(paired.n() == both);
    }
    const auto summary = summarize(recs);
    for (const auto& s : summary.items) CHECK(s.paired <= summary.participant_count);
  }
}

TEST_CASE("summary counts participants, items and no-opinion fractions") {
  const auto recs = parse_surveys(std::string(kHeader) + "a,q1,pre,NA\na,q1,post,3\nb,q1,pre,2\nb,q1,post,2\n");
  const auto s = summarize(recs);
  CHECK(s.participant_count == 2);
  CHECK(s.item_count == 1);
  CHECK(s.items[0].paired == 1);
  CHECK(s.items[0].no_opinion_pre == doctest::Approx(0.5));
  CHECK(s.items[0].no_opinion_post == 0.0);
}

TEST_CASE("transcripts are sorted and duplicate seq rejected") {
  const std::string head = "statement_id,room_id,agenda_id,participant_id,seq,text\n";
  const auto st = parse_transcripts(head + "s2,r1,a1,p1,2,\"second, with comma\"\ns1,r1,a1,p2,1,first\n");
  REQUIRE(st.size() == 2);
  CHECK(st[0].statement_id == "s1");
  CHECK(st[1].text == "second, with comma");
  CHECK(code_of([&] { parse_transcripts(head + "s1,r1,a1,p1,1,x\ns2,r1,a1,p2,1,y\n"); }) == ErrorCode::DuplicateKey);
  CHECK(code_of([&] { parse_transcripts(head + "s1,r1,a1,p1,1,x\ns1,r1,a2,p2,1,y\n"); }) == ErrorCode::DuplicateKey);
  // same seq in different cells is fine
  CHECK(parse_transcripts(head + "s1,r1,a1,p1,1,x\ns2,r2,a1,p2,1,y\n").size() == 2);
}

TEST_CASE("annotation label ranges") {
  const std::string head = "statement_id,novelty,justification,stance,rationale\n";
  CHECK(parse_annotations(head + "s1,1,5,2,ok\n").size() == 1);
  CHECK(code_of([&] { parse_annotations(head + "s1,0,5,2,x\n"); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { parse_annotations(head + "s1,1,6,2,x\n"); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { parse_annotations(head + "s1,1,5,3,x\n"); }) == ErrorCode::OutOfRange);
}

namespace {

struct CellFixture {
  std::vector<Statement> statements;
  std::vector<StatementAnnotation> annotations;
  std::map<std::string, ItemPairedResponses> paired;
  Rosters rosters;
  AgendaMap agenda{{"a1", "q1"}, {"a2", "q2"}};

  CellFixture() {
    statements = {{"s1", "r1", "a1", "a", 1, "x"}, {"s2", "r1", "a1", "b", 2, "y"}, {"s3", "r1", "a1", "a", 3, "z"}};
    annotations = {{"s1", 2, 4, 2, ""}, {"s2", 3, 1, 2, ""}, {"s3", 4, 1, 1, ""}};
    rosters["r1"] = {"a", "b", "c"};
    paired["q1"] = {"q1", {{"a", 2, 4}, {"b", 6, 6}, {"c", 4, 7}}};
  }
};

}  // namespace

TEST_CASE("room-agenda aggregation") {
  CellFixture f;
  const auto res = aggregate_room_agenda(f.statements, f.annotations, f.paired, f.rosters, f.agenda);
  REQUIRE(res.rows.size() == 1);
  const auto& r = res.rows[0];
  CHECK(r.support == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
  CHECK(r.novelty == doctest::Approx(3.0));
  CHECK(r.justification == doctest::Approx(2.0));
  CHECK(r.log_statements == doctest::Approx(std::log(3.0)));
  CHECK(*r.pre_opinion == doctest::Approx(4.0));
  CHECK(*r.delta_all == doctest::Approx(5.0 / 3.0));
  CHECK(*r.pre_opinion_noncontrib == doctest::Approx(4.0));
  CHECK(*r.delta_noncontrib == doctest::Approx(3.0));
  CHECK(r.n_speakers == 2);
  CHECK(r.n_silent == 1);
  CHECK(r.n_speakers + r.n_silent == f.rosters["r1"].size());
  REQUIRE(res.skipped.size() == 1);
  CHECK(res.skipped[0].agenda_id == "a2");
}

TEST_CASE("aggregation preconditions") {
  CellFixture f;
  f.annotations.pop_back();
  CHECK(code_of([&] { aggregate_room_agenda(f.statements, f.annotations, f.paired, f.rosters, f.agenda); }) ==
        ErrorCode::InvalidParams);
  CellFixture g;
  g.statements.push_back({"s9", "r1", "zz", "a", 1, "x"});
  g.annotations.push_back({"s9", 1, 1, 1, ""});
  CHECK(code_of([&] { aggregate_room_agenda(g.statements, g.annotations, g.paired, g.rosters, g.agenda); }) ==
        ErrorCode::InvalidParams);
}

TEST_CASE("features csv round trip") {
  CellFixture f;
  const auto res = aggregate_room_agenda(f.statements, f.annotations, f.paired, f.rosters, f.agenda);
  std::ostringstream out;
  write_features_csv(out, res.rows);
  const auto back = parse_features(out.str());
  REQUIRE(back.size() == 1);
  CHECK(back[0].support == res.rows[0].support);
  CHECK(*back[0].delta_noncontrib == *res.rows[0].delta_noncontrib);
  CHECK(back[0].statements == 3);
}
