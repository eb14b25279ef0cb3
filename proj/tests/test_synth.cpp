#include <algorithm>
#include <cmath>

#include "delib/error.hpp"
#include "delib/metrics.hpp"
#include "delib/regression.hpp"
#include "delib/synth.hpp"
#include "doctest.h"

using namespace delib;
using namespace delib::synth;

namespace {

const auto kDet = PerturbationConfig::deterministic();

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected delib::Error");
  return ErrorCode::EmptyInput;
}

Scenario make(ScenarioKind kind, std::uint64_t seed = 1) {
  Scenario s;
  s.kind = kind;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("compression off the grid preserves order and scales variance by lambda squared") {
  auto s = make(ScenarioKind::ProportionalCompression);
  s.lambda = 0.5;
  s.integer_grid = false;
  const auto item = generate(s).at(0);
  CHECK(kendall_tau(item.pre, item.post, kDet) == 1.0);
  CHECK(sample_variance(item.post) / sample_variance(item.pre) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(variance_change(item.pre, item.post) == doctest::Approx(-75.0).epsilon(1e-10));
}

TEST_CASE("rounded monotone maps keep tau high") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto c = make(ScenarioKind::ProportionalCompression, seed);
    c.lambda = 0.8;
    auto e = make(ScenarioKind::RankPreservingExtremization, seed);
    e.lambda = 1.2;
    for (const auto& s : {c, e}) {
      const auto item = generate(s).at(0);
      CHECK(kendall_tau(item.pre, item.post, kDet) >= 0.95);
      for (double v : item.post) {
        CHECK(v == std::round(v));
        CHECK(v >= 0.0);
        CHECK(v <= 10.0);
      }
    }
  }
}

TEST_CASE("reshuffling preserves the post multiset and destroys rank order") {
  for (double phi : {0.3, 0.6, 1.0}) {
    auto base = make(ScenarioKind::ProportionalCompression, 9);
    base.lambda = 0.6;
    auto sh = base;
    sh.kind = ScenarioKind::ReshuffleConvergence;
    sh.phi = phi;
    auto a = generate(base).at(0).post, b = generate(sh).at(0).post;
    CHECK(generate(sh).at(0).pre == generate(base).at(0).pre);
    const auto tau = kendall_tau(generate(sh).at(0).pre, b, kDet);
    CHECK(tau <= 0.7);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
  }
}

TEST_CASE("independent uniform posts show regression-to-the-mean reversion") {
  auto s = make(ScenarioKind::IndependentUniform, 3);
  s.participants = 10000;
  const auto item = generate(s).at(0);
  CHECK(std::abs(mean_reversion(item.pre, item.post) - 1.0 / std::sqrt(2.0)) < 0.02);
  CHECK(std::abs(kendall_tau(item.pre, item.post, kDet)) < 0.02);
}

TEST_CASE("a parallel shift off the grid has a degenerate delta") {
  auto s = make(ScenarioKind::ParallelShift);
  s.delta = 2.0;
  s.integer_grid = false;
  const auto item = generate(s).at(0);
  CHECK(kendall_tau(item.pre, item.post, kDet) == 1.0);
  CHECK(variance_change(item.pre, item.post) == doctest::Approx(0.0));
  CHECK(code_of([&] { mean_reversion(item.pre, item.post); }) == ErrorCode::DegenerateVariance);
}

TEST_CASE("control noise with zero sigma leaves post equal to pre") {
  auto s = make(ScenarioKind::ControlNoise);
  s.sigma = 0.0;
  const auto item = generate(s).at(0);
  CHECK(item.pre == item.post);
}

TEST_CASE("scenario parameter validation") {
  auto check = [](ScenarioKind kind, double lambda, double phi, double sigma, std::size_t n) {
    auto s = make(kind);
    s.lambda = lambda;
    s.phi = phi;
    s.sigma = sigma;
    s.participants = n;
    return code_of([&] { generate(s); });
  };
  CHECK(check(ScenarioKind::ProportionalCompression, 1.0, 0, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ProportionalCompression, 0.0, 0, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::RankPreservingExtremization, 0.9, 0, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ReshuffleConvergence, 0.5, 0.0, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ReshuffleConvergence, 0.5, 1.5, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ReshuffleDivergence, 0.5, 0.5, 1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ControlNoise, 1, 0, -1, 100) == ErrorCode::InvalidParams);
  CHECK(check(ScenarioKind::ControlNoise, 1, 0, 1, 1) == ErrorCode::InvalidParams);
  CHECK(code_of([] { parse_kind("bogus"); }) == ErrorCode::InvalidParams);
  for (auto k : {ScenarioKind::ParallelShift, ScenarioKind::ReshuffleDivergence, ScenarioKind::ControlNoise})
    CHECK(parse_kind(to_string(k)) == k);
}

TEST_CASE("generation is deterministic in the seed and json round-trips") {
  auto s = make(ScenarioKind::ReshuffleDivergence, 77);
  s.lambda = 1.5;
  s.phi = 0.4;
  s.items = 3;
  const auto a = generate(s), b = generate(s);
  REQUIRE(a.size() == 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(a[j].pre == b[j].pre);
    CHECK(a[j].post == b[j].post);
  }
  CHECK(a[0].pre != a[1].pre);
  auto other = s;
  other.seed = 78;
  CHECK(generate(other)[0].pre != a[0].pre);

  const auto back = scenario_from_json(nlohmann::json::parse(to_json(s).dump()));
  CHECK(generate(back)[2].post == a[2].post);

  const auto records = to_records(a);
  CHECK(records.size() == 2 * 3 * s.participants);
  CHECK(records.front().phase == Phase::Pre);
  CHECK(records.back().phase == Phase::Post);
  CHECK(participant_id(7, 1000) == "p007");
}

TEST_CASE("regression fixture validation and determinism") {
  RegressionTruth t;
  t.seed = 4;
  t.rows = 50;
  const auto a = generate_regression_fixture(t), b = generate_regression_fixture(t);
  REQUIRE(a.rows.size() == 50);
  CHECK(*a.rows[10].delta_all == *b.rows[10].delta_all);
  for (const auto& r : a.rows) {
    CHECK(r.support >= 0.0);
    CHECK(r.support <= 2.0);
    CHECK(r.novelty >= 1.0);
    CHECK(r.justification <= 5.0);
    CHECK(r.log_statements == doctest::Approx(std::log(double(r.statements))));
  }
  auto bad = t;
  bad.agenda_effects = {1.0, 2.0};
  CHECK(code_of([&] { generate_regression_fixture(bad); }) == ErrorCode::InvalidParams);
  bad = t;
  bad.sigma = -1;
  CHECK(code_of([&] { generate_regression_fixture(bad); }) == ErrorCode::InvalidParams);
}

TEST_CASE("the support x justification effect is detectable at the target size") {
  int significant = 0, covered = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    RegressionTruth t;
    t.beta = {0, 0, 0, 0, 0, 0.47, 0, 0};
    t.seed = std::uint64_t(seed);
    const auto fx = generate_regression_fixture(t);
    const auto fit = fit_design(build_design(fx.rows, {}));
    REQUIRE(fit.columns[5] == "S:J");
    significant += fit.p(5) < 0.05;
    covered += std::abs(fit.coefficients(5) - 0.47) <= 3 * fit.se_hc3(5);
  }
  MESSAGE("significant " << significant << "/" << seeds << ", covered " << covered << "/" << seeds);
  CHECK(significant >= 80);
  CHECK(covered >= 95);
}
