#include <cmath>
#include <numeric>
#include <random>

#include "delib/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace delib;

namespace {

using Vec = std::vector<double>;
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

Vec random_scores(std::mt19937_64& gen, std::size_t n) {
  Vec v(n);
  for (auto& x : v) x = static_cast<double>(gen() % 11);
  return v;
}

}  // namespace

TEST_CASE("kendall tau examples") {
  CHECK(kendall_tau(Vec{1, 2, 3}, Vec{10, 20, 30}, kDet) == 1.0);
  CHECK(kendall_tau(Vec{1, 2, 3}, Vec{3, 2, 1}, kDet) == -1.0);
  CHECK(kendall_tau(Vec{1, 2, 3, 4}, Vec{2, 1, 4, 3}, kDet) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(kendall_tau(Vec{5, 5}, Vec{7, 7}, kDet) == 1.0);
  CHECK(kendall_tau(Vec{0, 0}, Vec{1, 2}, kDet) == 0.0);
  CHECK(kendall_tau(Vec{5, 5}, Vec{7, 7}, PerturbationConfig::perturbed(3)) == 1.0);
  const double t = kendall_tau(Vec{0, 0}, Vec{1, 2}, PerturbationConfig::perturbed(3));
  CHECK((t == 1.0 || t == -1.0));
}

TEST_CASE("kendall tau errors") {
  CHECK(code_of([] { kendall_tau(Vec{1, 2}, Vec{1}, kDet); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { kendall_tau(Vec{1}, Vec{1}, kDet); }) == ErrorCode::TooFewRows);
  CHECK(code_of([] { kendall_tau(Vec{1, 2}, Vec{1, 2}, PerturbationConfig::perturbed(1, 1.0)); }) ==
        ErrorCode::InvalidParams);
  CHECK(code_of([] { kendall_tau(Vec{1, 2}, Vec{1, 2}, PerturbationConfig::perturbed(1, 0.0)); }) ==
        ErrorCode::InvalidParams);
}

TEST_CASE("property: merge-sort tau equals the pair-enumeration oracle exactly") {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen() % 120;
    const Vec x = random_scores(gen, n), y = random_scores(gen, n);
    for (const auto& cfg : {kDet, PerturbationConfig::perturbed(gen())}) {
      const double fast = kendall_tau(x, y, cfg);
      CHECK(fast == oracle::tau(x, y, cfg));
      CHECK(fast == kendall_tau_pairwise(x, y, cfg));
    }
  }
}

TEST_CASE("property: tau range, identity and symmetry in both modes") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 60;
    const Vec x = random_scores(gen, n), y = random_scores(gen, n);
    for (const auto& cfg : {kDet, PerturbationConfig::perturbed(gen())}) {
      const double t = kendall_tau(x, y, cfg);
      CHECK(t >= -1.0);
      CHECK(t <= 1.0);
      CHECK(kendall_tau(x, x, cfg) == 1.0);
      CHECK(kendall_tau(y, x, cfg) == t);
    }
  }
}

TEST_CASE("property: perturbed tau does not depend on epsilon_max for integer scores") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + gen() % 80;
    const Vec x = random_scores(gen, n), y = random_scores(gen, n);
    const auto seed = gen();
    const double ref = kendall_tau(x, y, PerturbationConfig::perturbed(seed, 0.1));
    for (double eps : {0.001, 0.37, 0.5, 0.999}) CHECK(kendall_tau(x, y, PerturbationConfig::perturbed(seed, eps)) == ref);
  }
}

TEST_CASE("property: without ties both modes agree") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + gen() % 50;
    Vec x(n), y(n);
    std::iota(x.begin(), x.end(), 0.0);
    std::iota(y.begin(), y.end(), 0.0);
    std::shuffle(x.begin(), x.end(), gen);
    std::shuffle(y.begin(), y.end(), gen);
    CHECK(kendall_tau(x, y, kDet) == kendall_tau(x, y, PerturbationConfig::perturbed(gen())));
  }
}

TEST_CASE("property: shift and scale invariances") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + gen() % 40;
    Vec x = random_scores(gen, n), y = random_scores(gen, n);
    x[0] = 0;
    x[1] = 10;
    y[0] = 3;
    y[1] = 9;
    Vec xs = x, ys = y, xm = x;
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] += 4.0;
      ys[i] += 4.0;
      xm[i] *= 2.5;
    }
    CHECK(kendall_tau(xs, ys, kDet) == kendall_tau(x, y, kDet));
    CHECK(variance_change(xs, ys) == doctest::Approx(variance_change(x, y)).epsilon(1e-12));
    CHECK(kendall_tau(xm, y, kDet) == kendall_tau(x, y, kDet));
    try {
      const double mr = mean_reversion(x, y);
      CHECK(mean_reversion(xs, ys) == doctest::Approx(mr).epsilon(1e-12));
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DegenerateVariance);
    }
  }
}

TEST_CASE("variance change and mean reversion by hand") {
  CHECK(variance_change(Vec{1, 4, 2}, Vec{1, 4, 2}) == 0.0);
  CHECK(variance_change(Vec{0, 10}, Vec{2, 8}) == doctest::Approx(-64.0).epsilon(1e-14));
  CHECK(variance_change(Vec{4, 6}, Vec{0, 10}) == doctest::Approx(2400.0).epsilon(1e-14));
  CHECK(code_of([] { variance_change(Vec{3, 3}, Vec{0, 10}); }) == ErrorCode::ZeroPreVariance);
  CHECK(sample_variance(Vec{0, 10}) == 50.0);

  CHECK(mean_reversion(Vec{0, 10}, Vec{5, 5}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(code_of([] { mean_reversion(Vec{1, 2, 3}, Vec{3, 4, 5}); }) == ErrorCode::DegenerateVariance);
  // pre deviations (-5,0,5), delta (4,-5,-2) with deviations (5,-4,-1): cov sum -30.
  CHECK(mean_reversion(Vec{0, 5, 10}, Vec{4, 0, 8}) == doctest::Approx(30.0 / (std::sqrt(50.0) * std::sqrt(42.0))).epsilon(1e-14));
  CHECK(mean_reversion(Vec{0, 5, 10}, Vec{4, 0, 8}) == doctest::Approx(0.6547).epsilon(1e-4));
}

TEST_CASE("item metrics batches and records failures") {
  ItemPairedResponses shift{"q1", {{"p1", 1, 2}, {"p2", 2, 3}, {"p3", 3, 4}}};
  const auto m = item_metrics(shift, kDet);
  CHECK(m.n == 3);
  CHECK(*m.tau.value == 1.0);
  CHECK(*m.var_change_pct.value == 0.0);
  CHECK_FALSE(m.mean_reversion.ok());
  CHECK(m.mean_reversion.error.find("DegenerateVariance") != std::string::npos);

  ItemPairedResponses swap{"q2", {{"p1", 0, 10}, {"p2", 10, 0}}};
  CHECK(*item_metrics(swap, kDet).tau.value == -1.0);

  ItemPairedResponses one{"q3", {{"p1", 0, 10}}};
  CHECK(code_of([&] { item_metrics(one, kDet); }) == ErrorCode::TooFewRows);
}

TEST_CASE("perturbation draws are keyed by participant, not position") {
  // The same participants listed in a different order see the same eps.
  ItemPairedResponses a{"q", {{"x", 1, 1}, {"y", 1, 2}, {"z", 2, 2}}};
  ItemPairedResponses b{"q", {{"z", 2, 2}, {"x", 1, 1}, {"y", 1, 2}}};
  const auto cfg = PerturbationConfig::perturbed(42);
  CHECK(*item_metrics(a, cfg).tau.value == *item_metrics(b, cfg).tau.value);
}

TEST_CASE("monte carlo null on independent uniform scores") {
  std::mt19937_64 gen(1);
  const std::size_t n = 10000;
  const Vec x = random_scores(gen, n), y = random_scores(gen, n);
  CHECK(std::abs(mean_reversion(x, y) - 1.0 / std::sqrt(2.0)) < 0.02);
  CHECK(std::abs(kendall_tau(x, y, kDet)) < 0.02);
  CHECK(std::abs(kendall_tau(x, y, PerturbationConfig::perturbed(9))) < 0.02);
}
