#include <cmath>
#include <limits>
#include <random>

#include "delib/error.hpp"
#include "delib/regression.hpp"
#include "delib/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

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

std::pair<Eigen::MatrixXd, Eigen::VectorXd> random_design(std::mt19937_64& gen, std::size_t n, std::size_t p) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 1; j < p; ++j) x(i, j) = z(gen);
    y(i) = 0.5 + z(gen) * (1.0 + std::abs(x(i, std::min<std::size_t>(1, p - 1))));
  }
  return {x, y};
}

RoomAgendaFeatures row(const std::string& room, const std::string& agenda, double s, double n, double j, double o,
                       double l, double d) {
  RoomAgendaFeatures r;
  r.room_id = room;
  r.agenda_id = agenda;
  r.support = s;
  r.novelty = n;
  r.justification = j;
  r.pre_opinion = o;
  r.log_statements = l;
  r.delta_all = d;
  r.delta_noncontrib = d;
  return r;
}

synth::RegressionFixture fixture(std::uint64_t seed, double sigma, std::size_t rows = 460) {
  synth::RegressionTruth t;
  t.beta = {0.1, 0.3, -0.2, 0.15, 0.05, 0.47, -0.3, 0.2};
  t.agenda_effects = {0, 0.2, -0.1, 0.3, 0.05, -0.25, 0.1, 0.15};
  t.sigma = sigma;
  t.rows = rows;
  t.seed = seed;
  return synth::generate_regression_fixture(t);
}

}  // namespace

TEST_CASE("HC3 fit matches the explicit long-double oracle on random designs") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + gen() % 6;
    const std::size_t n = p + 3 + gen() % (38 - p);
    const auto [x, y] = random_design(gen, n, p);
    const auto fit = fit_ols_hc3(x, y);
    const auto o = oracle::hc3(x, y);
    for (std::size_t a = 0; a < p; ++a) {
      CHECK(std::abs(fit.coefficients(a) - (double)o.beta[a]) <= 1e-8);
      CHECK(std::abs(fit.se_hc3(a) - (double)o.se[a]) <= 1e-8);
      CHECK(fit.se_hc3(a) >= 0.0);
    }
    CHECK(fit.df == n - p);
    // residuals orthogonal to every design column
    const Eigen::VectorXd xe = x.transpose() * fit.residuals;
    CHECK(xe.cwiseAbs().maxCoeff() <= 1e-8);
    for (Eigen::Index a = 0; a < fit.p.size(); ++a) {
      CHECK(fit.p(a) >= 0.0);
      CHECK(fit.p(a) <= 1.0);
    }
  }
}

TEST_CASE("perfect fit, intercept-only and rank problems") {
  Eigen::MatrixXd x(6, 3);
  x << 1, 0, 2, 1, 1, 3, 1, 2, 1, 1, 3, 5, 1, 4, 4, 1, 5, 0;
  Eigen::VectorXd y = 1.5 * x.col(0) + 2.0 * x.col(1) - 0.5 * x.col(2);
  auto fit = fit_ols_hc3(x, y);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  CHECK(fit.se_hc3.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(fit.coefficients(1) == doctest::Approx(2.0));

  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(5, 1);
  Eigen::VectorXd v(5);
  v << 1, 2, 4, 8, 16;
  CHECK(fit_ols_hc3(ones, v).coefficients(0) == doctest::Approx(6.2));

  Eigen::MatrixXd dup(5, 3);
  dup.col(0).setOnes();
  dup.col(1) << 1, 2, 3, 4, 5;
  dup.col(2) = 2 * dup.col(1);
  CHECK(code_of([&] { fit_ols_hc3(dup, v); }) == ErrorCode::RankDeficient);

  Eigen::MatrixXd lev(5, 2);
  lev.col(0).setOnes();
  lev.col(1) << 1, 0, 0, 0, 0;
  try {
    fit_ols_hc3(lev, v, {"a", "b", "c", "d", "e"});
    FAIL("expected LeverageOne");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LeverageOne);
    CHECK(std::string(e.what()).find("a") != std::string::npos);
  }
}

TEST_CASE("variance inflation factors") {
  Eigen::MatrixXd orth(4, 2);
  orth.col(0) << 1, -1, 1, -1;
  orth.col(1) << 1, 1, -1, -1;
  for (double v : vif(orth)) CHECK(v == doctest::Approx(1.0));

  Eigen::MatrixXd corr(4, 2);
  corr.col(0) = orth.col(0);
  corr.col(1) = 0.6 * orth.col(0) + 0.8 * orth.col(1);
  for (double v : vif(corr)) CHECK(v == doctest::Approx(1.5625).epsilon(1e-12));

  Eigen::MatrixXd dup(5, 2);
  dup.col(0) << 1, 2, 3, 4, 6;
  dup.col(1) = dup.col(0);
  for (double v : vif(dup)) CHECK(std::isinf(v));
}

TEST_CASE("design construction") {
  const auto fx = fixture(1, 0.5, 80);
  const auto d = build_design(fx.rows, {});
  REQUIRE(d.columns.size() == 8 + 7);
  CHECK(d.columns[0] == "(Intercept)");
  CHECK(d.columns[5] == "S:J");
  CHECK(d.reference_agenda == "A1");
  for (Eigen::Index c : {1, 2, 3, 6, 7}) CHECK(std::abs(d.x.col(c).mean()) <= 1e-12);
  // interactions are products of the centered main effects
  CHECK((d.x.col(5) - d.x.col(1).cwiseProduct(d.x.col(3))).cwiseAbs().maxCoeff() == 0.0);

  std::vector<RoomAgendaFeatures> one_level;
  for (int i = 0; i < 12; ++i)
    one_level.push_back(row("r" + std::to_string(i), "only", i % 3, i % 5, i % 4, i % 7, std::log(3 + i), 0.1 * i));
  const auto single = build_design(one_level, {});
  CHECK(single.columns.size() == 8);
  CHECK_FALSE(single.warnings.empty());

  std::vector<RoomAgendaFeatures> tiny(one_level.begin(), one_level.begin() + 2);
  CHECK(code_of([&] { build_design(tiny, {}); }) == ErrorCode::InvalidParams);
}

TEST_CASE("noiseless fixture recovers the generating coefficients") {
  const auto fx = fixture(2, 0.0);
  const auto rep = run_table3(fx.rows);
  CHECK(rep.all.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(rep.all.coefficients(Eigen::Index(k)) - fx.truth.beta[k]) <= 1e-8);
  for (std::size_t k = 1; k < 8; ++k) {
    CHECK(std::abs(rep.all.coefficients(Eigen::Index(7 + k)) - fx.truth.agenda_effects[k]) <= 1e-8);
  }
  CHECK(rep.all.n == 460);
  CHECK(rep.noncontrib.r_squared == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("reference agenda changes only the parameterization") {
  const auto fx = fixture(3, 0.5, 120);
  RegressionSpec alt;
  alt.reference_agenda = "A5";
  const auto a = fit_design(build_design(fx.rows, {}));
  const auto b = fit_design(build_design(fx.rows, alt));
  CHECK((a.fitted - b.fitted).cwiseAbs().maxCoeff() <= 1e-8);
  for (Eigen::Index k = 1; k < 8; ++k) CHECK(std::abs(a.coefficients(k) - b.coefficients(k)) <= 1e-8);
}

TEST_CASE("shifting the outcome moves only the intercept") {
  auto fx = fixture(4, 0.5, 100);
  const auto base = fit_design(build_design(fx.rows, {}));
  for (auto& r : fx.rows) *r.delta_all += 3.0;
  const auto shifted = fit_design(build_design(fx.rows, {}));
  CHECK(shifted.coefficients(0) == doctest::Approx(base.coefficients(0) + 3.0).epsilon(1e-12));
  for (Eigen::Index k = 1; k < base.coefficients.size(); ++k) {
    CHECK(std::abs(shifted.coefficients(k) - base.coefficients(k)) <= 1e-10);
    CHECK(std::abs(shifted.se_hc3(k) - base.se_hc3(k)) <= 1e-10);
  }
}

TEST_CASE("identical outcomes give identical fits for both populations") {
  auto fx = fixture(5, 0.5, 100);
  for (auto& r : fx.rows) {
    r.delta_noncontrib = r.delta_all;
    r.pre_opinion_noncontrib = r.pre_opinion;
  }
  const auto rep = run_table3(fx.rows);
  CHECK((rep.all.coefficients - rep.noncontrib.coefficients).cwiseAbs().maxCoeff() == 0.0);
  const auto text = render_table(rep);
  CHECK(text.find("Support x Justification") != std::string::npos);
  CHECK(to_json(rep).contains("all_participants"));
}

TEST_CASE("rows with missing outcomes are excluded and listed") {
  auto fx = fixture(6, 0.5, 60);
  fx.rows[3].delta_all.reset();
  const auto d = build_design(fx.rows, {});
  CHECK(d.x.rows() == 59);
  REQUIRE(d.excluded.size() == 1);
}
