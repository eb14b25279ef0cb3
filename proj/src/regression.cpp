#include "delib/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "delib/distributions.hpp"
#include "delib/error.hpp"
#include "delib/io.hpp"

namespace delib {

std::string to_string(OutcomeVariant v) {
  return v == OutcomeVariant::AllParticipants ? "all_participants" : "non_contributors";
}

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kLeverageTolerance = 1e-10;

const char* const kPredictorNames[] = {"S", "N", "J", "S:N", "S:J", "O", "L"};

}  // namespace

Design build_design(const std::vector<RoomAgendaFeatures>& rows, const RegressionSpec& spec) {
  Design d;
  const bool noncontrib = spec.outcome == OutcomeVariant::NonContributors;
  bool have_noncontrib_o = false;
  if (noncontrib) {
    for (const auto& r : rows) have_noncontrib_o |= r.pre_opinion_noncontrib.has_value();
  }
  d.pre_opinion_source = !noncontrib ? "O (all roster members)"
                         : have_noncontrib_o ? "O over non-contributors"
                                             : "O (all roster members; non-contributor O not supplied)";

  struct Usable {
    const RoomAgendaFeatures* row;
    double outcome;
    double pre;
  };
  std::vector<Usable> usable;
  for (const auto& r : rows) {
    const auto& outcome = noncontrib ? r.delta_noncontrib : r.delta_all;
    const auto& pre = noncontrib && have_noncontrib_o ? r.pre_opinion_noncontrib : r.pre_opinion;
    const std::string id = r.room_id + "/" + r.agenda_id;
    if (!outcome || !pre) {
      d.excluded.push_back(id + ": " + (!outcome ? "outcome" : "pre-opinion") + " unavailable");
      continue;
    }
    usable.push_back({&r, *outcome, *pre});
  }
  if (usable.empty()) throw Error(ErrorCode::InvalidParams, "no rows with outcome and pre-opinion");

  std::set<std::string> levels;
  for (const auto& u : usable) levels.insert(u.row->agenda_id);
  d.reference_agenda = spec.reference_agenda.value_or(*levels.begin());
  if (!levels.count(d.reference_agenda)) {
    throw Error(ErrorCode::InvalidParams, "reference agenda " + d.reference_agenda + " has no rows");
  }
  std::vector<std::string> dummies;
  for (const auto& l : levels)
    if (l != d.reference_agenda) dummies.push_back(l);
  if (dummies.empty()) {
    d.warnings.push_back("MissingAgendaLevels: single agenda level, no fixed-effect dummies");
  }

  const std::size_t n = usable.size();
  constexpr std::size_t kMain = 5;  // S, N, J, O, L
  Eigen::MatrixXd main(n, kMain);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = *usable[i].row;
    main.row(static_cast<Eigen::Index>(i)) << r.support, r.novelty, r.justification, usable[i].pre,
        r.log_statements;
  }
  if (spec.center) main.rowwise() -= main.colwise().mean();

  d.columns.push_back("(Intercept)");
  for (auto* name : kPredictorNames) d.columns.emplace_back(name);
  for (const auto& l : dummies) d.columns.push_back("agenda[" + l + "]");
  d.predictor_columns = std::size(kPredictorNames);
  const auto p = static_cast<Eigen::Index>(d.columns.size());
  if (static_cast<Eigen::Index>(n) <= p) {
    throw Error(ErrorCode::InvalidParams, std::to_string(n) + " rows for " + std::to_string(p) + " columns");
  }

  d.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), p);
  d.y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double s = main(ii, 0), nv = main(ii, 1), j = main(ii, 2), o = main(ii, 3), l = main(ii, 4);
    d.x.row(ii).head(8) << 1.0, s, nv, j, s * nv, s * j, o, l;
    const auto& agenda = usable[i].row->agenda_id;
    auto it = std::lower_bound(dummies.begin(), dummies.end(), agenda);
    if (it != dummies.end() && *it == agenda) d.x(ii, 8 + (it - dummies.begin())) = 1.0;
    d.y(ii) = usable[i].outcome;
    d.row_ids.push_back(usable[i].row->room_id + "/" + agenda);
  }
  return d;
}

RegressionFit fit_ols_hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          const std::vector<std::string>& row_ids) {
  const Eigen::Index n = x.rows(), p = x.cols();
  if (y.size() != n) throw Error(ErrorCode::LengthMismatch, "design and outcome differ in rows");
  if (n <= p) throw Error(ErrorCode::InvalidParams, "need more rows than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) {
    throw Error(ErrorCode::RankDeficient,
                "design rank " + std::to_string(qr.rank()) + " < " + std::to_string(p) + " columns");
  }
  RegressionFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.df = static_cast<std::size_t>(n - p);
  fit.coefficients = qr.solve(y);
  fit.fitted = x * fit.coefficients;
  fit.residuals = y - fit.fitted;

  // (X'X)^-1 X' = B A' with A = X P R^-1, B = P R^-1.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd b = qr.colsPermutation() * r_inv;
  const Eigen::MatrixXd a = x * b;
  fit.leverage = a.rowwise().squaredNorm();

  Eigen::VectorXd omega(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double one_minus_h = 1.0 - fit.leverage(i);
    if (one_minus_h < kLeverageTolerance) {
      const auto id = static_cast<std::size_t>(i) < row_ids.size() ? row_ids[static_cast<std::size_t>(i)]
                                                                   : "row " + std::to_string(i);
      throw Error(ErrorCode::LeverageOne, id + " has leverage 1; HC3 undefined");
    }
    omega(i) = fit.residuals(i) * fit.residuals(i) / (one_minus_h * one_minus_h);
  }
  const Eigen::MatrixXd meat = a.transpose() * omega.asDiagonal() * a;
  const Eigen::MatrixXd cov = b * meat * b.transpose();
  fit.se_hc3 = cov.diagonal().cwiseMax(0.0).cwiseSqrt();

  fit.t.resize(p);
  fit.p.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const double se = fit.se_hc3(k);
    if (se > 0.0) {
      fit.t(k) = fit.coefficients(k) / se;
      fit.p(k) = dist::student_t_two_sided(fit.t(k), static_cast<double>(fit.df));
    } else {
      fit.t(k) = std::numeric_limits<double>::quiet_NaN();
      fit.p(k) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  const double ssr = fit.residuals.squaredNorm();
  const double sst = (y.array() - y.mean()).matrix().squaredNorm();
  fit.r_squared = sst > 0.0 ? 1.0 - ssr / sst : (ssr == 0.0 ? 1.0 : std::numeric_limits<double>::quiet_NaN());
  return fit;
}

std::vector<double> vif(const Eigen::MatrixXd& predictors) {
  const Eigen::Index n = predictors.rows(), q = predictors.cols();
  std::vector<double> out(static_cast<std::size_t>(q), std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < q; ++j) {
    Eigen::MatrixXd aux(n, q);  // intercept + the other columns
    aux.col(0).setOnes();
    Eigen::Index c = 1;
    for (Eigen::Index k = 0; k < q; ++k)
      if (k != j) aux.col(c++) = predictors.col(k);
    const Eigen::VectorXd target = predictors.col(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(aux);
    qr.setThreshold(kRankTolerance);
    const Eigen::VectorXd resid = target - aux * qr.solve(target);
    const double sst = (target.array() - target.mean()).matrix().squaredNorm();
    if (sst == 0.0) continue;
    const double r2 = 1.0 - resid.squaredNorm() / sst;
    if (r2 < 1.0 - 1e-12) out[static_cast<std::size_t>(j)] = 1.0 / (1.0 - r2);
  }
  return out;
}

RegressionFit fit_design(const Design& design) {
  auto fit = fit_ols_hc3(design.x, design.y, design.row_ids);
  fit.columns = design.columns;
  fit.vif = vif(design.x.middleCols(1, static_cast<Eigen::Index>(design.predictor_columns)));
  return fit;
}

Table3Report run_table3(const std::vector<RoomAgendaFeatures>& rows, const RegressionSpec& base) {
  Table3Report report;
  RegressionSpec all = base, quiet = base;
  all.outcome = OutcomeVariant::AllParticipants;
  quiet.outcome = OutcomeVariant::NonContributors;
  report.all_design = build_design(rows, all);
  report.noncontrib_design = build_design(rows, quiet);
  report.all = fit_design(report.all_design);
  report.noncontrib = fit_design(report.noncontrib_design);
  return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::pair<double, double> dummy_range(const Design& d, const RegressionFit& f) {
  const auto first = static_cast<Eigen::Index>(1 + d.predictor_columns);
  if (f.coefficients.size() <= first) return {std::nan(""), std::nan("")};
  const auto tail = f.coefficients.tail(f.coefficients.size() - first);
  return {tail.minCoeff(), tail.maxCoeff()};
}

}  // namespace

nlohmann::ordered_json to_json(const Design& design, const RegressionFit& fit) {
  ordered_json j;
  j["n"] = fit.n;
  j["df_residual"] = fit.df;
  j["r_squared"] = num(fit.r_squared);
  j["reference_agenda"] = design.reference_agenda;
  j["pre_opinion_source"] = design.pre_opinion_source;
  ordered_json coef = ordered_json::array();
  for (std::size_t k = 0; k < fit.columns.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    coef.push_back({{"term", fit.columns[k]}, {"estimate", num(fit.coefficients(kk))},
                    {"se_hc3", num(fit.se_hc3(kk))}, {"t", num(fit.t(kk))}, {"p", num(fit.p(kk))}});
  }
  j["coefficients"] = coef;
  ordered_json v = ordered_json::object();
  for (std::size_t k = 0; k < fit.vif.size(); ++k) v[fit.columns[k + 1]] = num(fit.vif[k]);
  j["vif"] = v;
  const auto [lo, hi] = dummy_range(design, fit);
  j["agenda_effect_range"] = ordered_json::array({num(lo), num(hi)});
  j["excluded_rows"] = design.excluded;
  j["warnings"] = design.warnings;
  return j;
}

nlohmann::ordered_json to_json(const Table3Report& report) {
  ordered_json j;
  j["metadata"] = {
      {"estimator", "OLS, column-pivoted Householder QR"},
      {"standard_errors", "HC3"},
      {"centering", "continuous predictors mean-centered before interactions"},
      {"p_value_df", "N - columns"},
      {"non_contributor_pre_opinion", report.noncontrib_design.pre_opinion_source},
  };
  j["all_participants"] = to_json(report.all_design, report.all);
  j["non_contributors"] = to_json(report.noncontrib_design, report.noncontrib);
  return j;
}

std::string render_table(const Table3Report& report) {
  struct Line {
    const char* label;
    const char* term;
  };
  static const Line kLines[] = {
      {"Expressed Support", "S"},        {"Justification", "J"},
      {"Novelty", "N"},                  {"Support x Justification", "S:J"},
      {"Support x Novelty", "S:N"},      {"Log(Num Statements)", "L"},
      {"Pre-opinion (centered)", "O"},
  };
  auto cell = [](const RegressionFit& f, const char* term) -> std::pair<std::string, std::string> {
    for (std::size_t k = 0; k < f.columns.size(); ++k) {
      if (f.columns[k] != term) continue;
      const auto kk = static_cast<Eigen::Index>(k);
      const double p = f.p(kk);
      const char* stars = !std::isnan(p) && p < 0.001 ? "**" : (!std::isnan(p) && p < 0.05 ? "*" : "");
      return {io::format_fixed(f.coefficients(kk), 3) + stars, "(" + io::format_fixed(f.se_hc3(kk), 3) + ")"};
    }
    return {"", ""};
  };
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"", "All Participants", "Non-contributing Only"});
  for (const auto& line : kLines) {
    auto [a, ase] = cell(report.all, line.term);
    auto [b, bse] = cell(report.noncontrib, line.term);
    rows.push_back({line.label, a, b});
    rows.push_back({"", ase, bse});
  }
  auto range = [](const Design& d, const RegressionFit& f) {
    const auto [lo, hi] = dummy_range(d, f);
    if (std::isnan(lo)) return std::string("none");
    return "[" + io::format_fixed(lo, 3) + ", " + io::format_fixed(hi, 3) + "]";
  };
  rows.push_back({"Agenda fixed effects", range(report.all_design, report.all),
                  range(report.noncontrib_design, report.noncontrib)});
  rows.push_back({"R^2", io::format_fixed(report.all.r_squared, 3), io::format_fixed(report.noncontrib.r_squared, 3)});
  rows.push_back({"N", std::to_string(report.all.n), std::to_string(report.noncontrib.n)});

  std::array<std::size_t, 3> width{};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i][0] << std::string(width[0] - rows[i][0].size() + 2, ' ');
    out << std::string(width[1] - rows[i][1].size(), ' ') << rows[i][1] << "  ";
    out << std::string(width[2] - rows[i][2].size(), ' ') << rows[i][2] << '\n';
    if (i == 0 || i == 2 * std::size(kLines)) out << std::string(width[0] + width[1] + width[2] + 4, '-') << '\n';
  }
  out << "\nHC3 robust standard errors in parentheses. Agenda fixed effects included (reference "
      << report.all_design.reference_agenda << " omitted); range shown. ** p < 0.001, * p < 0.05.\n";
  auto vif_line = [](const char* name, const RegressionFit& f) {
    double worst = 0.0;
    for (double v : f.vif) worst = std::max(worst, v);
    return std::string(name) + " max VIF " + io::format_fixed(worst, 3);
  };
  out << vif_line("All participants:", report.all) << "; " << vif_line("non-contributors:", report.noncontrib) << '\n';
  return out.str();
}

}  // namespace delib
