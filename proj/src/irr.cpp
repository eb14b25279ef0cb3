#include "delib/irr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include "delib/csv.hpp"
#include "delib/io.hpp"
#include "delib/parallel.hpp"
#include "delib/rng.hpp"

namespace delib {

RatingMatrix RatingMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
  RatingMatrix m;
  const std::size_t raters = rows.empty() ? 0 : rows.front().size();
  for (std::size_t r = 0; r < raters; ++r) m.rater_ids.push_back("r" + std::to_string(r + 1));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s].size() != raters) throw Error(ErrorCode::UnequalRaterCounts, "ragged rating rows");
    m.statement_ids.push_back("s" + std::to_string(s + 1));
    m.labels.emplace_back(rows[s].begin(), rows[s].end());
  }
  return m;
}

RatingMatrix RatingMatrix::select(const std::vector<std::size_t>& statement_indices) const {
  RatingMatrix out;
  out.rater_ids = rater_ids;
  out.statement_ids.reserve(statement_indices.size());
  out.labels.reserve(statement_indices.size());
  for (auto i : statement_indices) {
    out.statement_ids.push_back(statement_ids.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

std::string to_string(DistanceMetric m) { return m == DistanceMetric::Ordinal ? "ordinal" : "nominal"; }

std::string to_string(LooOutcome o) {
  switch (o) {
    case LooOutcome::ModelCloser: return "model_closer";
    case LooOutcome::HumanCloser: return "human_closer";
    case LooOutcome::Tie: return "tie";
  }
  return "?";
}

void LooTally::add(LooOutcome o) noexcept {
  switch (o) {
    case LooOutcome::ModelCloser: ++model_closer; break;
    case LooOutcome::HumanCloser: ++human_closer; break;
    case LooOutcome::Tie: ++ties; break;
  }
}

namespace {

std::vector<int> present(const std::vector<std::optional<int>>& row) {
  std::vector<int> out;
  for (const auto& v : row)
    if (v) out.push_back(*v);
  return out;
}

std::vector<int> label_set(const RatingMatrix& m) {
  std::set<int> labels;
  for (const auto& row : m.labels)
    for (const auto& v : row)
      if (v) labels.insert(*v);
  return {labels.begin(), labels.end()};
}

}  // namespace

double krippendorff_alpha(const RatingMatrix& matrix, DistanceMetric metric) {
  const auto labels = label_set(matrix);
  const std::size_t c = labels.size();
  auto index_of = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), v) - labels.begin());
  };
  // Coincidence matrix o[a][b].
  std::vector<double> o(c * c, 0.0);
  std::size_t pairable_units = 0;
  for (const auto& row : matrix.labels) {
    const auto vals = present(row);
    if (vals.size() < 2) continue;
    ++pairable_units;
    std::vector<double> counts(c, 0.0);
    for (int v : vals) counts[index_of(v)] += 1.0;
    const double weight = 1.0 / static_cast<double>(vals.size() - 1);
    for (std::size_t a = 0; a < c; ++a) {
      for (std::size_t b = 0; b < c; ++b) {
        const double pairs = a == b ? counts[a] * (counts[a] - 1.0) : counts[a] * counts[b];
        o[a * c + b] += pairs * weight;
      }
    }
  }
  if (pairable_units == 0) throw Error(ErrorCode::DegenerateLabels, "no statement has two ratings");
  std::vector<double> marginal(c, 0.0);
  double total = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) marginal[a] += o[a * c + b];
    total += marginal[a];
  }
  auto delta = [&](std::size_t a, std::size_t b) {
    if (metric == DistanceMetric::Nominal) return a == b ? 0.0 : 1.0;
    const double d = static_cast<double>(labels[a]) - static_cast<double>(labels[b]);
    return d * d;
  };
  double observed = 0.0, expected = 0.0;
  for (std::size_t a = 0; a < c; ++a) {
    for (std::size_t b = 0; b < c; ++b) {
      const double d = delta(a, b);
      observed += o[a * c + b] * d;
      expected += marginal[a] * marginal[b] * d;
    }
  }
  if (expected == 0.0) throw Error(ErrorCode::DegenerateLabels, "a single label value was observed");
  return 1.0 - (total - 1.0) * observed / expected;
}

double fleiss_kappa(const RatingMatrix& matrix) {
  const auto labels = label_set(matrix);
  if (matrix.statements() == 0) throw Error(ErrorCode::EmptyInput, "no statements");
  std::size_t m = 0;
  for (std::size_t s = 0; s < matrix.statements(); ++s) {
    const auto n = present(matrix.labels[s]).size();
    if (s == 0) m = n;
    if (n != m) {
      throw Error(ErrorCode::UnequalRaterCounts, "statement " + matrix.statement_ids[s] + " has " +
                                                     std::to_string(n) + " ratings, expected " +
                                                     std::to_string(m));
    }
  }
  if (m < 2) throw Error(ErrorCode::UnequalRaterCounts, "need at least 2 ratings per statement");
  const double mm = static_cast<double>(m);
  std::vector<double> category_totals(labels.size(), 0.0);
  double agreement_sum = 0.0;
  for (const auto& row : matrix.labels) {
    std::vector<double> counts(labels.size(), 0.0);
    for (int v : present(row)) {
      counts[static_cast<std::size_t>(std::lower_bound(labels.begin(), labels.end(), v) - labels.begin())] += 1.0;
    }
    double sq = 0.0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      sq += counts[j] * counts[j];
      category_totals[j] += counts[j];
    }
    agreement_sum += (sq - mm) / (mm * (mm - 1.0));
  }
  const double n = static_cast<double>(matrix.statements());
  const double p_bar = agreement_sum / n;
  double p_e = 0.0;
  for (double t : category_totals) {
    const double p = t / (n * mm);
    p_e += p * p;
  }
  if (p_e >= 1.0) throw Error(ErrorCode::DegenerateExpected, "chance agreement is 1");
  return (p_bar - p_e) / (1.0 - p_e);
}

AgreementFractions agreement_fractions(const RatingMatrix& matrix) {
  AgreementFractions out;
  if (matrix.statements() == 0) return out;
  std::size_t complete = 0, near = 0;
  for (const auto& row : matrix.labels) {
    auto vals = present(row);
    if (vals.empty()) continue;
    std::sort(vals.begin(), vals.end());
    std::size_t best = 0;
    for (std::size_t i = 0; i < vals.size();) {
      std::size_t j = i;
      while (j < vals.size() && vals[j] == vals[i]) ++j;
      best = std::max(best, j - i);
      i = j;
    }
    complete += best == vals.size();
    near += best + 1 >= vals.size();
  }
  const double n = static_cast<double>(matrix.statements());
  out.complete = static_cast<double>(complete) / n;
  out.near = static_cast<double>(near) / n;
  return out;
}

LooReport loo_consensus(const RatingMatrix& matrix, const std::vector<int>& model_labels) {
  if (model_labels.size() != matrix.statements()) {
    throw Error(ErrorCode::MissingRatings, "model labels do not cover every statement");
  }
  const std::size_t raters = matrix.raters();
  if (raters < 2) throw Error(ErrorCode::MissingRatings, "need at least 2 raters");
  const long others = static_cast<long>(raters) - 1;
  LooReport report;
  for (const auto& id : matrix.rater_ids) report.per_rater[id];

  auto compare = [](long human_scaled, long model_scaled) {
    // Scaled deviations are integers; a difference of zero is a tie.
    if (std::abs(human_scaled - model_scaled) == 0) return LooOutcome::Tie;
    return model_scaled < human_scaled ? LooOutcome::ModelCloser : LooOutcome::HumanCloser;
  };

  for (std::size_t s = 0; s < matrix.statements(); ++s) {
    long total = 0;
    for (std::size_t r = 0; r < raters; ++r) {
      if (!matrix.labels[s][r]) {
        throw Error(ErrorCode::MissingRatings, "statement " + matrix.statement_ids[s] +
                                                   " lacks a rating from " + matrix.rater_ids[r]);
      }
      total += *matrix.labels[s][r];
    }
    const long model = model_labels[s];
    long human_sum = 0, model_sum = 0;
    for (std::size_t r = 0; r < raters; ++r) {
      const long held_out = *matrix.labels[s][r];
      const long rest = total - held_out;  // target * others
      const long human_scaled = std::labs(held_out * others - rest);
      const long model_scaled = std::labs(model * others - rest);
      human_sum += human_scaled;
      model_sum += model_scaled;
      LooFold fold;
      fold.statement_id = matrix.statement_ids[s];
      fold.rater_id = matrix.rater_ids[r];
      fold.target = static_cast<double>(rest) / static_cast<double>(others);
      fold.human_dev = static_cast<double>(human_scaled) / static_cast<double>(others);
      fold.model_dev = static_cast<double>(model_scaled) / static_cast<double>(others);
      fold.outcome = compare(human_scaled, model_scaled);
      report.pairs.add(fold.outcome);
      report.per_rater[fold.rater_id].add(fold.outcome);
      report.folds.push_back(std::move(fold));
    }
    LooStatement st;
    st.statement_id = matrix.statement_ids[s];
    const double denom = static_cast<double>(others) * static_cast<double>(raters);
    st.human_mean_dev = static_cast<double>(human_sum) / denom;
    st.model_mean_dev = static_cast<double>(model_sum) / denom;
    st.outcome = compare(human_sum, model_sum);
    report.statement_tally.add(st.outcome);
    report.statements.push_back(std::move(st));
  }
  const auto decided = report.statement_tally.model_closer + report.statement_tally.human_closer;
  if (decided > 0) report.binomial_p = binomial_test(report.statement_tally.model_closer, decided);
  return report;
}

IrrReport irr_report(const RatingMatrix& matrix, const std::optional<std::vector<int>>& model_labels,
                     const IrrConfig& config) {
  IrrReport report;
  report.config = config;
  report.statements = matrix.statements();
  report.raters = matrix.raters();
  report.alpha_ordinal = attempt([&] { return krippendorff_alpha(matrix, DistanceMetric::Ordinal); });
  report.alpha_nominal = attempt([&] { return krippendorff_alpha(matrix, DistanceMetric::Nominal); });
  report.kappa = attempt([&] { return fleiss_kappa(matrix); });
  report.agreement = agreement_fractions(matrix);

  const auto& boot = config.bootstrap;
  if (matrix.statements() >= 2 && boot.iterations > 0) {
    const std::uint64_t seed = rng::derive(boot.seed, "irr/statements");
    const std::size_t k = matrix.statements();
    std::vector<std::optional<double>> alphas(boot.iterations), kappas(boot.iterations);
    parallel_for(boot.iterations, boot.threads, [&](std::size_t r) {
      std::vector<std::size_t> idx(k);
      for (std::size_t j = 0; j < k; ++j) idx[j] = resample_index(seed, r, j, k);
      const auto sample = matrix.select(idx);
      alphas[r] = attempt([&] { return krippendorff_alpha(sample, DistanceMetric::Ordinal); }).value;
      kappas[r] = attempt([&] { return fleiss_kappa(sample); }).value;
    });
    auto collect = [&](const std::vector<std::optional<double>>& reps) -> std::optional<Interval> {
      std::vector<double> ok;
      for (const auto& v : reps) {
        if (v) ok.push_back(*v);
      }
      report.bootstrap_degenerate = std::max(report.bootstrap_degenerate, reps.size() - ok.size());
      if (ok.empty()) return std::nullopt;
      return percentile_interval(ok, boot.level);
    };
    if (report.alpha_ordinal.ok()) report.alpha_ordinal_ci = collect(alphas);
    if (report.kappa.ok()) report.kappa_ci = collect(kappas);
  }
  if (model_labels) report.loo = loo_consensus(matrix, *model_labels);
  return report;
}

namespace {

using nlohmann::ordered_json;

ordered_json fallible_num(const Fallible<double>& f) {
  if (!f.ok()) return ordered_json{{"error", f.error}};
  return *f.value;
}

ordered_json tally_json(const LooTally& t) {
  return {{"model_closer", t.model_closer}, {"human_closer", t.human_closer}, {"ties", t.ties}, {"total", t.total()}};
}

}  // namespace

nlohmann::ordered_json to_json(const IrrReport& report) {
  ordered_json j;
  j["metadata"] = {
      {"ordinal_distance", "squared difference of label ranks"},
      {"bootstrap", "percentile, resampling statements"},
      {"bootstrap_iterations", report.config.bootstrap.iterations},
      {"bootstrap_level", report.config.bootstrap.level},
      {"seed", report.config.bootstrap.seed},
      {"bootstrap_degenerate_resamples", report.bootstrap_degenerate},
      {"loo_target", "mean of the non-held-out raters"},
      {"loo_tie_tolerance", kLooTieTolerance},
  };
  j["statements"] = report.statements;
  j["raters"] = report.raters;
  auto with_ci = [](const Fallible<double>& v, const std::optional<Interval>& ci) {
    ordered_json o{{"value", fallible_num(v)}};
    o["ci"] = ci ? ordered_json::array({ci->lo, ci->hi}) : ordered_json(nullptr);
    return o;
  };
  j["krippendorff_alpha_ordinal"] = with_ci(report.alpha_ordinal, report.alpha_ordinal_ci);
  j["krippendorff_alpha_nominal"] = {{"value", fallible_num(report.alpha_nominal)}};
  j["fleiss_kappa"] = with_ci(report.kappa, report.kappa_ci);
  j["agreement"] = {{"complete", report.agreement.complete}, {"near", report.agreement.near}};
  if (report.loo) {
    const auto& loo = *report.loo;
    ordered_json l;
    l["pairs"] = tally_json(loo.pairs);
    ordered_json per = ordered_json::object();
    for (const auto& [rater, t] : loo.per_rater) per[rater] = tally_json(t);
    l["per_rater"] = per;
    l["statements"] = tally_json(loo.statement_tally);
    l["binomial_p"] = loo.binomial_p ? ordered_json(*loo.binomial_p) : ordered_json(nullptr);
    l["binomial_n"] = loo.statement_tally.model_closer + loo.statement_tally.human_closer;
    ordered_json folds = ordered_json::array();
    for (const auto& f : loo.folds) {
      folds.push_back({{"statement_id", f.statement_id}, {"rater_id", f.rater_id}, {"target", f.target},
                       {"human_dev", f.human_dev}, {"model_dev", f.model_dev},
                       {"outcome", to_string(f.outcome)}});
    }
    l["folds"] = folds;
    ordered_json sts = ordered_json::array();
    for (const auto& s : loo.statements) {
      sts.push_back({{"statement_id", s.statement_id}, {"human_mean_dev", s.human_mean_dev},
                     {"model_mean_dev", s.model_mean_dev}, {"outcome", to_string(s.outcome)}});
    }
    l["per_statement"] = sts;
    j["leave_one_out"] = l;
  }
  return j;
}

std::string render_table(const IrrReport& report) {
  std::ostringstream out;
  auto val = [](const Fallible<double>& v) { return v.ok() ? io::format_fixed(*v.value, 3) : v.error; };
  auto ci = [](const std::optional<Interval>& c) {
    return c ? " [" + io::format_fixed(c->lo, 3) + ", " + io::format_fixed(c->hi, 3) + "]" : std::string();
  };
  out << "Statements: " << report.statements << ", raters: " << report.raters << '\n';
  out << "Krippendorff alpha (ordinal)  " << val(report.alpha_ordinal) << ci(report.alpha_ordinal_ci) << '\n';
  out << "Krippendorff alpha (nominal)  " << val(report.alpha_nominal) << '\n';
  out << "Fleiss kappa                  " << val(report.kappa) << ci(report.kappa_ci) << '\n';
  out << "Complete agreement            " << io::format_fixed(100 * report.agreement.complete, 1) << "%\n";
  out << "Near agreement (>= r-1 of r)  " << io::format_fixed(100 * report.agreement.near, 1) << "%\n";
  if (report.loo) {
    const auto& l = *report.loo;
    out << "\nLeave-one-rater-out          model closer  human closer  ties\n";
    out << "  pairs                      " << l.pairs.model_closer << "  " << l.pairs.human_closer << "  "
        << l.pairs.ties << '\n';
    for (const auto& [rater, t] : l.per_rater) {
      out << "  " << rater << "  " << t.model_closer << "  " << t.human_closer << "  " << t.ties << '\n';
    }
    out << "  statements                 " << l.statement_tally.model_closer << "  "
        << l.statement_tally.human_closer << "  " << l.statement_tally.ties << '\n';
    out << "  binomial p (ties excluded, n = "
        << l.statement_tally.model_closer + l.statement_tally.human_closer << ")  "
        << (l.binomial_p ? io::format_fixed(*l.binomial_p, 5) : std::string("n/a")) << '\n';
  }
  return out.str();
}

RatingMatrix parse_ratings(std::string_view csv_text) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"statement_id", "rater_id", "label"}, "ratings");
  const auto c_s = table.column("statement_id"), c_r = table.column("rater_id"), c_l = table.column("label");
  std::set<std::string> statements, raters;
  std::map<std::pair<std::string, std::string>, int> cells;
  for (const auto& row : table.rows) {
    long label = 0;
    try {
      label = io::parse_integer(row.fields[c_l], "label");
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(row.line));
    }
    if (label < 0 || label > 2) {
      throw Error(ErrorCode::OutOfRange, "line " + std::to_string(row.line) + ": label " +
                                             std::to_string(label) + " outside 0..2");
    }
    statements.insert(row.fields[c_s]);
    raters.insert(row.fields[c_r]);
    if (!cells.emplace(std::make_pair(row.fields[c_s], row.fields[c_r]), static_cast<int>(label)).second) {
      throw Error(ErrorCode::DuplicateKey, "line " + std::to_string(row.line) + ": rater " +
                                               row.fields[c_r] + " rated " + row.fields[c_s] + " twice");
    }
  }
  RatingMatrix m;
  m.statement_ids.assign(statements.begin(), statements.end());
  m.rater_ids.assign(raters.begin(), raters.end());
  for (const auto& s : m.statement_ids) {
    std::vector<std::optional<int>> row;
    for (const auto& r : m.rater_ids) {
      auto it = cells.find({s, r});
      row.push_back(it == cells.end() ? std::nullopt : std::optional<int>(it->second));
    }
    m.labels.push_back(std::move(row));
  }
  return m;
}

RatingMatrix read_ratings(const std::filesystem::path& path) {
  try {
    return parse_ratings(io::read_text(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::vector<int> parse_model_labels(std::string_view csv_text, const RatingMatrix& matrix) {
  const auto table = csv::parse(csv_text);
  csv::require_columns(table, {"statement_id", "label"}, "model labels");
  const auto c_s = table.column("statement_id"), c_l = table.column("label");
  std::map<std::string, int> by_id;
  for (const auto& row : table.rows) {
    long label = 0;
    try {
      label = io::parse_integer(row.fields[c_l], "label");
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(row.line));
    }
    if (label < 0 || label > 2) {
      throw Error(ErrorCode::OutOfRange, "line " + std::to_string(row.line) + ": label outside 0..2");
    }
    if (!by_id.emplace(row.fields[c_s], static_cast<int>(label)).second) {
      throw Error(ErrorCode::DuplicateKey, "line " + std::to_string(row.line) + ": " + row.fields[c_s]);
    }
  }
  std::vector<int> out;
  for (const auto& s : matrix.statement_ids) {
    auto it = by_id.find(s);
    if (it == by_id.end()) throw Error(ErrorCode::MissingRatings, "no model label for " + s);
    out.push_back(it->second);
  }
  return out;
}

std::vector<int> read_model_labels(const std::filesystem::path& path, const RatingMatrix& matrix) {
  try {
    return parse_model_labels(io::read_text(path), matrix);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace delib
