#include "delib/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "delib/distributions.hpp"
#include "delib/io.hpp"
#include "delib/parallel.hpp"
#include "delib/rng.hpp"
#include "delib/simd.hpp"

namespace delib {

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::Median: return "median";
    case Statistic::Sd: return "sd";
    case Statistic::Mean: return "mean";
  }
  return "?";
}

std::string to_string(Direction d) { return d == Direction::Less ? "lt" : "gt"; }

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Tau: return "kendall_tau";
    case MetricKind::VarianceChange: return "variance_change_pct";
    case MetricKind::MeanReversion: return "mean_reversion";
  }
  return "?";
}

Direction predicted_direction(MetricKind kind) {
  return kind == MetricKind::MeanReversion ? Direction::Greater : Direction::Less;
}

namespace {

double mean_of(std::span<const double> v) { return simd::sum(v) / static_cast<double>(v.size()); }

double sd_of(std::span<const double> v) {
  const double m = mean_of(v);
  return std::sqrt(simd::centered_dot(v, m, v, m) / static_cast<double>(v.size() - 1));
}

// Median of a scratch buffer; reorders it.
double median_inplace(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double statistic_inplace(std::vector<double>& v, Statistic s) {
  switch (s) {
    case Statistic::Median: return median_inplace(v);
    case Statistic::Sd: return sd_of(v);
    case Statistic::Mean: return mean_of(v);
  }
  return 0.0;
}

// Linear interpolation between order statistics of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void check_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 pairs");
}

std::vector<double> differences(std::span<const double> x, std::span<const double> y) {
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) d[i] = x[i] - y[i];
  return d;
}

}  // namespace

double median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "median of no values");
  std::vector<double> v(values.begin(), values.end());
  return median_inplace(v);
}

double compute_statistic(std::span<const double> values, Statistic statistic) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "statistic of no values");
  if (statistic == Statistic::Sd && values.size() < 2) {
    throw Error(ErrorCode::TooFewRows, "sd needs at least 2 values");
  }
  std::vector<double> v(values.begin(), values.end());
  return statistic_inplace(v, statistic);
}

Interval bootstrap_ci(std::span<const double> values, Statistic statistic,
                      const BootstrapConfig& config) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "bootstrap of no values");
  if (statistic == Statistic::Sd && values.size() < 2) {
    throw Error(ErrorCode::TooFewRows, "sd bootstrap needs at least 2 values");
  }
  if (config.iterations < 1) throw Error(ErrorCode::InvalidParams, "iterations must be >= 1");
  if (!(config.level > 0.0 && config.level < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "level must lie in (0, 1)");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();

  std::vector<double> replicates(config.iterations);
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (config.iterations + kBlock - 1) / kBlock;
  parallel_for(blocks, config.threads, [&](std::size_t block) {
    std::vector<double> sample(k);
    const std::size_t end = std::min(config.iterations, (block + 1) * kBlock);
    for (std::size_t r = block * kBlock; r < end; ++r) {
      for (std::size_t j = 0; j < k; ++j) sample[j] = sorted[resample_index(config.seed, r, j, k)];
      replicates[r] = statistic_inplace(sample, statistic);
    }
  });
  return percentile_interval(replicates, config.level);
}

Interval percentile_interval(std::vector<double>& replicates, double level) {
  if (replicates.empty()) throw Error(ErrorCode::EmptyInput, "no bootstrap replicates");
  std::sort(replicates.begin(), replicates.end());
  const double alpha = 1.0 - level;
  return {quantile_sorted(replicates, 0.5 * alpha), quantile_sorted(replicates, 1.0 - 0.5 * alpha)};
}

std::size_t resample_index(std::uint64_t seed, std::size_t replicate, std::size_t j, std::size_t k) {
  return static_cast<std::size_t>(rng::CounterRng(rng::combine(seed, replicate)).below(j, k));
}

TTest paired_t_test(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y);
  const auto d = differences(x, y);
  const double k = static_cast<double>(d.size());
  const double sd = sd_of(d);
  if (sd == 0.0) throw Error(ErrorCode::ZeroVariance, "all paired differences are equal");
  TTest out;
  out.t = mean_of(d) / (sd / std::sqrt(k));
  out.df = k - 1.0;
  out.p = dist::student_t_two_sided(out.t, out.df);
  return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
  check_paired(x, y);
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    if (diff != 0.0) d.push_back(diff);
  }
  if (d.empty()) throw Error(ErrorCode::AllZeroDifferences, "every paired difference is zero");
  const std::size_t m = d.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(d[a]) < std::fabs(d[b]); });

  // Doubled mid-ranks keep everything integral.
  std::vector<long> rank2(m);
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && std::fabs(d[order[j + 1]]) == std::fabs(d[order[i]])) ++j;
    const long r2 = static_cast<long>(i + j + 2);
    for (std::size_t t = i; t <= j; ++t) rank2[order[t]] = r2;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  long w2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] > 0) w2 += rank2[i];
  }

  WilcoxonResult out;
  out.nonzero = m;
  out.w = 0.5 * static_cast<double>(w2);
  if (m <= kWilcoxonExactLimit) {
    const long max_sum = std::accumulate(rank2.begin(), rank2.end(), 0L);
    std::vector<double> counts(static_cast<std::size_t>(max_sum) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (long r : rank2) {
      for (long s = reach; s >= 0; --s) {
        if (counts[static_cast<std::size_t>(s)] != 0.0) counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
      }
      reach += r;
    }
    double lower = 0.0, upper = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      if (s <= w2) lower += counts[static_cast<std::size_t>(s)];
      if (s >= w2) upper += counts[static_cast<std::size_t>(s)];
    }
    const double total = std::ldexp(1.0, static_cast<int>(m));
    out.p = std::min(1.0, 2.0 * std::min(lower, upper) / total);
    out.exact = true;
  } else {
    const double mm = static_cast<double>(m);
    const double mean = mm * (mm + 1.0) / 4.0;
    const double var = mm * (mm + 1.0) * (2.0 * mm + 1.0) / 24.0 - tie_term / 48.0;
    const double diff = out.w - mean;
    const double corrected = std::fabs(diff) <= 0.5 ? 0.0 : diff - std::copysign(0.5, diff);
    out.p = var > 0.0 ? std::min(1.0, dist::normal_two_sided(corrected / std::sqrt(var))) : 1.0;
    out.exact = false;
  }
  return out;
}

double cohens_d_paired(std::span<const double> diffs) {
  if (diffs.size() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 differences");
  const double sd = sd_of(diffs);
  if (sd == 0.0) throw Error(ErrorCode::ZeroVariance, "all paired differences are equal");
  return mean_of(diffs) / sd;
}

BrownForsytheResult brown_forsythe(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::TooFewRows, "each group needs 2 values");
  auto deviations = [](std::span<const double> g) {
    const double med = median(g);
    std::vector<double> z(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) z[i] = std::fabs(g[i] - med);
    return z;
  };
  const auto za = deviations(a);
  const auto zb = deviations(b);
  const double na = static_cast<double>(za.size()), nb = static_cast<double>(zb.size());
  const double ma = mean_of(za), mb = mean_of(zb);
  const double grand = (simd::sum(za) + simd::sum(zb)) / (na + nb);
  const double between = na * (ma - grand) * (ma - grand) + nb * (mb - grand) * (mb - grand);
  const double within = simd::centered_dot(za, ma, za, ma) + simd::centered_dot(zb, mb, zb, mb);

  BrownForsytheResult out;
  out.df1 = 1.0;
  out.df2 = na + nb - 2.0;
  if (within == 0.0) {
    if (between == 0.0) {
      throw Error(ErrorCode::DegenerateDeviations, "absolute deviations are all equal");
    }
    out.f = std::numeric_limits<double>::infinity();
    out.infinite = true;
    out.p = 0.0;
    return out;
  }
  out.f = (between / out.df1) / (within / out.df2);
  out.p = dist::f_survival(out.f, out.df1, out.df2);
  return out;
}

DirectionCount direction_proportion(std::span<const double> treatment,
                                    std::span<const double> control, Direction direction) {
  if (treatment.size() != control.size()) {
    throw Error(ErrorCode::LengthMismatch, "treatment and control differ in length");
  }
  DirectionCount out;
  out.total = treatment.size();
  for (std::size_t i = 0; i < treatment.size(); ++i) {
    if (treatment[i] == control[i]) {
      ++out.ties;
    } else if ((direction == Direction::Less) == (treatment[i] < control[i])) {
      ++out.count;
    }
  }
  out.fraction = out.total ? static_cast<double>(out.count) / static_cast<double>(out.total) : 0.0;
  return out;
}

double binomial_test(std::size_t successes, std::size_t n, double p0) {
  if (n < 1 || successes > n) throw Error(ErrorCode::InvalidParams, "need 0 <= successes <= n, n >= 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw Error(ErrorCode::InvalidParams, "p0 must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  auto log_pmf = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0) +
           kk * std::log(p0) + (nn - kk) * std::log1p(-p0);
  };
  const double observed = log_pmf(successes);
  // Relative slack so outcomes equal to the observed one in exact arithmetic
  // are not lost to rounding.
  constexpr double kSlack = 1e-7;
  double p = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double lp = log_pmf(k);
    if (lp <= observed + kSlack) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

// ---------------------------------------------------------------------------

namespace {

const MetricValue& metric_of(const ItemMetrics& m, MetricKind kind) {
  switch (kind) {
    case MetricKind::Tau: return m.tau;
    case MetricKind::VarianceChange: return m.var_change_pct;
    case MetricKind::MeanReversion: return m.mean_reversion;
  }
  return m.tau;
}

BootstrapConfig sub_config(const BootstrapConfig& base, MetricKind kind, const char* part) {
  BootstrapConfig c = base;
  c.seed = rng::derive(base.seed, "compare/" + to_string(kind) + "/" + part);
  return c;
}

MetricComparison compare_metric(MetricKind kind, const std::vector<std::string>& items,
                                const std::map<std::string, const ItemMetrics*>& t_by_id,
                                const std::map<std::string, const ItemMetrics*>& c_by_id,
                                const BootstrapConfig& boot) {
  MetricComparison mc;
  mc.kind = kind;
  std::vector<double> tv, cv;
  for (const auto& id : items) {
    const auto& t = metric_of(*t_by_id.at(id), kind);
    const auto& c = metric_of(*c_by_id.at(id), kind);
    if (!t.ok() || !c.ok()) {
      mc.dropped.push_back(id + ": " + (!t.ok() ? "treatment " + t.error : "control " + c.error));
      continue;
    }
    mc.item_ids.push_back(id);
    tv.push_back(*t.value);
    cv.push_back(*c.value);
  }
  if (tv.size() < 2) {
    mc.error = "TooFewItems: " + std::to_string(tv.size()) + " item(s) with this metric in both arms";
    return mc;
  }
  const auto diffs = differences(tv, cv);
  mc.treatment = {median(tv), bootstrap_ci(tv, Statistic::Median, sub_config(boot, kind, "treatment"))};
  mc.control = {median(cv), bootstrap_ci(cv, Statistic::Median, sub_config(boot, kind, "control"))};
  mc.median_diff = median(diffs);
  mc.median_diff_ci = bootstrap_ci(diffs, Statistic::Median, sub_config(boot, kind, "difference"));
  mc.t_test = attempt([&] { return paired_t_test(tv, cv); });
  mc.wilcoxon = attempt([&] { return wilcoxon_signed_rank(tv, cv); });
  mc.cohens_d = attempt([&] { return cohens_d_paired(diffs); });
  mc.less = direction_proportion(tv, cv, Direction::Less);
  mc.greater = direction_proportion(tv, cv, Direction::Greater);
  if (kind == MetricKind::VarianceChange) {
    DispersionComparison dc;
    dc.sd_treatment = sd_of(tv);
    dc.sd_control = sd_of(cv);
    dc.ci_treatment = bootstrap_ci(tv, Statistic::Sd, sub_config(boot, kind, "sd/treatment"));
    dc.ci_control = bootstrap_ci(cv, Statistic::Sd, sub_config(boot, kind, "sd/control"));
    dc.sd_diff = dc.sd_treatment - dc.sd_control;
    dc.brown_forsythe = attempt([&] { return brown_forsythe(tv, cv); });
    for (std::size_t i = 0; i < tv.size(); ++i) {
      dc.increased_treatment += tv[i] > 0;
      dc.decreased_treatment += tv[i] < 0;
      dc.increased_control += cv[i] > 0;
      dc.decreased_control += cv[i] < 0;
    }
    mc.dispersion = dc;
  }
  return mc;
}

}  // namespace

ComparisonReport compare_arms(const std::vector<ItemMetrics>& treatment,
                              const std::vector<ItemMetrics>& control, const CompareConfig& config) {
  std::map<std::string, const ItemMetrics*> t_by_id, c_by_id;
  for (const auto& m : treatment) t_by_id[m.item_id] = &m;
  for (const auto& m : control) c_by_id[m.item_id] = &m;
  ComparisonReport report;
  report.config = config;
  for (const auto& [id, m] : t_by_id) {
    (c_by_id.count(id) ? report.items : report.treatment_only).push_back(id);
  }
  for (const auto& [id, m] : c_by_id) {
    if (!t_by_id.count(id)) report.control_only.push_back(id);
  }
  if (report.items.size() < 2) {
    throw Error(ErrorCode::TooFewItems,
                std::to_string(report.items.size()) + " item(s) shared by treatment and control");
  }
  for (auto kind : {MetricKind::Tau, MetricKind::VarianceChange, MetricKind::MeanReversion}) {
    report.metrics.push_back(compare_metric(kind, report.items, t_by_id, c_by_id, config.bootstrap));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

using nlohmann::ordered_json;

ordered_json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json interval_json(const Interval& i) { return ordered_json::array({num(i.lo), num(i.hi)}); }

template <class T, class Fn>
ordered_json fallible_json(const Fallible<T>& f, Fn render) {
  if (!f.ok()) return ordered_json{{"error", f.error}};
  return render(*f.value);
}

ordered_json direction_json(const DirectionCount& d) {
  return {{"count", d.count}, {"ties", d.ties}, {"total", d.total}, {"fraction", num(d.fraction)}};
}

}  // namespace

nlohmann::ordered_json to_json(const ComparisonReport& report) {
  ordered_json j;
  j["metadata"] = {
      {"bootstrap_method", "percentile"},
      {"bootstrap_iterations", report.config.bootstrap.iterations},
      {"bootstrap_level", report.config.bootstrap.level},
      {"seed", report.config.bootstrap.seed},
      {"median_diff_ci", "bootstrap over paired item differences"},
      {"tau_mode", report.config.tau_mode},
      {"wilcoxon", "exact for <= 25 nonzero differences, else normal approximation with tie "
                   "and continuity corrections"},
  };
  j["items"] = report.items;
  j["warnings"] = {{"treatment_only_items", report.treatment_only},
                   {"control_only_items", report.control_only}};
  ordered_json metrics = ordered_json::object();
  for (const auto& mc : report.metrics) {
    ordered_json m;
    if (!mc.error.empty()) {
      m["error"] = mc.error;
      m["dropped_items"] = mc.dropped;
      metrics[to_string(mc.kind)] = m;
      continue;
    }
    m["item_count"] = mc.item_ids.size();
    m["dropped_items"] = mc.dropped;
    m["treatment"] = {{"median", num(mc.treatment.median)}, {"ci", interval_json(mc.treatment.ci)}};
    m["control"] = {{"median", num(mc.control.median)}, {"ci", interval_json(mc.control.ci)}};
    m["median_diff"] = {{"value", num(mc.median_diff)}, {"ci", interval_json(mc.median_diff_ci)}};
    m["paired_t"] = fallible_json(mc.t_test, [](const TTest& t) {
      return ordered_json{{"t", num(t.t)}, {"df", num(t.df)}, {"p", num(t.p)}};
    });
    m["wilcoxon"] = fallible_json(mc.wilcoxon, [](const WilcoxonResult& w) {
      return ordered_json{{"W", num(w.w)}, {"p", num(w.p)}, {"nonzero", w.nonzero}, {"exact", w.exact}};
    });
    m["cohens_d"] = fallible_json(mc.cohens_d, [](double d) { return num(d); });
    m["direction"] = {{"predicted", to_string(predicted_direction(mc.kind))},
                      {"lt", direction_json(mc.less)},
                      {"gt", direction_json(mc.greater)}};
    if (mc.dispersion) {
      const auto& d = *mc.dispersion;
      m["sd_across_items"] = {
          {"treatment", {{"sd", num(d.sd_treatment)}, {"ci", interval_json(d.ci_treatment)}}},
          {"control", {{"sd", num(d.sd_control)}, {"ci", interval_json(d.ci_control)}}},
          {"sd_diff", num(d.sd_diff)},
          {"brown_forsythe", fallible_json(d.brown_forsythe, [](const BrownForsytheResult& b) {
             return ordered_json{{"F", num(b.f)}, {"df1", num(b.df1)}, {"df2", num(b.df2)},
                                 {"p", num(b.p)}, {"infinite", b.infinite}};
           })},
      };
      m["sign_counts"] = {
          {"treatment", {{"increased", d.increased_treatment}, {"decreased", d.decreased_treatment}}},
          {"control", {{"increased", d.increased_control}, {"decreased", d.decreased_control}}},
      };
    }
    metrics[to_string(mc.kind)] = m;
  }
  j["metrics"] = metrics;
  return j;
}

namespace {

std::string format_p(double p) {
  if (p < 0.001) return "<.001";
  auto s = io::format_fixed(p, 3);
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return s;
}

std::string with_ci(double v, const Interval& ci, int decimals) {
  return io::format_fixed(v, decimals) + " [" + io::format_fixed(ci.lo, decimals) + ", " +
         io::format_fixed(ci.hi, decimals) + "]";
}

std::string signed_fixed(double v, int decimals) {
  auto s = io::format_fixed(v, decimals);
  return (v > 0 && s.find_first_not_of("0.") != std::string::npos) ? "+" + s : s;
}

}  // namespace

std::string render_table(const ComparisonReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Metric", "Treatment", "Control", "Median Diff.", "p"});
  for (const auto& mc : report.metrics) {
    const int dec = mc.kind == MetricKind::VarianceChange ? 1 : 3;
    const std::string label = mc.kind == MetricKind::Tau              ? "Kendall tau"
                              : mc.kind == MetricKind::VarianceChange ? "Variance change (%)"
                                                                      : "Mean reversion";
    if (!mc.error.empty()) {
      rows.push_back({label, mc.error, "", "", ""});
      continue;
    }
    rows.push_back({label, with_ci(mc.treatment.median, mc.treatment.ci, dec),
                    with_ci(mc.control.median, mc.control.ci, dec), signed_fixed(mc.median_diff, dec),
                    mc.t_test.ok() ? format_p(mc.t_test.value->p) : "n/a"});
    if (mc.dispersion) {
      const auto& d = *mc.dispersion;
      rows.push_back({"  SD across items (%)", with_ci(d.sd_treatment, d.ci_treatment, 1),
                      with_ci(d.sd_control, d.ci_control, 1), signed_fixed(d.sd_diff, 1),
                      d.brown_forsythe.ok() ? format_p(d.brown_forsythe.value->p) : "n/a"});
    }
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      out << rows[i][c];
      if (c + 1 < rows[i].size()) out << std::string(width[c] - rows[i][c].size() + 2, ' ');
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out << std::string(total - 2, '-') << '\n';
    }
  }
  out << "\nItems: " << report.items.size() << "; medians with " << report.config.bootstrap.iterations
      << "-iteration percentile bootstrap " << io::format_fixed(100 * report.config.bootstrap.level, 0)
      << "% CIs. p: paired t (central tendency), Brown-Forsythe (dispersion).\n";
  for (const auto& mc : report.metrics) {
    if (!mc.error.empty()) continue;
    const auto& d = predicted_direction(mc.kind) == Direction::Less ? mc.less : mc.greater;
    out << to_string(mc.kind) << ": treatment " << (predicted_direction(mc.kind) == Direction::Less ? "<" : ">")
        << " control on " << d.count << " of " << d.total << " items (" << d.ties << " ties)";
    if (mc.cohens_d.ok()) out << ", Cohen's d = " << io::format_fixed(*mc.cohens_d.value, 2);
    if (mc.wilcoxon.ok()) out << ", Wilcoxon p = " << format_p(mc.wilcoxon.value->p);
    out << '\n';
  }
  return out.str();
}

}  // namespace delib
