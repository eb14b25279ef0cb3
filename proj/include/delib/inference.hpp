#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "delib/error.hpp"
#include "delib/metrics.hpp"
#include "json.hpp"

namespace delib {

enum class Statistic { Median, Sd, Mean };

std::string to_string(Statistic s);

/// Median (mean of the middle pair for even sizes), sample SD (n-1) or mean.
double compute_statistic(std::span<const double> values, Statistic statistic);

double median(std::span<const double> values);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapConfig {
  std::size_t iterations = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Percentile bootstrap interval. Replicate r draws its indices from a
/// generator seeded with combine(seed, r), over the sorted input, so the
/// result depends on the multiset of values and the seed only (not on input
/// order or thread count). Quantiles interpolate linearly between order
/// statistics. Throws EmptyInput (no values), TooFewRows (SD with < 2
/// values) or InvalidParams.
Interval bootstrap_ci(std::span<const double> values, Statistic statistic,
                      const BootstrapConfig& config);

/// Percentile interval of bootstrap replicates (sorted in place).
Interval percentile_interval(std::vector<double>& replicates, double level);

/// Index drawn for position j of bootstrap replicate r over k items.
std::size_t resample_index(std::uint64_t seed, std::size_t replicate, std::size_t j, std::size_t k);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

/// Paired t test on x - y. Throws LengthMismatch, TooFewRows, ZeroVariance.
TTest paired_t_test(std::span<const double> x, std::span<const double> y);

struct WilcoxonResult {
  double w = 0.0;        // sum of ranks of positive differences
  double p = 1.0;
  std::size_t nonzero = 0;
  bool exact = true;
};

/// Largest count of nonzero differences that uses the exact null distribution.
inline constexpr std::size_t kWilcoxonExactLimit = 25;

/// Signed-rank test on x - y: zeros dropped, ties mid-ranked. Exact
/// enumeration for up to 25 nonzero differences, otherwise the normal
/// approximation with tie and continuity corrections.
/// Throws LengthMismatch, TooFewRows, AllZeroDifferences.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y);

/// mean(d) / sd(d). Throws TooFewRows, ZeroVariance.
double cohens_d_paired(std::span<const double> diffs);

struct BrownForsytheResult {
  double f = 0.0;      // +inf when within-group deviations are all equal
  double df1 = 1.0;
  double df2 = 0.0;
  double p = 1.0;
  bool infinite = false;
};

/// One-way ANOVA on |value - group median|. Throws TooFewRows (a group with
/// fewer than 2 values) or DegenerateDeviations (no variation at all).
BrownForsytheResult brown_forsythe(std::span<const double> a, std::span<const double> b);

enum class Direction { Less, Greater };

std::string to_string(Direction d);

struct DirectionCount {
  std::size_t count = 0;  // strict inequalities in the given direction
  std::size_t ties = 0;
  std::size_t total = 0;
  double fraction = 0.0;  // count / total
};

DirectionCount direction_proportion(std::span<const double> treatment,
                                    std::span<const double> control, Direction direction);

/// Two-sided exact binomial test: sums every outcome no more likely than the
/// observed one. Throws InvalidParams on bad arguments.
double binomial_test(std::size_t successes, std::size_t n, double p0 = 0.5);

// ---------------------------------------------------------------------------
// Treatment vs control across items.

struct ArmSummary {
  double median = 0.0;
  Interval ci;
};

struct DispersionComparison {
  double sd_treatment = 0.0;
  double sd_control = 0.0;
  Interval ci_treatment;
  Interval ci_control;
  double sd_diff = 0.0;
  Fallible<BrownForsytheResult> brown_forsythe;
  std::size_t increased_treatment = 0, decreased_treatment = 0;
  std::size_t increased_control = 0, decreased_control = 0;
};

enum class MetricKind { Tau, VarianceChange, MeanReversion };

std::string to_string(MetricKind kind);

/// Direction in which deliberation is expected to move a metric relative to
/// control (tau lower, mean reversion higher, variance change lower).
Direction predicted_direction(MetricKind kind);

struct MetricComparison {
  MetricKind kind = MetricKind::Tau;
  std::string error;  // non-empty if the section could not be computed
  std::vector<std::string> item_ids;
  std::vector<std::string> dropped;  // items lacking the metric in an arm, with reason
  ArmSummary treatment;
  ArmSummary control;
  double median_diff = 0.0;
  Interval median_diff_ci;
  Fallible<TTest> t_test;
  Fallible<WilcoxonResult> wilcoxon;
  Fallible<double> cohens_d;
  DirectionCount less;
  DirectionCount greater;
  std::optional<DispersionComparison> dispersion;  // variance change only
};

struct CompareConfig {
  BootstrapConfig bootstrap;
  std::string tau_mode;  // recorded in the report
};

struct ComparisonReport {
  std::vector<std::string> items;           // aligned item ids
  std::vector<std::string> treatment_only;  // dropped, reported as warnings
  std::vector<std::string> control_only;
  std::vector<MetricComparison> metrics;    // tau, variance change, mean reversion
  CompareConfig config;
};

/// Aligns the arms by item id (intersection) and runs the full battery.
/// Throws TooFewItems when fewer than 2 items are shared.
ComparisonReport compare_arms(const std::vector<ItemMetrics>& treatment,
                              const std::vector<ItemMetrics>& control, const CompareConfig& config);

nlohmann::ordered_json to_json(const ComparisonReport& report);

/// Aligned plain-text table: Metric | Treatment | Control | Median Diff. | p.
std::string render_table(const ComparisonReport& report);

}  // namespace delib
