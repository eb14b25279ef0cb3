#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "delib/error.hpp"
#include "delib/survey.hpp"

namespace delib {

/// How ties in Kendall's tau are broken.
///
/// Perturbed: participant i gets one draw eps_i ~ Uniform(0, epsilon_max),
/// added to both its pre and post score. Pairs tied in both surveys become
/// concordant; pairs tied in one survey get a random sign.
///
/// DeterministicExpectation: the same rule with each random sign replaced by
/// its expectation, so joint ties count +1, one-sided ties count 0.
struct PerturbationConfig {
  enum class Mode { Perturbed, DeterministicExpectation };

  Mode mode = Mode::DeterministicExpectation;
  std::uint64_t seed = 0;
  double epsilon_max = 0.1;

  static PerturbationConfig perturbed(std::uint64_t seed, double epsilon_max = 0.1) {
    return {Mode::Perturbed, seed, epsilon_max};
  }
  static PerturbationConfig deterministic() { return {}; }

  /// Throws Error(InvalidParams) unless epsilon_max lies in (0, 1).
  void validate() const;
};

std::string to_string(PerturbationConfig::Mode mode);

/// Uniform(0,1) draws behind eps_i; draw i depends only on (seed, counters[i]).
std::vector<double> unit_draws(std::uint64_t seed, std::span<const std::uint64_t> counters);

/// Sum over pairs a < b of sign(x_a - x_b) * sign(y_a - y_b), plus the number
/// of pairs tied in both vectors.
struct PairSums {
  std::int64_t sign_product = 0;
  std::int64_t joint_ties = 0;
};

/// O(n log n): sort by (x, y), then count inversions in y with a merge sort.
PairSums pair_sums_merge(std::span<const double> x, std::span<const double> y);

/// O(n^2) direct pair enumeration over the SIMD sign kernel.
PairSums pair_sums_pairwise(std::span<const double> x, std::span<const double> y);

/// Kendall's tau, normalized by C(n, 2). `counters` identify participants for
/// the perturbation draws; empty means 0..n-1. Throws LengthMismatch,
/// TooFewRows (n < 2) or InvalidParams.
double kendall_tau(std::span<const double> pre, std::span<const double> post,
                   const PerturbationConfig& config, std::span<const std::uint64_t> counters = {});

/// Same result through the pairwise enumeration.
double kendall_tau_pairwise(std::span<const double> pre, std::span<const double> post,
                            const PerturbationConfig& config,
                            std::span<const std::uint64_t> counters = {});

/// Sample variance with the n-1 denominator.
double sample_variance(std::span<const double> values);

/// 100 * (Var_post - Var_pre) / Var_pre. Throws ZeroPreVariance.
double variance_change(std::span<const double> pre, std::span<const double> post);

/// -Pearson(pre, post - pre). Throws DegenerateVariance when Var(pre) or
/// Var(post - pre) is zero.
double mean_reversion(std::span<const double> pre, std::span<const double> post);

using MetricValue = Fallible<double>;

struct ItemMetrics {
  std::string item_id;
  std::size_t n = 0;
  MetricValue tau;
  double var_pre = 0.0;
  double var_post = 0.0;
  MetricValue var_change_pct;
  MetricValue mean_reversion;
};

/// Batches the three metrics; per-metric failures are recorded, not thrown.
/// Perturbation draws are keyed by a hash of each participant id. Throws
/// TooFewRows when n < 2.
ItemMetrics item_metrics(const ItemPairedResponses& item, const PerturbationConfig& config);

}  // namespace delib
