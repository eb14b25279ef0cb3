#include "delib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "delib/error.hpp"
#include "delib/rng.hpp"
#include "delib/simd.hpp"

namespace delib {

void PerturbationConfig::validate() const {
  if (!(epsilon_max > 0.0 && epsilon_max < 1.0)) {
    throw Error(ErrorCode::InvalidParams, "epsilon_max must lie in (0, 1)");
  }
}

std::string to_string(PerturbationConfig::Mode mode) {
  return mode == PerturbationConfig::Mode::Perturbed ? "perturbed" : "deterministic_expectation";
}

std::vector<double> unit_draws(std::uint64_t seed, std::span<const std::uint64_t> counters) {
  const rng::CounterRng gen(rng::derive(seed, "kendall/epsilon"));
  std::vector<double> out(counters.size());
  for (std::size_t i = 0; i < counters.size(); ++i) out[i] = gen.uniform(counters[i]);
  return out;
}

namespace {

std::int64_t pairs_of(std::int64_t t) { return t * (t - 1) / 2; }

// Sum of C(t,2) over runs of equal values in an already sorted sequence,
// where `same(i, j)` compares positions i, j.
template <class Same>
std::int64_t tied_pairs(std::size_t n, Same same) {
  std::int64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i < n; ++i) {
    if (same(i - 1, i)) {
      ++run;
    } else {
      total += pairs_of(static_cast<std::int64_t>(run));
      run = 1;
    }
  }
  return total + pairs_of(static_cast<std::int64_t>(run));
}

// Bottom-up merge sort of `values`; returns the number of pairs i < j with
// values[i] > values[j].
std::int64_t sort_counting_inversions(std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<double> buffer(n);
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (values[j] < values[i]) {
          swaps += static_cast<std::int64_t>(mid - i);
          buffer[k++] = values[j++];
        } else {
          buffer[k++] = values[i++];
        }
      }
      while (i < mid) buffer[k++] = values[i++];
      while (j < hi) buffer[k++] = values[j++];
    }
    values.swap(buffer);
  }
  return swaps;
}

void check_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(x.size()) + " vs " + std::to_string(y.size()));
  }
  if (x.size() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 paired values");
}

}  // namespace

PairSums pair_sums_merge(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  const auto tied_x = tied_pairs(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
  const auto tied_xy = tied_pairs(n, [&](std::size_t i, std::size_t j) {
    return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]];
  });
  std::vector<double> ys(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const auto discordant = sort_counting_inversions(ys);
  const auto tied_y = tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });
  const auto total = pairs_of(static_cast<std::int64_t>(n));
  return {total - tied_x - tied_y + tied_xy - 2 * discordant, tied_xy};
}

PairSums pair_sums_pairwise(std::span<const double> x, std::span<const double> y) {
  PairSums out;
  for (std::size_t a = 0; a + 1 < x.size(); ++a) {
    const auto s = simd::sign_sums(x[a], y[a], x.subspan(a + 1), y.subspan(a + 1));
    out.sign_product += s.product;
    out.joint_ties += s.joint_ties;
  }
  return out;
}

namespace {

template <class PairFn>
double tau_impl(std::span<const double> pre, std::span<const double> post,
                const PerturbationConfig& config, std::span<const std::uint64_t> counters,
                PairFn pair_fn) {
  check_lengths(pre, post);
  config.validate();
  const std::size_t n = pre.size();
  const double total = static_cast<double>(pairs_of(static_cast<std::int64_t>(n)));
  if (config.mode == PerturbationConfig::Mode::DeterministicExpectation) {
    const auto s = pair_fn(pre, post);
    return static_cast<double>(s.sign_product + s.joint_ties) / total;
  }
  std::vector<std::uint64_t> default_counters;
  if (counters.empty()) {
    default_counters.resize(n);
    std::iota(default_counters.begin(), default_counters.end(), std::uint64_t{0});
    counters = default_counters;
  } else if (counters.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "counter count differs from vector length");
  }
  const auto draws = unit_draws(config.seed, counters);
  std::vector<double> tpre(n), tpost(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eps = config.epsilon_max * draws[i];
    tpre[i] = pre[i] + eps;
    tpost[i] = post[i] + eps;
  }
  return static_cast<double>(pair_fn(tpre, tpost).sign_product) / total;
}

}  // namespace

double kendall_tau(std::span<const double> pre, std::span<const double> post,
                   const PerturbationConfig& config, std::span<const std::uint64_t> counters) {
  return tau_impl(pre, post, config, counters, [](auto x, auto y) { return pair_sums_merge(x, y); });
}

double kendall_tau_pairwise(std::span<const double> pre, std::span<const double> post,
                            const PerturbationConfig& config,
                            std::span<const std::uint64_t> counters) {
  return tau_impl(pre, post, config, counters, [](auto x, auto y) { return pair_sums_pairwise(x, y); });
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::TooFewRows, "need at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = simd::sum(values) / n;
  return simd::centered_dot(values, mean, values, mean) / (n - 1.0);
}

double variance_change(std::span<const double> pre, std::span<const double> post) {
  check_lengths(pre, post);
  const double vpre = sample_variance(pre);
  if (vpre == 0.0) throw Error(ErrorCode::ZeroPreVariance, "pre-survey variance is zero");
  return 100.0 * (sample_variance(post) - vpre) / vpre;
}

double mean_reversion(std::span<const double> pre, std::span<const double> post) {
  check_lengths(pre, post);
  const std::size_t n = pre.size();
  std::vector<double> delta(n);
  for (std::size_t i = 0; i < n; ++i) delta[i] = post[i] - pre[i];
  const double mx = simd::sum(pre) / static_cast<double>(n);
  const double md = simd::sum(delta) / static_cast<double>(n);
  const double sxx = simd::centered_dot(pre, mx, pre, mx);
  const double sdd = simd::centered_dot(delta, md, delta, md);
  if (sxx == 0.0) throw Error(ErrorCode::DegenerateVariance, "pre-survey opinions are constant");
  if (sdd == 0.0) throw Error(ErrorCode::DegenerateVariance, "opinion change is constant");
  const double sxd = simd::centered_dot(pre, mx, delta, md);
  return std::clamp(-sxd / (std::sqrt(sxx) * std::sqrt(sdd)), -1.0, 1.0);
}

ItemMetrics item_metrics(const ItemPairedResponses& item, const PerturbationConfig& config) {
  if (item.n() < 2) {
    throw Error(ErrorCode::TooFewRows, "item " + item.item_id + " has " + std::to_string(item.n()) +
                                           " paired respondent(s)");
  }
  const auto pre = item.pre_values();
  const auto post = item.post_values();
  std::vector<std::uint64_t> counters;
  counters.reserve(item.n());
  for (const auto& r : item.rows) counters.push_back(rng::hash_string(r.participant_id));

  ItemMetrics m;
  m.item_id = item.item_id;
  m.n = item.n();
  m.var_pre = sample_variance(pre);
  m.var_post = sample_variance(post);
  m.tau = attempt([&] { return kendall_tau(pre, post, config, counters); });
  m.var_change_pct = attempt([&] { return variance_change(pre, post); });
  m.mean_reversion = attempt([&] { return mean_reversion(pre, post); });
  return m;
}

}  // namespace delib
