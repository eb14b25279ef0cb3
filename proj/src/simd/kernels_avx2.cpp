#include "delib/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define DELIB_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#else
#define DELIB_HAVE_AVX2_KERNELS 0
#endif

namespace delib::simd::avx2 {

#if DELIB_HAVE_AVX2_KERNELS

bool available() noexcept { return true; }

namespace {

__attribute__((target("avx2"))) inline double combine(__m256d v) noexcept {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, v);
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

__attribute__((target("avx2"))) inline __m256d sign_vec(__m256d a, __m256d b, __m256d one) noexcept {
  const __m256d gt = _mm256_and_pd(_mm256_cmp_pd(a, b, _CMP_GT_OQ), one);
  const __m256d lt = _mm256_and_pd(_mm256_cmp_pd(a, b, _CMP_LT_OQ), one);
  return _mm256_sub_pd(gt, lt);
}

}  // namespace

__attribute__((target("avx2")))
SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d vax = _mm256_set1_pd(ax);
  const __m256d vay = _mm256_set1_pd(ay);
  __m256d prod = _mm256_setzero_pd();
  __m256d ties = _mm256_setzero_pd();
  std::size_t b = 0;
  for (; b + 4 <= n; b += 4) {
    const __m256d x = _mm256_loadu_pd(xs.data() + b);
    const __m256d y = _mm256_loadu_pd(ys.data() + b);
    prod = _mm256_add_pd(prod, _mm256_mul_pd(sign_vec(vax, x, one), sign_vec(vay, y, one)));
    const __m256d both = _mm256_and_pd(_mm256_cmp_pd(vax, x, _CMP_EQ_OQ), _mm256_cmp_pd(vay, y, _CMP_EQ_OQ));
    ties = _mm256_add_pd(ties, _mm256_and_pd(both, one));
  }
  // Lane partials are small exact integers.
  SignSums out;
  out.product = static_cast<std::int64_t>(combine(prod));
  out.joint_ties = static_cast<std::int64_t>(combine(ties));
  for (; b < n; ++b) {
    out.product += ((ax > xs[b]) - (ax < xs[b])) * ((ay > ys[b]) - (ay < ys[b]));
    out.joint_ties += (ax == xs[b]) & (ay == ys[b]);
  }
  return out;
}

__attribute__((target("avx2"))) double sum(std::span<const double> xs) {
  const std::size_t n = xs.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(xs.data() + i));
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) lane[i & 3] += xs[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

__attribute__((target("avx2")))
double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my) {
  const std::size_t n = xs.size();
  const __m256d vmx = _mm256_set1_pd(mx);
  const __m256d vmy = _mm256_set1_pd(my);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs.data() + i), vmx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys.data() + i), vmy);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(dx, dy));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    const double p = dx * dy;
    lane[i & 3] += p;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

#else

bool available() noexcept { return false; }
SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys) {
  return scalar::sign_sums(ax, ay, xs, ys);
}
double sum(std::span<const double> xs) { return scalar::sum(xs); }
double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my) {
  return scalar::centered_dot(xs, mx, ys, my);
}

#endif

}  // namespace delib::simd::avx2
