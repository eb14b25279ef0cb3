#include <array>

#include "delib/simd.hpp"

namespace delib::simd::scalar {

namespace {

inline int sign_of(double a, double b) noexcept { return (a > b) - (a < b); }

inline double combine(const std::array<double, 4>& lane) noexcept {
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

}  // namespace

SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys) {
  SignSums out;
  for (std::size_t b = 0; b < xs.size(); ++b) {
    out.product += sign_of(ax, xs[b]) * sign_of(ay, ys[b]);
    out.joint_ties += (ax == xs[b]) & (ay == ys[b]);
  }
  return out;
}

double sum(std::span<const double> xs) {
  std::array<double, 4> lane{};
  for (std::size_t i = 0; i < xs.size(); ++i) lane[i & 3] += xs[i];
  return combine(lane);
}

double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my) {
  std::array<double, 4> lane{};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    const double p = dx * dy;
    lane[i & 3] += p;
  }
  return combine(lane);
}

}  // namespace delib::simd::scalar
