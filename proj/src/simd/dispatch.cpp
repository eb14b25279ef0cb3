#include <atomic>
#include <cstdlib>
#include <cstring>

#include "delib/simd.hpp"

namespace delib::simd {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  return avx2::available() && __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() noexcept {
  const char* env = std::getenv("DELIB_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() noexcept {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() noexcept { return initial_isa(); }

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

Isa set_active_isa(Isa isa) noexcept {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
  active().store(isa, std::memory_order_relaxed);
  return isa;
}

SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys) {
  return active_isa() == Isa::Avx2 ? avx2::sign_sums(ax, ay, xs, ys) : scalar::sign_sums(ax, ay, xs, ys);
}

double sum(std::span<const double> xs) {
  return active_isa() == Isa::Avx2 ? avx2::sum(xs) : scalar::sum(xs);
}

double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my) {
  return active_isa() == Isa::Avx2 ? avx2::centered_dot(xs, mx, ys, my)
                                   : scalar::centered_dot(xs, mx, ys, my);
}

}  // namespace delib::simd
