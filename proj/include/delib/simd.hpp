#pragma once

// Data-parallel inner loops behind runtime ISA dispatch.
//
// Every kernel has a scalar reference and an AVX2 variant. Floating-point
// reductions use four striped lanes in both variants (element i goes to
// lane i % 4, lanes combined as (l0 + l1) + (l2 + l3)), so the variants
// agree bit for bit and results never depend on the host CPU.

#include <cstdint>
#include <span>
#include <string_view>

namespace delib::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

/// Best ISA supported by this CPU, unless DELIB_SIMD=scalar is set.
Isa detected_isa() noexcept;

/// ISA currently used by the dispatching entry points.
Isa active_isa() noexcept;

/// Overrides dispatch (tests and benchmarks). Falls back to Scalar if the
/// CPU lacks the requested ISA. Returns the ISA actually selected.
Isa set_active_isa(Isa isa) noexcept;

struct SignSums {
  std::int64_t product = 0;      // sum of sign(ax - x_b) * sign(ay - y_b)
  std::int64_t joint_ties = 0;   // count of b with ax == x_b and ay == y_b
};

/// Sign products of one anchor pair (ax, ay) against every (xs[b], ys[b]).
SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys);

/// Striped sum.
double sum(std::span<const double> xs);

/// Striped sum of (x_i - mx) * (y_i - my).
double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my);

namespace scalar {
SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys);
double sum(std::span<const double> xs);
double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my);
}  // namespace scalar

namespace avx2 {
/// True when the AVX2 variants were compiled in.
bool available() noexcept;
SignSums sign_sums(double ax, double ay, std::span<const double> xs, std::span<const double> ys);
double sum(std::span<const double> xs);
double centered_dot(std::span<const double> xs, double mx, std::span<const double> ys, double my);
}  // namespace avx2

}  // namespace delib::simd
