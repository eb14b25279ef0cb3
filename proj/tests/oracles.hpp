#pragma once

// Reference implementations used only by tests. They share no code with the
// library beyond the unit draws that define the perturbation.

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

#include "delib/metrics.hpp"

namespace oracle {

inline int sgn(double v) { return (v > 0) - (v < 0); }

/// Direct pair enumeration of the tie rule.
inline double tau(const std::vector<double>& x, const std::vector<double>& y, const delib::PerturbationConfig& cfg) {
  using Mode = delib::PerturbationConfig::Mode;
  const std::size_t n = x.size();
  std::vector<double> px = x, py = y;
  if (cfg.mode == Mode::Perturbed) {
    std::vector<std::uint64_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::uint64_t{0});
    const auto u = delib::unit_draws(cfg.seed, idx);
    for (std::size_t i = 0; i < n; ++i) {
      px[i] += cfg.epsilon_max * u[i];
      py[i] += cfg.epsilon_max * u[i];
    }
  }
  long long s = 0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (cfg.mode == Mode::DeterministicExpectation && x[a] == x[b] && y[a] == y[b]) {
        s += 1;
      } else {
        s += sgn(px[a] - px[b]) * sgn(py[a] - py[b]);
      }
    }
  }
  return static_cast<double>(s) / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

using LMat = std::vector<std::vector<long double>>;

/// Gauss-Jordan with partial pivoting in extended precision.
inline LMat inverse(LMat a) {
  const std::size_t n = a.size();
  LMat inv(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const long double d = a[c][c];
    for (std::size_t k = 0; k < n; ++k) {
      a[c][k] /= d;
      inv[c][k] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = a[r][c];
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

struct Hc3Fit {
  std::vector<long double> beta, se;
};

/// beta = (X'X)^-1 X'y and the HC3 sandwich, written out element by element.
inline Hc3Fit hc3(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const std::size_t n = std::size_t(x.rows()), p = std::size_t(x.cols());
  LMat xtx(p, std::vector<long double>(p, 0.0L));
  std::vector<long double> xty(p, 0.0L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += (long double)x(i, a) * y(i);
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += (long double)x(i, a) * x(i, b);
    }
  const LMat inv = inverse(xtx);
  Hc3Fit f;
  f.beta.assign(p, 0.0L);
  for (std::size_t a = 0; a < p; ++a)
    for (std::size_t b = 0; b < p; ++b) f.beta[a] += inv[a][b] * xty[b];
  std::vector<long double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    long double fit = 0, h = 0;
    for (std::size_t a = 0; a < p; ++a) fit += (long double)x(i, a) * f.beta[a];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) h += (long double)x(i, a) * inv[a][b] * x(i, b);
    const long double e = y(i) - fit;
    w[i] = e * e / ((1 - h) * (1 - h));
  }
  LMat meat(p, std::vector<long double>(p, 0.0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = 0; b < p; ++b) meat[a][b] += (long double)x(i, a) * w[i] * x(i, b);
  f.se.assign(p, 0.0L);
  for (std::size_t a = 0; a < p; ++a) {
    long double v = 0;
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t c = 0; c < p; ++c) v += inv[a][b] * meat[b][c] * inv[c][a];
    f.se[a] = std::sqrt(v);
  }
  return f;
}

}  // namespace oracle
