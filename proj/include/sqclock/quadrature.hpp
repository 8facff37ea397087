#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace sqclock {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // achieved absolute error estimate
  bool converged = true;

  QuadResult& operator+=(const QuadResult& o) {
    value += o.value;
    error += o.error;
    converged = converged && o.converged;
    return *this;
  }
};

namespace detail {

// Gauss-Kronrod 7-15 pair on [-1, 1].
inline constexpr double kGk15Nodes[8] = {
    0.000000000000000, 0.405845151377397, 0.741531185599394, 0.949107912342759,
    0.207784955007898, 0.586087235467691, 0.864864423359769, 0.991455371120813};
inline constexpr double kGauss7Weights[4] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870};
inline constexpr double kKronrod15Weights[8] = {
    0.209482141084728, 0.190350578064785, 0.140653259715525, 0.063092092629979,
    0.204432940075298, 0.169004726639267, 0.104790010322250, 0.022935322010529};

template <class F>
QuadResult gk15(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double g7 = kGauss7Weights[0] * f0;
  double k15 = kKronrod15Weights[0] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = half * kGk15Nodes[i];
    const double fi = f(mid + dx) + f(mid - dx);
    k15 += kKronrod15Weights[i] * fi;
    if (i < 4) g7 += kGauss7Weights[i] * fi;
  }
  g7 *= half;
  k15 *= half;
  return {k15, std::abs(k15 - g7), true};
}

template <class F>
void adapt(F& f, double a, double b, double tol, int depth, QuadResult& acc) {
  const QuadResult est = gk15(f, a, b);
  if (est.error <= tol || depth <= 0) {
    acc.value += est.value;
    acc.error += est.error;
    if (est.error > tol) acc.converged = false;
    return;
  }
  const double mid = 0.5 * (a + b);
  adapt(f, a, mid, 0.5 * tol, depth - 1, acc);
  adapt(f, mid, b, 0.5 * tol, depth - 1, acc);
}

} // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                              double abs_tol = 0.0, int max_depth = 48) {
  const QuadResult first = detail::gk15(f, a, b);
  double tol = std::max(abs_tol, rel_tol * std::abs(first.value));
  if (tol <= 0.0) tol = rel_tol;
  QuadResult acc;
  detail::adapt(f, a, b, tol, max_depth, acc);
  return acc;
}

/// Integrates f over consecutive panels given by sorted breakpoints, adapting
/// within each panel. Breakpoints should include any kinks of the integrand.
template <class F>
QuadResult integrate_panels(F&& f, std::span<const double> breakpoints,
                            double rel_tol = 1e-10, int max_depth = 48) {
  QuadResult total;
  if (breakpoints.size() < 2) return total;
  // First pass for a magnitude estimate to set the absolute tolerance.
  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    coarse += std::abs(detail::gk15(f, breakpoints[i], breakpoints[i + 1]).value);
  const double tol = std::max(rel_tol * coarse, 1e-300);
  const double per_panel = tol / static_cast<double>(breakpoints.size() - 1);
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    detail::adapt(f, breakpoints[i], breakpoints[i + 1], per_panel, max_depth, total);
  return total;
}

} // namespace sqclock
