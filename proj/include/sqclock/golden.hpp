#pragma once

#include <cmath>

namespace sqclock {

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
};

/// Golden-section minimization of a unimodal f on [a, b] to a relative
/// x-tolerance.
template <class F>
GoldenResult golden_minimize(F&& f, double a, double b, double rel_tol = 1e-3,
                             int max_iter = 200) {
  const double inv_gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_gr * (b - a);
  double d = a + inv_gr * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > rel_tol * std::abs(a + b) * 0.5; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_gr * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

} // namespace sqclock
