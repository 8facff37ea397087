#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sqclock/golden.hpp"
#include "sqclock/lo_model.hpp"
#include "sqclock/phase_error.hpp"
#include "sqclock/quadrature.hpp"

namespace sqclock {

struct StabilityResult {
  double ramsey_time = 0.0;        // tau, seconds
  double total_time = 0.0;         // T, seconds
  double phase_variance = 0.0;     // sigma^2_phi(T), rad^2
  double frequency_variance = 0.0; // sigma^2_omega = sigma^2_phi / T^2
  double regime_alpha = 0.0;       // A^4 / (xi^6 N)
  double sql_ratio_db = 0.0;       // vs perfect-contrast CSS at its own optimum
  bool converged = true;
  bool flat_objective = false;
};

/// Gaussian LO phase-deviation density after Ramsey time tau.
inline double lo_phase_pdf(double gamma, double tau, double phi) {
  const double s = gamma * tau;
  return std::exp(-phi * phi / (2.0 * s * s)) / (s * std::sqrt(2.0 * M_PI));
}

/// Ratio A^4 / (xi^6 N) separating the squeezing-limited regime (small) from
/// the antisqueezing-limited one (large); the transition sits near 5.
inline double regime_alpha(const EnsembleSpec& spec) {
  const double a2 = spec.state_area();
  const double xi6 = spec.xi2 * spec.xi2 * spec.xi2;
  return a2 * a2 / (xi6 * spec.atom_count);
}

namespace detail {

inline double std_normal_pdf(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
}

inline double std_normal_sf(double u) { return 0.5 * std::erfc(u / std::sqrt(2.0)); }

// Exact expectation of the overflow branch 4(s*u - pi/2)^2 + m^2 over the
// standard-normal tail u > u0, where the branch is valid (u0 >= (pi/2)/s).
inline double gaussian_tail_outer(double s, double max_err_sq, double u0) {
  const double q = std_normal_sf(u0);
  if (q == 0.0) return 0.0;
  const double p = std_normal_pdf(u0);
  const double eu1 = p;            // E[u ; u > u0]
  const double eu2 = q + u0 * p;   // E[u^2 ; u > u0]
  return 4.0 * (s * s * eu2 - M_PI * s * eu1 + (M_PI * M_PI / 4.0) * q) +
         max_err_sq * q;
}

} // namespace detail

/// Averaged clock phase variance after total time T composed of independent
/// Ramsey intervals tau: sigma^2_phi(T) = (T/tau) * integral of the LO phase
/// density times the piecewise estimation-error curve. The integral is done
/// in units of the Gaussian width s = gamma*tau, with panels split at the
/// curve kinks and Gaussian-scale points, plus a closed-form tail for the
/// quadratic overflow branch beyond |phi| = pi/2.
inline QuadResult clock_phase_variance_detailed(const PhaseErrorCurve& curve,
                                                double gamma, double tau,
                                                double T) {
  const double s = gamma * tau;
  const double b = (M_PI / 2.0) / s;        // kink at |phi| = pi/2, u units
  const double ua = std::min(40.0, b);      // numeric span for the inner part

  std::vector<double> cuts{0.0, 1.0, 2.0, 4.0, 8.0, curve.stitch_angle() / s};
  std::erase_if(cuts, [&](double u) { return u <= 0.0 || u >= ua; });
  cuts.push_back(0.0);
  cuts.push_back(ua);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto integrand = [&](double u) {
    return detail::std_normal_pdf(u) * curve(s * u);
  };
  QuadResult inner = integrate_panels(integrand, cuts, 1e-9);
  double value = inner.value;
  if (b < 40.0)
    value += detail::gaussian_tail_outer(s, curve.max_error_sq(), b);

  const double scale = 2.0 * (T / tau);     // evenness doubles the half-line
  return {scale * value, scale * inner.error, inner.converged};
}

inline double clock_phase_variance(const PhaseErrorCurve& curve, double gamma,
                                   double tau, double T) {
  return clock_phase_variance_detailed(curve, gamma, tau, T).value;
}

/// Minimizes sigma^2_phi(T) over the Ramsey time with gamma*tau scanned on a
/// 200-point log grid over [1e-4, 3], then golden-section refinement around
/// the best grid point to 0.1% in tau.
inline StabilityResult optimize_ramsey_time(const PhaseErrorCurve& curve,
                                            double gamma, double T) {
  constexpr int kGridPoints = 200;
  constexpr double kLo = 1e-4, kHi = 3.0;
  auto objective = [&](double gt) {
    return clock_phase_variance(curve, gamma, gt / gamma, T);
  };

  std::vector<double> grid(kGridPoints), vals(kGridPoints);
  const double step = std::log(kHi / kLo) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) {
    grid[i] = kLo * std::exp(step * i);
    vals[i] = objective(grid[i]);
  }
  const int best =
      static_cast<int>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kGridPoints - 1)];
  const GoldenResult r = golden_minimize(objective, lo, hi, 1e-3);

  StabilityResult out;
  out.ramsey_time = r.x / gamma;
  out.total_time = T;
  out.phase_variance = r.fx;
  out.frequency_variance = r.fx / (T * T);
  out.regime_alpha = regime_alpha(curve.spec());
  const auto [vmin, vmax] = std::minmax_element(vals.begin(), vals.end());
  out.flat_objective = (*vmax - *vmin) < 1e-6 * std::abs(*vmax);
  return out;
}

/// Stability ratio in dB, 10*log10(sigma^2_phi / sigma^2_phi,reference).
inline double compare_to_css(const StabilityResult& result,
                             const StabilityResult& css_result) {
  return 10.0 * std::log10(result.phase_variance / css_result.phase_variance);
}

} // namespace sqclock
