#pragma once

#include <cmath>
#include <stdexcept>

#include "sqclock/ensemble.hpp"

namespace sqclock {

/// Variance of the third quadrature, (Delta S_x)^2 = (chi^2 - chi^-2)^2 / 8.
inline double delta_sx_sq(double chi2) {
  const double d = chi2 - 1.0 / chi2;
  return d * d / 8.0;
}

/// Mean clock signal <S_z,f>(phi) = C * S * sin(phi).
inline double sz_signal_mean(const EnsembleSpec& spec, double phi) {
  return spec.contrast() * spec.spin() * std::sin(phi);
}

/// Variance of the final S_z projection, including contrast-loss noise from
/// atoms decohered during preparation (C1) and during the Ramsey time (C2).
inline double sz_variance_final(const EnsembleSpec& spec, double phi) {
  const double n = spec.atom_count;
  const double c = spec.contrast();
  const double cphi = std::cos(phi);
  const double sphi = std::sin(phi);
  const double ctheta = std::cos(spec.theta);
  const double squeezed = n / 4.0 * spec.xi2 * cphi * cphi +
                          delta_sx_sq(spec.chi2) * sphi * sphi;
  const double decohered =
      1.0 - c - spec.ramsey_contrast * (1.0 - spec.prep_contrast) * cphi * cphi * ctheta * ctheta;
  return c * squeezed + n / 4.0 * decohered;
}

/// Linearized phase-estimation variance for |phi| < pi/2. Clamped at zero
/// from below (the theta-dependent term can drive it slightly negative).
inline double phase_error_sq_inner(const EnsembleSpec& spec, double phi) {
  if (!(std::abs(phi) < M_PI / 2))
    throw std::domain_error("phase_error_sq_inner requires |phi| < pi/2");
  const double n = spec.atom_count;
  const double c = spec.contrast();
  const double t = std::tan(phi);
  const double sec = 1.0 / std::cos(phi);
  const double ctheta = std::cos(spec.theta);
  const double d = spec.chi2 - 1.0 / spec.chi2;
  double v = spec.xi2 / (c * n) + d * d / (2.0 * c * n * n) * t * t +
             (1.0 - c) / (c * c * n) * sec * sec -
             spec.ramsey_contrast * (1.0 - spec.prep_contrast) / (c * c * n) * ctheta * ctheta;
  return v > 0.0 ? v : 0.0;
}

/// Largest possible phase error near |phi| = pi/2 (radians, not squared).
inline double max_phase_error(const EnsembleSpec& spec) {
  const double n = spec.atom_count;
  const double c = spec.contrast();
  const double d = spec.chi2 - 1.0 / spec.chi2;
  const double v = 2.0 * d * d / (n * n * c) + 4.0 * (1.0 - c) / (n * c * c);
  return std::pow(v, 0.25);
}

/// Phase error beyond the invertible range, 4(|phi|-pi/2)^2 + dphi_max^2.
inline double phase_error_sq_outer(const EnsembleSpec& spec, double phi) {
  const double excess = std::abs(phi) - M_PI / 2;
  const double m = max_phase_error(spec);
  return 4.0 * excess * excess + m * m;
}

/// Piecewise phase-estimation error (Delta phi)^2 as a function of the LO
/// phase deviation phi: the linearized expression capped at dphi_max^2
/// inside |phi| < pi/2, and the quadratic overflow branch outside. The cap
/// produces a step at |phi| = phi_star. For the coherent state the cap
/// degenerates to zero and is suspended.
class PhaseErrorCurve {
 public:
  explicit PhaseErrorCurve(const EnsembleSpec& spec)
      : spec_(spec), max_error_sq_([&] {
          const double m = max_phase_error(spec);
          return m * m;
        }()) {
    degenerate_ = max_error_sq_ == 0.0;
    stitch_angle_ = degenerate_ ? M_PI / 2 : find_stitch_angle();
  }

  double operator()(double phi) const {
    const double a = std::abs(phi);
    if (a < M_PI / 2) {
      const double v = phase_error_sq_inner(spec_, a);
      return degenerate_ ? v : std::min(v, max_error_sq_);
    }
    if (a == M_PI / 2) return max_error_sq_;
    return phase_error_sq_outer(spec_, a);
  }

  const EnsembleSpec& spec() const { return spec_; }
  double stitch_angle() const { return stitch_angle_; }      // phi_star
  double max_error_sq() const { return max_error_sq_; }      // dphi_max^2
  bool degenerate() const { return degenerate_; }

 private:
  // Smallest phi in [0, pi/2] where the inner branch reaches the cap; the
  // inner branch is nondecreasing there, so bisection suffices.
  double find_stitch_angle() const {
    auto above = [&](double phi) {
      return phase_error_sq_inner(spec_, phi) >= max_error_sq_;
    };
    if (above(0.0)) return 0.0;
    double lo = 0.0, hi = M_PI / 2;
    // inner diverges toward pi/2 unless degenerate, so a crossing exists;
    // probe just below the endpoint to seed the bracket.
    if (!above(std::nextafter(hi, lo))) return hi;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (above(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }

  EnsembleSpec spec_;
  double max_error_sq_;
  double stitch_angle_;
  bool degenerate_;
};

inline PhaseErrorCurve build_phase_error_curve(const EnsembleSpec& spec) {
  return PhaseErrorCurve(spec);
}

} // namespace sqclock
