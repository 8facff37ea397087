#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqclock {

/// How the squeezing ellipse is oriented in the y-z quadrature plane.
/// Measurement-based squeezing leaves the squeezed quadrature aligned with
/// S_y (theta = 0); feedback-based squeezing tilts it by arcsin(1/chi).
enum class SqueezeOrientation { measurement_based, feedback_based, custom };

/// Collective-spin ensemble parameters: N spin-1/2 atoms prepared along +x
/// with quadrature variances (S/2)*xi2 (squeezed, S_y) and (S/2)*chi2
/// (antisqueezed, S_z), and Ramsey contrast C = C1*C2.
struct EnsembleSpec {
  double atom_count = 2;     // N
  double xi2 = 1.0;          // squeezing variance ratio, linear
  double chi2 = 1.0;         // antisqueezing variance ratio, linear
  double prep_contrast = 1.0;   // C1, lost during state preparation
  double ramsey_contrast = 1.0; // C2, lost during the Ramsey time
  SqueezeOrientation orientation = SqueezeOrientation::measurement_based;
  double theta = 0.0;        // ellipse tilt, radians; set by validate_spec
                             // unless orientation == custom

  double spin() const { return atom_count / 2.0; }          // S
  double state_area() const { return xi2 * chi2; }          // A^2 >= 1
  double contrast() const { return prep_contrast * ramsey_contrast; } // C
};

/// Checks physicality constraints and fills the orientation-derived tilt.
/// Idempotent. Throws std::invalid_argument on violation.
inline EnsembleSpec validate_spec(EnsembleSpec spec) {
  const double n = spec.atom_count;
  if (!(n >= 2.0)) throw std::invalid_argument("atom_count must be >= 2");
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n))
    throw std::invalid_argument("atom_count must be an integer");
  if (!(spec.xi2 > 0.0) || !(spec.xi2 <= 1.0))
    throw std::invalid_argument("xi2 must lie in (0, 1]");
  if (!(spec.chi2 > 0.0)) throw std::invalid_argument("chi2 must be > 0");
  if (spec.state_area() < 1.0 - 1e-12)
    throw std::invalid_argument("state area A^2 = xi2*chi2 < 1 violates the uncertainty bound");
  auto check_contrast = [](double c, const char* name) {
    if (!(c > 0.0) || !(c > 1e-12) || c > 1.0)
      throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
  };
  check_contrast(spec.prep_contrast, "prep_contrast");
  check_contrast(spec.ramsey_contrast, "ramsey_contrast");

  switch (spec.orientation) {
    case SqueezeOrientation::measurement_based:
      spec.theta = 0.0;
      break;
    case SqueezeOrientation::feedback_based:
      spec.theta = std::asin(1.0 / std::sqrt(spec.chi2));
      break;
    case SqueezeOrientation::custom:
      if (!(spec.theta >= 0.0) || !(spec.theta <= M_PI / 2))
        throw std::invalid_argument("theta must lie in [0, pi/2]");
      break;
  }
  return spec;
}

/// Metrological Ramsey (Wineland) squeezing parameter xi_R^2 = xi2 / C^2,
/// with the prepared-state minimum variance (S/2)*xi2.
inline double ramsey_squeezing_parameter(const EnsembleSpec& spec) {
  const double c = spec.contrast();
  return spec.xi2 / (c * c);
}

} // namespace sqclock
