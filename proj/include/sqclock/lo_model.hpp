#pragma once

#include <cmath>
#include <stdexcept>

namespace sqclock {

/// Local-oscillator dephasing model. The LO phase deviation after a Ramsey
/// time tau is Gaussian with standard deviation gamma*tau.
struct LoModel {
  enum class Family { gaussian };

  double gamma = 1.0;  // free-running linewidth / dephasing rate, rad^2/s
  Family distribution = Family::gaussian;

  LoModel() = default;
  explicit LoModel(double gamma_) : gamma(gamma_) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
  }

  double phase_sigma(double tau) const { return gamma * tau; }

  /// P(phi, tau): Gaussian density of the accumulated LO phase deviation.
  double phase_pdf(double tau, double phi) const {
    const double s = phase_sigma(tau);
    return std::exp(-phi * phi / (2.0 * s * s)) / (s * std::sqrt(2.0 * M_PI));
  }
};

} // namespace sqclock
