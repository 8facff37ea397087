#include <doctest.h>

#include <cmath>

#include "sqclock/stability.hpp"
#include "sqclock/units.hpp"

using namespace sqclock;

namespace {

EnsembleSpec make_spec(double n, double xi2, double chi2, double c1 = 1.0,
                       double c2 = 1.0) {
  EnsembleSpec s;
  s.atom_count = n;
  s.xi2 = xi2;
  s.chi2 = chi2;
  s.prep_contrast = c1;
  s.ramsey_contrast = c2;
  return validate_spec(s);
}

} // namespace

TEST_CASE("LO phase density is a normalized even Gaussian") {
  const double gamma = 1.0, tau = 0.3;
  CHECK(lo_phase_pdf(gamma, tau, 0.0) ==
        doctest::Approx(1.0 / (0.3 * std::sqrt(2 * M_PI))).epsilon(1e-12));
  CHECK(lo_phase_pdf(gamma, tau, 0.4) ==
        doctest::Approx(lo_phase_pdf(gamma, tau, -0.4)).epsilon(1e-14));
  const auto norm = integrate_adaptive(
      [&](double p) { return lo_phase_pdf(gamma, tau, p); }, -4.0, 4.0, 1e-12);
  CHECK(norm.value == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("averaged variance of a flat curve reduces to the cycle count") {
  // the coherent-state curve is flat inside the range; at small gamma*tau
  // the overflow branch carries negligible weight, so the integral is c and
  // the result (T/tau)*c
  const PhaseErrorCurve curve(make_spec(1e4, 1, 1));
  for (double gt : {0.01, 0.05, 0.1}) {
    const double v = clock_phase_variance(curve, 1.0, gt, 1.0);
    CHECK(v == doctest::Approx((1.0 / gt) * 1e-4).epsilon(1e-8));
  }
}

TEST_CASE("averaged variance scales linearly in the total time") {
  const PhaseErrorCurve curve(make_spec(1e4, 0.1, 10.0));
  const double one = clock_phase_variance(curve, 1.0, 0.2, 1.0);
  const double two = clock_phase_variance(curve, 1.0, 0.2, 2.0);
  CHECK(two == doctest::Approx(2.0 * one).epsilon(1e-12));
}

TEST_CASE("quadrature reports convergence and small error") {
  const PhaseErrorCurve curve(make_spec(1e4, 0.1, 10.0));
  const auto r = clock_phase_variance_detailed(curve, 1.0, 0.1, 1.0);
  CHECK(r.converged);
  CHECK(r.error <= 1e-8 * std::abs(r.value) + 1e-300);
}

TEST_CASE("short Ramsey times diverge as 1/(gamma tau) for the flat curve") {
  const PhaseErrorCurve curve(make_spec(1e4, 1, 1));
  const double v1 = clock_phase_variance(curve, 1.0, 1e-3, 1.0);
  const double v2 = clock_phase_variance(curve, 1.0, 1e-4, 1.0);
  CHECK(v2 / v1 == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("regime parameter examples") {
  CHECK(regime_alpha(make_spec(1e4, db_to_linear(-15.0),
                               1.0 / db_to_linear(-15.0))) ==
        doctest::Approx(std::pow(10, 4.5) / 1e4).epsilon(1e-10));
  // A^4 = (A^2)^2 = 10^3 at A^2 = 15 dB
  CHECK(regime_alpha(make_spec(1e4, db_to_linear(-15.0),
                               db_to_linear(15.0) / db_to_linear(-15.0))) ==
        doctest::Approx(1e3 * std::pow(10, 4.5) / 1e4).epsilon(1e-10));
}

TEST_CASE("optimizer reproduces the frozen coherent-state optimum") {
  // frozen values from an independent high-resolution scan
  const PhaseErrorCurve curve(make_spec(1e4, 1, 1));
  const auto r = optimize_ramsey_time(curve, 1.0, 1.0);
  CHECK(r.ramsey_time == doctest::Approx(0.3990).epsilon(2e-3));
  CHECK(r.phase_variance * 1e4 == doctest::Approx(2.638).epsilon(2e-3));
  CHECK(r.frequency_variance == doctest::Approx(r.phase_variance));
}

TEST_CASE("optimizer lands on a discrete local minimum") {
  const PhaseErrorCurve curve(make_spec(1e4, db_to_linear(-15.0),
                                        db_to_linear(10.0) / db_to_linear(-15.0)));
  const auto r = optimize_ramsey_time(curve, 1.0, 1.0);
  const double gt = r.ramsey_time;
  const double at = clock_phase_variance(curve, 1.0, gt, 1.0);
  CHECK(clock_phase_variance(curve, 1.0, gt * 1.02, 1.0) >= at * (1 - 1e-9));
  CHECK(clock_phase_variance(curve, 1.0, gt * 0.98, 1.0) >= at * (1 - 1e-9));
}

TEST_CASE("more antisqueezing never improves the optimized stability") {
  const double xi2 = db_to_linear(-15.0);
  double prev = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double a2 = db_to_linear(3.0 * i);
    const auto r = optimize_ramsey_time(
        PhaseErrorCurve(make_spec(1e4, xi2, a2 / xi2)), 1.0, 1.0);
    if (i) CHECK(r.phase_variance >= prev * (1 - 1e-9));
    prev = r.phase_variance;
  }
}

TEST_CASE("deep in the squeezing-limited regime the area barely matters") {
  const double xi2 = db_to_linear(-5.0);  // alpha well below 0.5 at A=1
  const auto base = optimize_ramsey_time(
      PhaseErrorCurve(make_spec(1e4, xi2, 1.0 / xi2)), 1.0, 1.0);
  CHECK(regime_alpha(make_spec(1e4, xi2, 1.0 / xi2)) < 0.5);
  const auto doubled = optimize_ramsey_time(
      PhaseErrorCurve(make_spec(1e4, xi2, 2.0 / xi2)), 1.0, 1.0);
  CHECK(std::abs(doubled.phase_variance / base.phase_variance - 1.0) < 0.05);
}

TEST_CASE("stability ratio is zero against itself") {
  const auto r = optimize_ramsey_time(PhaseErrorCurve(make_spec(1e4, 1, 1)),
                                      1.0, 1.0);
  CHECK(compare_to_css(r, r) == doctest::Approx(0.0));
}
