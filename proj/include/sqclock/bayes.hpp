#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "sqclock/dicke.hpp"

namespace sqclock {

/// Table of measurement-outcome probabilities P(m | phi) for a grid of LO
/// phases. Row i corresponds to m = i - N/2; each column sums to 1.
struct ConditionalDistribution {
  int atom_count = 0;
  std::vector<double> phi;
  Eigen::MatrixXd prob;  // (N+1) x phi.size()

  double m_of_row(int i) const { return i - atom_count / 2.0; }
};

/// Runs the Ramsey readout for each phi: accumulate the phase e^{-i phi m},
/// apply the final pi/2 pulse about x, and record outcome probabilities,
/// mixed over components.
inline ConditionalDistribution conditional_sz_distribution(
    const DickeEnsembleState& state, std::span<const double> phi_grid) {
  const int n = state.atom_count;
  const double s = n / 2.0;
  const int cols = static_cast<int>(phi_grid.size());
  auto eig = detail::SxEigenCache::get(n);

  ConditionalDistribution dist;
  dist.atom_count = n;
  dist.phi.assign(phi_grid.begin(), phi_grid.end());
  dist.prob = Eigen::MatrixXd::Zero(n + 1, cols);

  Eigen::MatrixXcd a(n + 1, cols);
  for (const auto& comp : state.components) {
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i <= n; ++i)
        a(i, j) = comp.amplitudes[i] *
                  std::exp(complexd(0.0, -phi_grid[j] * (-s + i)));
    const Eigen::MatrixXcd w = eig->half_pi_rotation * a;
    dist.prob.noalias() += comp.weight * w.cwiseAbs2();
  }
  for (int j = 0; j < cols; ++j) {
    const double total = dist.prob.col(j).sum();
    if (std::abs(total - 1.0) > 1e-8)
      throw std::runtime_error("conditional distribution lost normalization");
    dist.prob.col(j) /= total;
  }
  return dist;
}

/// Mean and variance of S_z in one column of a conditional distribution.
inline std::pair<double, double> sz_mean_var(const ConditionalDistribution& dist,
                                             int col) {
  double mean = 0, sq = 0;
  for (int i = 0; i < dist.prob.rows(); ++i) {
    const double m = dist.m_of_row(i);
    const double p = dist.prob(i, col);
    mean += p * m;
    sq += p * m * m;
  }
  return {mean, sq - mean * mean};
}

/// Squeezed core plus the decohered sub-ensembles of the contrast model:
/// preparation loss 1-C1 splits into two balanced tilted coherent groups,
/// Ramsey-time loss 1-C2 moves atoms into an unpolarized reservoir. Sub-
/// ensembles are independent, so S_z outcomes add by convolution.
struct ContrastEnsemble {
  DickeEnsembleState core;  // coherent squeezed part, N*C1*C2 atoms
  int total_atoms = 0;
  int prep_loss_each = 0;   // per tilted group, N(1-C1)C2/2 atoms
  int reservoir = 0;        // N(1-C2) atoms
  double theta = 0.0;
};

inline ContrastEnsemble apply_contrast_model(const DickeEnsembleState& state,
                                             double c1, double c2,
                                             double theta) {
  if (!(c1 > 0.0 && c1 <= 1.0 && c2 > 0.0 && c2 <= 1.0))
    throw std::invalid_argument("contrast values must lie in (0, 1]");
  const int n = state.atom_count;
  ContrastEnsemble out;
  out.total_atoms = n;
  out.theta = theta;
  if (c1 == 1.0 && c2 == 1.0) {
    out.core = state;
    return out;
  }
  int n_core = 2 * static_cast<int>(std::lround(n * c1 * c2 / 2.0));
  n_core = std::clamp(n_core, 2, n);
  out.prep_loss_each = static_cast<int>(std::lround(n * (1.0 - c1) * c2 / 2.0));
  out.reservoir = n - n_core - 2 * out.prep_loss_each;
  if (out.reservoir < 0) {
    out.prep_loss_each += out.reservoir / 2;
    out.reservoir = n - n_core - 2 * out.prep_loss_each;
  }
  if (state.target_chi2 == 1.0 && state.target_xi2 == 1.0)
    out.core = build_css(n_core);
  else
    out.core = build_nonunitary_mixture(n_core, state.target_xi2,
                                        state.target_chi2,
                                        std::max(1, static_cast<int>(state.components.size())) | 1);
  return out;
}

namespace detail {

// Binomial(n, p) pmf over k = 0..n in log space.
inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> pmf(n + 1, 0.0);
  if (n == 0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p <= 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p >= 1.0) {
    pmf[n] = 1.0;
    return pmf;
  }
  const double lp = std::log(p), lq = std::log1p(-p);
  for (int k = 0; k <= n; ++k)
    pmf[k] = std::exp(log_choose(n, k) + k * lp + (n - k) * lq);
  return pmf;
}

inline std::vector<double> convolve(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

} // namespace detail

/// Conditional S_z distribution of the composite ensemble. All sub-ensemble
/// outcomes live on the doubled grid 2 S_z in {-n..n} step 2, so their
/// distributions convolve index-wise.
inline ConditionalDistribution conditional_sz_distribution(
    const ContrastEnsemble& ens, std::span<const double> phi_grid) {
  const ConditionalDistribution core =
      conditional_sz_distribution(ens.core, phi_grid);
  const int n = ens.total_atoms;
  ConditionalDistribution dist;
  dist.atom_count = n;
  dist.phi.assign(phi_grid.begin(), phi_grid.end());
  dist.prob = Eigen::MatrixXd::Zero(n + 1, static_cast<int>(phi_grid.size()));

  const std::vector<double> res =
      detail::binomial_pmf(ens.reservoir, 0.5);
  for (int j = 0; j < static_cast<int>(phi_grid.size()); ++j) {
    const double tilt = std::cos(ens.theta) * std::cos(phi_grid[j]);
    std::vector<double> col(core.prob.rows());
    for (int i = 0; i < core.prob.rows(); ++i) col[i] = core.prob(i, j);
    col = detail::convolve(
        col, detail::binomial_pmf(ens.prep_loss_each, 0.5 * (1.0 + tilt)));
    col = detail::convolve(
        col, detail::binomial_pmf(ens.prep_loss_each, 0.5 * (1.0 - tilt)));
    col = detail::convolve(col, res);
    if (static_cast<int>(col.size()) != n + 1)
      throw std::runtime_error("contrast sub-ensemble sizes do not add up");
    for (int i = 0; i <= n; ++i) dist.prob(i, j) = col[i];
  }
  return dist;
}

/// Posterior-mean phase estimate per outcome m, under a uniform prior on the
/// monotonic range (-pi/2, pi/2).
struct BayesEstimator {
  std::vector<double> phi_est;    // indexed like distribution rows
  std::vector<bool> zero_weight;  // outcome never occurs on the prior grid
  int atom_count = 0;
};

inline BayesEstimator bayes_estimator(const ConditionalDistribution& dist) {
  const auto& phi = dist.phi;
  if (phi.size() < 400)
    throw std::invalid_argument("prior grid needs at least 400 points");
  if (phi.front() < -M_PI / 2 - 1e-12 || phi.back() > M_PI / 2 + 1e-12)
    throw std::invalid_argument("prior grid must lie within (-pi/2, pi/2)");

  std::vector<double> w(phi.size(), 0.0);  // trapezoid weights
  for (std::size_t j = 0; j + 1 < phi.size(); ++j) {
    const double h = 0.5 * (phi[j + 1] - phi[j]);
    w[j] += h;
    w[j + 1] += h;
  }

  BayesEstimator est;
  est.atom_count = dist.atom_count;
  const int rows = static_cast<int>(dist.prob.rows());
  est.phi_est.resize(rows);
  est.zero_weight.resize(rows);
  for (int i = 0; i < rows; ++i) {
    double num = 0, den = 0;
    for (std::size_t j = 0; j < phi.size(); ++j) {
      const double pw = dist.prob(i, static_cast<int>(j)) * w[j];
      num += pw * phi[j];
      den += pw;
    }
    est.zero_weight[i] = den <= 0.0;
    est.phi_est[i] = est.zero_weight[i] ? 0.0 : num / den;
  }
  return est;
}

/// Mean-square estimation error at a true phase phi, which may lie outside
/// the prior range; phi must match a column of the evaluation distribution.
inline double expected_phase_error(const ConditionalDistribution& dist,
                                   const BayesEstimator& est, double phi) {
  int col = -1;
  double best = 1e-9;
  for (std::size_t j = 0; j < dist.phi.size(); ++j) {
    const double d = std::abs(dist.phi[j] - phi);
    if (d < best) {
      best = d;
      col = static_cast<int>(j);
    }
  }
  if (col < 0)
    throw std::invalid_argument("phi is not a column of the distribution");
  double num = 0, den = 0;
  for (int i = 0; i < dist.prob.rows(); ++i) {
    const double p = dist.prob(i, col);
    const double e = est.phi_est[i] - phi;
    num += p * e * e;
    den += p;
  }
  return num / den;
}

/// Full oracle pipeline: estimator from a dense prior grid, then the expected
/// squared error at each requested phase.
template <class StateT>
std::vector<double> oracle_phase_error_curve(const StateT& state,
                                             std::span<const double> eval_phis,
                                             int prior_points = 801) {
  std::vector<double> prior(prior_points);
  for (int j = 0; j < prior_points; ++j)
    prior[j] = -M_PI / 2 + M_PI * j / (prior_points - 1.0);
  const auto prior_dist = conditional_sz_distribution(state, prior);
  const auto est = bayes_estimator(prior_dist);
  const auto eval_dist = conditional_sz_distribution(state, eval_phis);
  std::vector<double> out(eval_phis.size());
  for (std::size_t j = 0; j < eval_phis.size(); ++j)
    out[j] = expected_phase_error(eval_dist, est, eval_phis[j]);
  return out;
}

} // namespace sqclock
