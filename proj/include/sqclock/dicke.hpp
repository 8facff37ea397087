#pragma once

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace sqclock {

using complexd = std::complex<double>;

/// One pure component of a collective-spin state in the basis of S_z
/// eigenstates m = -S..S (index i corresponds to m = i - S).
struct DickeComponent {
  double weight = 1.0;
  Eigen::VectorXcd amplitudes;
};

/// Weighted mixture of pure symmetric states of N = 2S spin-1/2 atoms.
struct DickeEnsembleState {
  int atom_count = 2;  // N, even so that S is integral
  std::vector<DickeComponent> components;
  double target_xi2 = 1.0;   // intended squeezed-quadrature variance ratio
  double target_chi2 = 1.0;  // intended antisqueezed variance ratio

  double spin() const { return atom_count / 2.0; }
  int dim() const { return atom_count + 1; }
};

struct SpinMoments {
  double sx = 0, sy = 0, sz = 0;
  double var_sx = 0, var_sy = 0, var_sz = 0;
};

namespace detail {

inline void require_even_n(int n) {
  if (n < 2 || n % 2 != 0)
    throw std::invalid_argument("atom_count must be an even integer >= 2");
}

// Off-diagonal couplings c_i = <m+1|S_x|m> = sqrt(S(S+1) - m(m+1))/2 for
// m = -S + i.
inline Eigen::VectorXd sx_couplings(int n) {
  const double s = n / 2.0;
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    const double m = -s + i;
    c[i] = 0.5 * std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  return c;
}

struct SxEigenEntry {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;       // columns are eigenvectors
  Eigen::MatrixXcd half_pi_rotation;  // exp(-i (pi/2) S_x)
};

// Per-N cache of the S_x eigendecomposition, compute-once under a mutex and
// shared read-only afterwards.
class SxEigenCache {
 public:
  static std::shared_ptr<const SxEigenEntry> get(int n) {
    static SxEigenCache cache;
    std::lock_guard<std::mutex> lock(cache.mutex_);
    auto& slot = cache.entries_[n];
    if (!slot) slot = build(n);
    return slot;
  }

 private:
  static std::shared_ptr<SxEigenEntry> build(int n) {
    require_even_n(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd off = sx_couplings(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, off);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("S_x eigendecomposition failed");
    auto entry = std::make_shared<SxEigenEntry>();
    entry->eigenvalues = solver.eigenvalues();
    entry->eigenvectors = solver.eigenvectors();
    Eigen::VectorXcd phases(n + 1);
    for (int i = 0; i <= n; ++i)
      phases[i] = std::exp(complexd(0.0, -M_PI / 2.0 * entry->eigenvalues[i]));
    entry->half_pi_rotation = (entry->eigenvectors * phases.asDiagonal()) *
                              entry->eigenvectors.transpose();
    return entry;
  }

  std::mutex mutex_;
  std::map<int, std::shared_ptr<SxEigenEntry>> entries_;
};

inline double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace detail

/// Coherent spin state along +x: amplitudes 2^-S sqrt(C(2S, S+m)), built in
/// log space so large N does not overflow.
inline DickeEnsembleState build_css(int n) {
  detail::require_even_n(n);
  const double s = n / 2.0;
  Eigen::VectorXcd psi(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double m = -s + i;
    psi[i] = std::exp(0.5 * detail::log_choose(2.0 * s, s + m) - s * std::log(2.0));
  }
  psi.normalize();
  DickeEnsembleState state;
  state.atom_count = n;
  state.components.push_back({1.0, std::move(psi)});
  return state;
}

/// Unitary squeezed state as a real Gaussian amplitude profile in m with
/// target variance (S/2) chi2 along S_z and (S/2)/chi2 along S_y. Valid only
/// well inside the oscillator regime; chi2 > N/10 is rejected.
inline DickeEnsembleState build_pure_squeezed(int n, double chi2) {
  detail::require_even_n(n);
  if (!(chi2 >= 1.0)) throw std::invalid_argument("chi2 must be >= 1");
  if (chi2 > n / 10.0)
    throw std::invalid_argument("chi2 > N/10 leaves the oscillator-plane regime");
  const double s = n / 2.0;
  const double var = (s / 2.0) * chi2;
  Eigen::VectorXcd psi(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double m = -s + i;
    psi[i] = std::exp(-m * m / (4.0 * var));
  }
  psi.normalize();
  DickeEnsembleState state;
  state.atom_count = n;
  state.target_xi2 = 1.0 / chi2;
  state.target_chi2 = chi2;
  state.components.push_back({1.0, std::move(psi)});
  return state;
}

/// Applies exp(-i angle S_x) to every component via the cached
/// eigendecomposition.
inline DickeEnsembleState rotate_about_x(const DickeEnsembleState& state,
                                         double angle) {
  auto eig = detail::SxEigenCache::get(state.atom_count);
  Eigen::VectorXcd phases(state.dim());
  for (int i = 0; i < state.dim(); ++i)
    phases[i] = std::exp(complexd(0.0, -angle * eig->eigenvalues[i]));
  DickeEnsembleState out = state;
  for (auto& comp : out.components)
    comp.amplitudes = eig->eigenvectors *
                      (phases.asDiagonal() *
                       (eig->eigenvectors.transpose() * comp.amplitudes));
  return out;
}

/// First and second moments of S_x, S_y, S_z over the mixture (classical
/// mixing: weighted expectation values, then variance about the mixed mean).
inline SpinMoments measure(const DickeEnsembleState& state) {
  const int n = state.atom_count;
  const double s = n / 2.0;
  const Eigen::VectorXd c = detail::sx_couplings(n);
  SpinMoments out;
  double sx2 = 0, sy2 = 0, sz2 = 0;
  for (const auto& comp : state.components) {
    const Eigen::VectorXcd& v = comp.amplitudes;
    Eigen::VectorXcd xv = Eigen::VectorXcd::Zero(n + 1);
    Eigen::VectorXcd yv = Eigen::VectorXcd::Zero(n + 1);
    for (int i = 0; i < n; ++i) {
      xv[i + 1] += c[i] * v[i];
      xv[i] += c[i] * v[i + 1];
      // S_y = (S_+ - S_-)/(2i) with S_+|m> = 2 c |m+1>
      yv[i + 1] += complexd(0.0, -1.0) * c[i] * v[i];
      yv[i] += complexd(0.0, 1.0) * c[i] * v[i + 1];
    }
    double mz = 0, mz2 = 0;
    for (int i = 0; i <= n; ++i) {
      const double p = std::norm(v[i]);
      const double m = -s + i;
      mz += p * m;
      mz2 += p * m * m;
    }
    const double w = comp.weight;
    out.sx += w * v.dot(xv).real();
    out.sy += w * v.dot(yv).real();
    out.sz += w * mz;
    sx2 += w * xv.squaredNorm();
    sy2 += w * yv.squaredNorm();
    sz2 += w * mz2;
  }
  out.var_sx = sx2 - out.sx * out.sx;
  out.var_sy = sy2 - out.sy * out.sy;
  out.var_sz = sz2 - out.sz * out.sz;
  return out;
}

namespace detail {

// Nodes and weights of K-point Gauss-Hermite quadrature (weight e^{-x^2}),
// weights normalized to sum 1, computed from the Jacobi matrix.
inline void gauss_hermite(int k, std::vector<double>& nodes,
                          std::vector<double>& weights) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd off(k - 1 > 0 ? k - 1 : 0);
  for (int j = 1; j < k; ++j) off[j - 1] = std::sqrt(j / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off);
  nodes.resize(k);
  weights.resize(k);
  for (int i = 0; i < k; ++i) {
    nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
}

} // namespace detail

/// Non-unitary squeezed state with variances (S/2) xi2 along S_y and
/// (S/2) chi2 along S_z, built as a Gauss-Hermite mixture of the unitary
/// state rotated about z by small angles kappa_j, which displaces S_y by
/// kappa <S_x> while leaving |psi_m|^2 (hence the S_z statistics) unchanged.
inline DickeEnsembleState build_nonunitary_mixture(int n, double xi2,
                                                   double chi2, int k = 21) {
  if (!(xi2 * chi2 >= 1.0 - 1e-12))
    throw std::invalid_argument("state area xi2*chi2 must be >= 1");
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("component count must be odd");
  DickeEnsembleState pure = build_pure_squeezed(n, chi2);
  pure.target_xi2 = xi2;
  const double excess = (n / 4.0) * (xi2 - 1.0 / chi2);  // (S/2)(xi2 - 1/chi2)
  if (excess <= 0.0 || k == 1) return pure;

  const double mean_sx = measure(pure).sx;
  const double kappa_var = excess / (mean_sx * mean_sx);
  std::vector<double> nodes, weights;
  detail::gauss_hermite(k, nodes, weights);

  DickeEnsembleState out;
  out.atom_count = n;
  out.target_xi2 = xi2;
  out.target_chi2 = chi2;
  const Eigen::VectorXcd& base = pure.components.front().amplitudes;
  const double s = n / 2.0;
  for (int j = 0; j < k; ++j) {
    const double kappa = std::sqrt(2.0 * kappa_var) * nodes[j];
    Eigen::VectorXcd psi(n + 1);
    for (int i = 0; i <= n; ++i)
      psi[i] = base[i] * std::exp(complexd(0.0, kappa * (-s + i)));
    out.components.push_back({weights[j], std::move(psi)});
  }
  return out;
}

} // namespace sqclock
