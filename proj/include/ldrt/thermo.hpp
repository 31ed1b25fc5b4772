#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ldrt/core.hpp"
#include "ldrt/dynamics.hpp"

namespace ldrt {

template <typename Scalar>
struct PerronData {
  Scalar radius{};
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> left;   // normalized so left . right = 1
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> right;  // entries sum to 1
  int iterations = 0;
};

namespace detail {

/// Power iteration for a nonnegative primitive matrix.
///
/// Convergence is certified by the Collatz-Wielandt bounds
/// min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i, which must agree to `rtol`
/// relative. Iteration continues past `rtol` while the bracket still shrinks.
template <typename M, typename Vector>
typename Vector::Scalar power_iterate(const M& m, Vector& v, int& used, typename Vector::Scalar rtol, int max_iter) {
  using Scalar = typename Vector::Scalar;
  const auto n = m.rows();
  v = Vector::Constant(n, Scalar(1) / Scalar(n));
  Scalar best_gap = std::numeric_limits<Scalar>::infinity();
  Scalar estimate = 0;
  int stalled = 0;
  Vector w(n);
  for (int it = 1; it <= max_iter; ++it) {
    w.noalias() = m * v;
    Scalar lo = std::numeric_limits<Scalar>::infinity(), hi = 0;
    bool certified = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v(i) > 0) {
        const Scalar ratio = w(i) / v(i);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      } else if (w(i) > 0) {
        certified = false;
      }
    }
    used = it;
    if (certified) estimate = (lo + hi) / 2;
    // Slow plain iteration usually means a near-periodic matrix; M + shift*I keeps
    // the Perron vector and pulls the competing eigenvalues off the circle.
    const Scalar shift = it > 64 && certified ? estimate : Scalar(0);
    w += shift * v;
    const Scalar total = w.sum();
    if (!(total > 0)) throw Error(Errc::NoConvergence, "power iteration collapsed to zero");
    v = w / total;
    if (!certified) continue;
    const Scalar gap = (hi - lo) / hi;
    if (gap <= 4 * std::numeric_limits<Scalar>::epsilon()) return estimate;
    if (gap < best_gap) {
      best_gap = gap;
      stalled = 0;
    } else if (++stalled > 20 && best_gap <= rtol) {
      return estimate;
    }
  }
  if (best_gap <= rtol) return estimate;
  throw Error(Errc::NoConvergence, "power iteration did not converge");
}

}  // namespace detail

template <typename Derived>
PerronData<typename Derived::Scalar> perron(const Eigen::MatrixBase<Derived>& matrix,
                                            typename Derived::Scalar rtol = 1e-13, int max_iter = 100000) {
  PerronData<typename Derived::Scalar> out;
  int used_right = 0, used_left = 0;
  out.radius = detail::power_iterate(matrix.derived(), out.right, used_right, rtol, max_iter);
  detail::power_iterate(matrix.derived().transpose(), out.left, used_left, rtol, max_iter);
  out.left /= out.left.dot(out.right);
  out.iterations = used_right + used_left;
  return out;
}

/// Perron root only.
template <typename Derived>
typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& matrix,
                                         typename Derived::Scalar rtol = 1e-13, int max_iter = 100000) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> v;
  int used = 0;
  return detail::power_iterate(matrix.derived(), v, used, rtol, max_iter);
}

/// Locally constant potential: one value per branch.
struct Potential {
  Eigen::VectorXd values;

  static Potential log_weights(std::span<const double> weights);
};

struct PressureResult {
  double value = 0.0;
  Eigen::VectorXd left;
  Eigen::VectorXd right;
};

/// log of the spectral radius of M_ij = A_ij exp(potential_j).
PressureResult pressure_data(const Eigen::MatrixXi& transitions, const Eigen::VectorXd& potential);
double pressure(const Eigen::MatrixXi& transitions, const Eigen::VectorXd& potential);
double pressure(const MarkovMap& map, const Potential& potential);

/// Equilibrium state of a locally constant potential: a stationary Markov
/// measure on the coding, pushed to [0,1] by the map.
class GibbsMeasure {
 public:
  const MarkovMap& map() const { return map_; }
  int size() const { return map_.size(); }
  const Eigen::MatrixXd& transition() const { return transition_; }
  const Eigen::VectorXd& stationary() const { return stationary_; }
  const Eigen::VectorXd& potential() const { return potential_; }
  /// Normalized potential log psi = zeta - P(zeta); has zero pressure.
  const Eigen::VectorXd& log_psi() const { return log_psi_; }
  double pressure() const { return pressure_; }
  double kappa() const { return kappa_; }
  bool is_bernoulli() const { return bernoulli_; }

  double cylinder_mass(std::span<const Symbol> word) const;

  Symbol draw_initial(Rng& rng) const { return draw(initial_cdf_, rng); }
  Symbol draw_next(Symbol from, Rng& rng) const { return draw(row_cdf_[from], rng); }

 private:
  friend GibbsMeasure gibbs_measure(const MarkovMap& map, const Potential& potential, int n_check);

  static Symbol draw(const std::vector<double>& cdf, Rng& rng) {
    const double u = uniform01(rng);
    std::size_t s = 0;
    while (s + 1 < cdf.size() && u >= cdf[s]) ++s;
    return static_cast<Symbol>(s);
  }

  MarkovMap map_;
  Eigen::MatrixXd transition_;
  Eigen::VectorXd stationary_;
  Eigen::VectorXd potential_;
  Eigen::VectorXd log_psi_;
  double pressure_ = 0.0;
  double kappa_ = 1.0;
  bool bernoulli_ = false;
  std::vector<double> initial_cdf_;
  std::vector<std::vector<double>> row_cdf_;
};

GibbsMeasure gibbs_measure(const MarkovMap& map, const Potential& potential, int n_check = 8);

/// T(q): the unique T with P(-T log|g'| + q log psi) = 0, by bisection.
double spectrum_T(const GibbsMeasure& gibbs, double q, double tol = 1e-13);

/// Closed-form oracle for full-branch maps: the root of sum_i p_i^q a_i^T = 1.
double moran_T(std::span<const double> p, std::span<const double> a, double q);

struct SpectrumTable {
  std::vector<double> q;
  std::vector<double> T;
  double d_mu = 0.0;
  double T2_at_1 = 0.0;
  bool maximal_dimension = false;

  /// T(q)/(1-q); undefined at q = 1.
  double hp(std::size_t i) const { return T[i] / (1.0 - q[i]); }
};

SpectrumTable compute_spectrum(const GibbsMeasure& gibbs, double q_min, double q_max, double step);

struct DimensionEstimate {
  double from_spectrum = 0.0;  // -T'(1), Richardson-extrapolated central differences
  double from_entropy = 0.0;   // h_mu / lambda_mu
  double value() const { return from_spectrum; }
};

/// d_mu by both routes; throws InconsistentDimension if they differ by more than 1e-6.
DimensionEstimate dimension(const GibbsMeasure& gibbs, double h = 1e-3);

double entropy(const GibbsMeasure& gibbs);
double lyapunov(const GibbsMeasure& gibbs);

/// T''(1) by Richardson-extrapolated second differences.
double spectrum_curvature(const GibbsMeasure& gibbs, double h = 1e-3);

struct VarianceEstimate {
  double from_pressure = 0.0;
  std::optional<double> iid;  // only for Bernoulli measures
  double value() const { return from_pressure; }
};

/// Asymptotic variance of log psi + d_mu log|g'| under mu.
/// Throws InconsistentVariance when the i.i.d. cross-check disagrees beyond 1e-5 relative.
VarianceEstimate variance(const GibbsMeasure& gibbs);

/// True when T is affine (measure of maximal dimension).
bool is_maximal_dimension(const GibbsMeasure& gibbs);

struct Curvature {
  double from_spectrum = kInf;  // (1/2) / T''(1)
  double from_variance = kInf;  // (1/2) lambda_mu / sigma_mu^2
  double discrepancy = 0.0;     // relative
  bool maximal_dimension = false;
  double value() const { return from_variance; }
};

/// Curvature of the rate function at its zero. +inf for the measure of maximal dimension.
Curvature curvature(const GibbsMeasure& gibbs);

}  // namespace ldrt
