#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ldrt/core.hpp"
#include "ldrt/thermo.hpp"

namespace ldrt {

/// Lambda, T*, Lambda* and the dimension rates of one Gibbs measure.
///
/// Lambda* is evaluated through the parametrization x = T'(q),
/// Lambda*(x) = (q - 1) T'(q) - T(q), so every evaluation is a single
/// monotone root solve on T'.
class RateProfile {
 public:
  const GibbsMeasure& gibbs() const { return gibbs_; }
  double d_mu() const { return d_mu_; }
  bool maximal_dimension() const { return maximal_; }
  /// Closure of the range of T'.
  const Interval<double>& support() const { return support_; }
  /// Lambda* at the two support edges (limits from inside).
  double edge_value_low() const { return edge_low_; }
  double edge_value_high() const { return edge_high_; }

  double T(double q) const;
  double T_prime(double q) const;
  /// Lambda*(T'(q)).
  double lambda_star_at(double q) const;
  /// Solves T'(q) = x for x strictly inside the support.
  double q_of(double x) const;

 private:
  friend RateProfile rate_profile(const GibbsMeasure& gibbs);

  GibbsMeasure gibbs_;
  double d_mu_ = 0.0;
  bool maximal_ = false;
  Interval<double> support_{};
  double edge_low_ = kInf, edge_high_ = kInf;
  double q_low_ = 0.0, q_high_ = 0.0;  // q beyond which T' sits at the edge to 1e-12
};

RateProfile rate_profile(const GibbsMeasure& gibbs);

/// Lambda(lambda) = T(lambda + 1), fresh bisection.
double lambda_of(const RateProfile& profile, double lambda);

/// T*(x) = sup_q {q x - T(q)}; kInf outside the support.
double t_star(const RateProfile& profile, double x);

/// Lambda*(x) = -x + T*(x).
double lambda_star(const RateProfile& profile, double x);

/// Dimension rate: psi(eps) = Lambda*(-d - eps), psi(-eps) = Lambda*(-d + eps).
double psi_rate(const RateProfile& profile, double signed_eps);

/// sup over gamma in (0,1) of min{(1 - gamma) eps, Lambda*(-d - gamma eps)}.
double g1(const RateProfile& profile, double eps);

struct G2Result {
  double value = 0.0;
  double gamma = 0.0;
  double eps1 = 0.0;  // epsilon'
  double eps2 = 0.0;  // epsilon''
  bool non_positive = false;
};

/// sup over gamma in (0,1), eps', eps'' in (0,eps) of
/// min{-gamma eps - eps'' + min{d2, eps - eps'}, Lambda*(-d - gamma eps),
///     min{a0, Lambda*(-d + eps')}, Lambda*(-d + eps'')}.
/// Grid search (three passes of 32 points per axis) followed by an exact
/// level-set polish; the reported triple attains `value`.
G2Result g2(const RateProfile& profile, double eps, double a0, double d2);

/// Objective of g2 at one triple.
double g2_objective(const RateProfile& profile, double eps, double a0, double d2, double gamma, double eps1,
                    double eps2);

struct PhiEntry {
  double a = 0.0;
  double value = 0.0;  // phi(a, eps)
};

struct Theorem25Grids {
  std::vector<double> gamma;
  std::vector<double> eps2;
};

/// Log-refined grids toward both ends of (0,1) and (0,eps).
Theorem25Grids default_theorem25_grids(double eps, std::size_t points = 400);

/// Bounds for the slow and fast return exponents from dimension and
/// fast-return rates:
///   first  = max_gamma min{(1 - gamma) eps, psi(gamma eps)}, polished by bisection at the crossing
///            (psi is assumed nondecreasing on [0, eps])
///   second = max min{-gamma eps - eps'' + a, psi(gamma eps), phi(a, eps), psi(-eps'')}
std::pair<double, double> theorem25_lower_bounds(const std::function<double(double)>& psi,
                                                 std::span<const PhiEntry> phi, double eps,
                                                 const Theorem25Grids& grids);

/// (kappa c eps^2, kappa c (eps/3)^2); infinite c passes through except at eps = 0.
std::pair<double, double> quadratic_floor(double c, double eps, double kappa);

/// Lower rate of a finite sum: the smallest rate. Throws NonPositiveRate on inputs <= 0.
double combine_min_rate(std::span<const double> rates);

}  // namespace ldrt
