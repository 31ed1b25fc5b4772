#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ldrt/core.hpp"
#include "ldrt/dynamics.hpp"
#include "ldrt/itinerary.hpp"
#include "ldrt/measure.hpp"
#include "ldrt/thermo.hpp"

namespace ldrt {

/// Runs body(i) for i in [0, n) on `workers` threads with static chunks.
/// Bodies write only to their own slot, so results do not depend on the
/// worker count.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body);

/// `steps` is the first time, or the cap when censored.
struct ReturnTime {
  std::size_t steps = 0;
  bool censored = false;
};

/// tau_r(x) for an exact rational point.
ReturnTime return_time(const MarkovMap& map, const Rational& x, const Rational& r, std::size_t cap);
/// tau_r(x) for a mu-random point, deepening its word when an event is undecided.
ReturnTime return_time(const MarkovMap& map, ChainItinerary& x, const Rational& r, std::size_t cap);
/// tau_r(x) for a point known to a fixed depth; throws InsufficientDepth.
ReturnTime return_time(const MarkovMap& map, const SymbolicPoint& p, const Rational& r, std::size_t cap);

/// First n >= 1 with g^n x in the closed interval a.
template <typename It>
ReturnTime hitting_time_set(const MarkovMap& map, It& x, const Interval<Rational>& a, std::size_t cap) {
  Cut lo(map, a.lo), hi(map, a.hi);
  for (std::size_t n = 1; n <= cap; ++n)
    if (lo.compare(x, n) >= 0 && hi.compare(x, n) <= 0) return {n, false};
  return {cap, true};
}

/// First n >= 1 at which the itinerary of x restarts with `word`.
template <typename It>
ReturnTime hitting_time_cylinder(It& x, std::span<const Symbol> word, std::size_t cap) {
  for (std::size_t n = 1; n <= cap; ++n) {
    std::size_t k = 0;
    while (k < word.size() && x.at(n + k) == word[k]) ++k;
    if (k == word.size()) return {n, false};
  }
  return {cap, true};
}

/// Wilson score interval at 95%.
struct Wilson {
  double low = 0.0;
  double high = 1.0;
};
Wilson wilson_interval(std::size_t hits, std::size_t n, double z = 1.959963984540054);

enum class TailEvent {
  Slow,  // tau_r >= r^(-d - eps)
  Fast,  // tau_r <= r^(-d + eps)
};

struct TailEstimate {
  double r = 0.0;
  double threshold_exponent = 0.0;
  std::size_t hits = 0;
  std::size_t n = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t censored = 0;
  std::size_t cap = 0;
  bool invalid = false;
};

struct RateFit {
  std::vector<std::pair<double, double>> points;  // (log r, log p_hat) of the estimates used
  std::vector<double> r_grid;
  double slope = 0.0;
  double stderr_slope = 0.0;
  /// No two usable points: slope is log(ci_high)/log(r) at the smallest radius.
  bool surrogate = false;
};

/// Weighted least squares of log p_hat on log r over estimates with hits >= 10.
RateFit fit_rate(std::span<const TailEstimate> estimates);

struct SeedPlan {
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct TailConfig {
  double eps = 0.3;
  TailEvent event = TailEvent::Slow;
  std::vector<double> r_grid;
  std::size_t n_per_r = 10000;
  double cap_factor = 10.0;
};

struct TailResult {
  std::vector<TailEstimate> estimates;
  RateFit fit;
};

TailResult empirical_tail(const GibbsMeasure& gibbs, double d_mu, const TailConfig& config, const SeedPlan& plan);

struct KacResult {
  double mean_product = 0.0;
  double stderr_product = 0.0;
  double mu_a = 0.0;
  std::size_t censored = 0;
};

/// mean(tau_A) mu(A) for A a cylinder, x drawn from mu conditioned on A.
KacResult kac_check(const GibbsMeasure& gibbs, std::span<const Symbol> word, std::size_t n_samples,
                    const SeedPlan& plan);

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<double> survival;  // S(t) = P(tau_B > t / mu(B)) under mu restricted to B
  double mu_ball = 0.0;
  std::size_t n = 0;
};

/// Survival of the scaled return time to B = B(x0, 2r) for x conditioned on B.
SurvivalCurve conditional_return_cdf(const GibbsMeasure& gibbs, const Rational& x0, const Rational& r,
                                     std::span<const double> t_grid, std::size_t n, const SeedPlan& plan,
                                     std::uint64_t tag = 0);

/// Rational center of a mu-typical point: midpoint of a cylinder narrower than width.
Rational sample_center(const GibbsMeasure& gibbs, Rng& rng, double width);

struct PhiConfig {
  std::vector<double> a;  // exponents to classify against
  double eps = 0.3;
  double C = 1.0;
  std::vector<double> r_grid;
  std::size_t n_centers = 200;
  std::size_t n_inner = 2000;
  std::size_t batch = 250;
};

struct PhiResult {
  std::vector<double> a;
  /// Per a: centers whose quick-return probability exceeds C r^a, per radius.
  std::vector<std::vector<TailEstimate>> estimates;
  std::vector<RateFit> fits;
  std::vector<std::size_t> undecided;  // per a, summed over radii
  std::vector<bool> invalid;           // per a: more than 20% undecided at some radius
};

PhiResult phi_rate_estimate(const GibbsMeasure& gibbs, double d_mu, const PhiConfig& config, const SeedPlan& plan);

struct ExpLawResult {
  double fraction_bad = 0.0;
  double worst_deviation = 0.0;
  double deviation_bound = 0.0;  // r^a
  double fraction_bound = 0.0;   // r^b
  bool verdict = false;
  std::vector<double> deviations;  // per center
};

ExpLawResult exp_law_check(const GibbsMeasure& gibbs, const Rational& r, std::size_t n_centers, std::size_t n_inner,
                           std::span<const double> t_grid, double a, double b, const SeedPlan& plan);

/// Exponent of mu{Z_r >= d + eps} (eps > 0) or mu{Z_r <= d + eps} (eps < 0)
/// with Z_r = log mu(B(x,r)) / log r from exact ball measures.
TailResult level_set_tail(const GibbsMeasure& gibbs, double d_mu, double eps, std::span<const double> r_grid,
                          std::size_t n_per_r, const SeedPlan& plan);

}  // namespace ldrt
