#pragma once

#include <cstddef>
#include <vector>

#include "ldrt/core.hpp"
#include "ldrt/dynamics.hpp"
#include "ldrt/itinerary.hpp"
#include "ldrt/thermo.hpp"

namespace ldrt {

/// The true value lies in [value - error_bound, value + error_bound].
struct MeasureQueryResult {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t nodes_visited = 0;
};

/// mu([u, v]) by descending the exact itineraries of u and v. Below their
/// common prefix the mass splits into whole children plus one partial child
/// on each side, and each partial child is summed along its own itinerary.
MeasureQueryResult measure_interval(const GibbsMeasure& gibbs, const Interval<Rational>& uv, double tol);

/// mu(B(x, r)), the ball clipped to [0,1].
MeasureQueryResult ball_measure(const GibbsMeasure& gibbs, const Rational& x, const Rational& r, double tol);

/// Ball measure to relative accuracy `rtol`.
MeasureQueryResult ball_measure_relative(const GibbsMeasure& gibbs, const Rational& x, const Rational& r,
                                         double rtol = 1e-9);

/// log mu(B(x, r)) / log r.
double local_dim_ratio(const GibbsMeasure& gibbs, const Rational& x, const Rational& r);

enum class LevelSet {
  Eps,      // mu(B(x,r)) >= r^(d + eps)
  MinusXi,  // mu(B(x,r)) <= r^(d - eps)
};

enum class Membership { In, Out, Undecidable };

Membership classify_level_set(const GibbsMeasure& gibbs, double d_mu, const Rational& x, const Rational& r,
                              LevelSet kind, double eps);

/// mu conditioned on [u, v], sampled exactly by descending the cylinder tree.
///
/// Inside the cylinder of a boundary point, the share of mass on the inner
/// side obeys R_n = sum_{j > x_{n+1}} Q + Q R_{n+1} (and the mirror recursion
/// for the left share), so the child weights are exact up to a truncation
/// at relative mass 1e-12. Once the cylinder lies inside [u, v] the tail is
/// the unconditional chain.
class ConditionalSampler {
 public:
  ConditionalSampler(const GibbsMeasure& gibbs, const Interval<Rational>& uv);

  double mass() const { return mass_; }
  const Interval<Rational>& interval() const { return uv_; }

  /// Prefix whose cylinder lies in [u, v] (or straddles it at the truncation depth).
  Word draw_prefix(Rng& rng) const;
  /// A conditioned point that keeps growing from the chain.
  ChainItinerary draw(Rng rng) const;

 private:
  struct Boundary {
    bool active = false;
    Word word;                 // itinerary x_0 .. x_N
    std::vector<double> share;  // share[n]: relative mass of cyl(x_0..x_n) on the inner side of x
  };
  Boundary make_boundary(const Rational& x, bool right_side) const;

  const GibbsMeasure* gibbs_;
  Interval<Rational> uv_;
  double mass_ = 0.0;
  Boundary lower_, upper_;
};

SymbolicPoint conditional_sample(const GibbsMeasure& gibbs, const Interval<Rational>& uv, Rng& rng,
                                 std::size_t depth);

}  // namespace ldrt
