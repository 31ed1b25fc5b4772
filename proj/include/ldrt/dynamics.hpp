#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ldrt/core.hpp"

namespace ldrt {

/// One increasing affine branch of a piecewise-linear Markov map.
/// The image is optional on input; when absent it is derived from the
/// transition row (the admissible domains must then be contiguous).
struct BranchSpec {
  Rational lo;
  Rational hi;
  Rational slope;
  std::optional<Interval<Rational>> image;
};

struct MarkovMapSpec {
  std::vector<BranchSpec> branches;
  /// m x m 0/1 matrix; an empty matrix means "derive from the images".
  Eigen::MatrixXi transitions;
};

/// Validated piecewise-linear expanding Markov map of [0,1].
/// Branch domains are half-open [u_i, v_i); the point 1 belongs to the last branch.
class MarkovMap {
 public:
  int size() const { return static_cast<int>(lo_.size()); }
  const Rational& lo(int i) const { return lo_[i]; }
  const Rational& hi(int i) const { return hi_[i]; }
  const Rational& slope(int i) const { return slope_[i]; }
  const Interval<Rational>& image(int i) const { return image_[i]; }
  const Eigen::MatrixXi& transitions() const { return transitions_; }
  bool admissible(Symbol from, Symbol to) const { return transitions_(from, to) != 0; }

  /// Minimal slope; every cylinder of length n has width at most beta^-n.
  const Rational& beta() const { return beta_; }
  /// Maximal number of preimages (max row sum of the transition matrix).
  int degree() const { return degree_; }
  std::size_t max_depth() const { return max_depth_; }

  Eigen::VectorXd log_slopes() const { return log_slopes_; }
  double log_beta() const { return log_beta_; }

  Symbol branch_of(const Rational& x) const;
  /// g(x), exact.
  Rational apply(const Rational& x) const;
  /// Branch i applied to x (no check that x lies in branch i).
  Rational apply_branch(Symbol i, const Rational& x) const { return slope_[i] * x + offset_[i]; }
  /// Inverse of branch i evaluated at y, exact.
  Rational inverse(Symbol i, const Rational& y) const;

  MarkovMapSpec spec() const;

 private:
  friend MarkovMap build_map(MarkovMapSpec spec, std::size_t max_depth);

  std::vector<Rational> lo_, hi_, slope_, offset_;
  std::vector<Interval<Rational>> image_;
  Eigen::MatrixXi transitions_;
  Rational beta_;
  int degree_ = 0;
  std::size_t max_depth_ = 0;
  Eigen::VectorXd log_slopes_;
  double log_beta_ = 0.0;
};

inline constexpr std::size_t kDefaultMaxDepth = 1u << 16;

MarkovMap build_map(MarkovMapSpec spec, std::size_t max_depth = kDefaultMaxDepth);

/// A point known through its first `depth` symbols, i.e. through its cylinder.
struct SymbolicPoint {
  Word word;
  std::size_t depth() const { return word.size(); }
};

/// Itinerary of x by exact arithmetic.
SymbolicPoint encode(const MarkovMap& map, const Rational& x, std::size_t n);

/// Points whose itinerary begins with `word`. Throws Inadmissible.
Interval<Rational> cylinder(const MarkovMap& map, std::span<const Symbol> word);

bool is_admissible(const MarkovMap& map, std::span<const Symbol> word);

/// Closed enclosure of |g^k x - x| for every x in the cylinder of p.
/// Throws InsufficientDepth when k >= depth or the enclosure is wider than tol.
Interval<Rational> orbit_distance(const MarkovMap& map, const SymbolicPoint& p, std::size_t k,
                                  double tol = kInf);

/// Itinerary of a fixed rational point, extended lazily by exact iteration.
class OrbitItinerary {
 public:
  OrbitItinerary(const MarkovMap& map, Rational x) : map_(&map), point_(std::move(x)) {}

  Symbol at(std::size_t k) {
    while (word_.size() <= k) extend();
    return word_[k];
  }
  const Word& computed() const { return word_; }

 private:
  void extend();

  const MarkovMap* map_;
  Rational point_;
  Word word_;
};

inline constexpr std::size_t kCompareDepth = 4096;

/// Compares g^offset(x) with y where `a` is the itinerary of x and `b` that of y.
/// Branches are increasing and ordered, so the lexicographic order of
/// itineraries is the order of the points. Returns -1, +1, or 0 if the first
/// max_len symbols agree (equal points, for all practical purposes).
template <typename A, typename B>
int compare_tail(A& a, std::size_t offset, B& b, std::size_t max_len = kCompareDepth) {
  for (std::size_t k = 0; k < max_len; ++k) {
    const Symbol sa = a.at(offset + k);
    const Symbol sb = b.at(k);
    if (sa != sb) return sa < sb ? -1 : 1;
  }
  return 0;
}

/// A threshold point e on the line. Orbit points are compared to it
/// symbolically; thresholds outside [0,1) need no itinerary.
class Cut {
 public:
  Cut(const MarkovMap& map, const Rational& e);

  /// Sign of (g^offset(x) - e), 0 when undecided to kCompareDepth symbols.
  template <typename A>
  int compare(A& a, std::size_t offset) {
    if (kind_ == Kind::Below) return 1;
    if (kind_ == Kind::Above) return -1;
    return compare_tail(a, offset, *itinerary_);
  }

  bool below_domain() const { return kind_ == Kind::Below; }
  bool above_domain() const { return kind_ == Kind::Above; }
  const Rational& value() const { return value_; }
  OrbitItinerary* itinerary() { return itinerary_ ? &*itinerary_ : nullptr; }

 private:
  enum class Kind { Below, Inside, Above };
  Kind kind_;
  Rational value_;
  std::optional<OrbitItinerary> itinerary_;
};

}  // namespace ldrt
