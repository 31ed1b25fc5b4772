#include "ldrt/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace ldrt {

namespace {

bool primitive(const Eigen::MatrixXi& a) {
  const int m = static_cast<int>(a.rows());
  const Eigen::MatrixXi base = (a.array() != 0).cast<int>();
  Eigen::MatrixXi power = base;
  // Wielandt: a primitive m x m matrix has A^k > 0 for k = (m-1)^2 + 1 <= m^2.
  for (int k = 1; k <= m * m; ++k) {
    if ((power.array() > 0).all()) return true;
    power = ((power * base).array() > 0).cast<int>();
  }
  return false;
}

}  // namespace

MarkovMap build_map(MarkovMapSpec spec, std::size_t max_depth) {
  const auto& branches = spec.branches;
  const int m = static_cast<int>(branches.size());
  if (m < 1 || m > 255) throw Error(Errc::BadPartition, "need between 1 and 255 branches");

  MarkovMap map;
  map.max_depth_ = max_depth;
  if (branches.front().lo != 0) throw Error(Errc::BadPartition, "first branch must start at 0");
  if (branches.back().hi != 1) throw Error(Errc::BadPartition, "last branch must end at 1");
  for (int i = 0; i < m; ++i) {
    const auto& b = branches[i];
    if (!(b.lo < b.hi)) throw Error(Errc::BadPartition, "empty branch " + std::to_string(i));
    if (i + 1 < m && b.hi != branches[i + 1].lo)
      throw Error(Errc::BadPartition, "gap or overlap between branches " + std::to_string(i) + " and " +
                                          std::to_string(i + 1));
    if (!(b.slope > 1)) throw Error(Errc::NotExpanding, "slope of branch " + std::to_string(i) + " is " + to_string(b.slope));
    map.lo_.push_back(b.lo);
    map.hi_.push_back(b.hi);
    map.slope_.push_back(b.slope);
  }

  auto breakpoint_index = [&](const Rational& x) -> int {
    for (int j = 0; j < m; ++j)
      if (map.lo_[j] == x) return j;
    if (x == 1) return m;
    return -1;
  };

  Eigen::MatrixXi derived = Eigen::MatrixXi::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    Interval<Rational> image;
    const Rational width = map.slope_[i] * (map.hi_[i] - map.lo_[i]);
    if (branches[i].image) {
      image = *branches[i].image;
    } else if (spec.transitions.size() == 0) {
      // Without image or transitions only a full branch is determined.
      if (width != 1)
        throw Error(Errc::NotMarkov, "branch " + std::to_string(i) + " has neither image nor transition row");
      image = {Rational(0), Rational(1)};
    } else {
      int first = -1, last = -1;
      for (int j = 0; j < m; ++j) {
        if (spec.transitions(i, j) == 0) continue;
        if (first < 0) first = j;
        else if (last != j - 1)
          throw Error(Errc::NotMarkov, "transition row " + std::to_string(i) + " is not contiguous");
        last = j;
      }
      if (first < 0) throw Error(Errc::NotMarkov, "transition row " + std::to_string(i) + " is empty");
      image = {map.lo_[first], map.hi_[last]};
    }
    const int a = breakpoint_index(image.lo);
    const int b = breakpoint_index(image.hi);
    if (a < 0 || b < 0 || a >= b)
      throw Error(Errc::NotMarkov, "image of branch " + std::to_string(i) + " is not a union of branch domains");
    if (image.width() != width)
      throw Error(Errc::NotMarkov, "image width of branch " + std::to_string(i) + " is " + to_string(image.width()) +
                                       ", slope times domain width is " + to_string(width));
    for (int j = a; j < b; ++j) derived(i, j) = 1;
    map.image_.push_back(image);
    map.offset_.push_back(Rational(image.lo - map.slope_[i] * map.lo_[i]));
  }

  if (spec.transitions.size() != 0) {
    if (spec.transitions.rows() != m || spec.transitions.cols() != m)
      throw Error(Errc::NotMarkov, "transition matrix must be " + std::to_string(m) + "x" + std::to_string(m));
    if (((spec.transitions.array() != 0).cast<int>() != derived.array()).any())
      throw Error(Errc::NotMarkov, "transition matrix disagrees with branch images");
  }
  if (!primitive(derived)) throw Error(Errc::NotPrimitive, "transition matrix is reducible or periodic");
  map.transitions_ = derived;

  map.beta_ = *std::min_element(map.slope_.begin(), map.slope_.end());
  map.degree_ = derived.rowwise().sum().maxCoeff();
  map.log_slopes_.resize(m);
  for (int i = 0; i < m; ++i) map.log_slopes_(i) = std::log(to_double(map.slope_[i]));
  map.log_beta_ = std::log(to_double(map.beta_));
  return map;
}

Symbol MarkovMap::branch_of(const Rational& x) const {
  if (x < 0 || x > 1) throw Error(Errc::BadInput, "point " + to_string(x) + " outside [0,1]");
  // Last branch whose left endpoint is <= x; x = 1 lands in the last branch.
  const auto it = std::upper_bound(lo_.begin(), lo_.end(), x);
  return static_cast<Symbol>(std::distance(lo_.begin(), it) - 1);
}

Rational MarkovMap::apply(const Rational& x) const {
  return apply_branch(branch_of(x), x);
}

Rational MarkovMap::inverse(Symbol i, const Rational& y) const { return lo_[i] + (y - image_[i].lo) / slope_[i]; }

MarkovMapSpec MarkovMap::spec() const {
  MarkovMapSpec s;
  for (int i = 0; i < size(); ++i) s.branches.push_back({lo_[i], hi_[i], slope_[i], image_[i]});
  s.transitions = transitions_;
  return s;
}

SymbolicPoint encode(const MarkovMap& map, const Rational& x, std::size_t n) {
  if (n < 1) throw Error(Errc::BadInput, "encode depth must be >= 1");
  if (n > map.max_depth()) throw Error(Errc::DepthOverflow, "depth " + std::to_string(n) + " exceeds maximum");
  SymbolicPoint p;
  p.word.reserve(n);
  Rational y = x;
  for (std::size_t k = 0; k < n; ++k) {
    const Symbol s = map.branch_of(y);
    p.word.push_back(s);
    y = map.apply_branch(s, y);
  }
  return p;
}

bool is_admissible(const MarkovMap& map, std::span<const Symbol> word) {
  for (std::size_t k = 0; k < word.size(); ++k) {
    if (word[k] >= map.size()) return false;
    if (k + 1 < word.size() && !map.admissible(word[k], word[k + 1])) return false;
  }
  return true;
}

Interval<Rational> cylinder(const MarkovMap& map, std::span<const Symbol> word) {
  if (word.empty()) return {Rational(0), Rational(1)};
  if (!is_admissible(map, word)) throw Error(Errc::Inadmissible, "word violates the transition matrix");
  const Symbol last = word.back();
  Interval<Rational> cyl{map.lo(last), map.hi(last)};
  for (std::size_t k = word.size() - 1; k-- > 0;) {
    cyl.lo = map.inverse(word[k], cyl.lo);
    cyl.hi = map.inverse(word[k], cyl.hi);
  }
  return cyl;
}

Interval<Rational> orbit_distance(const MarkovMap& map, const SymbolicPoint& p, std::size_t k, double tol) {
  if (k >= p.depth())
    throw Error(Errc::InsufficientDepth, "step " + std::to_string(k) + " needs depth > " + std::to_string(k));
  const std::span<const Symbol> word(p.word);
  const auto x = cylinder(map, word);
  const auto y = cylinder(map, word.subspan(k));
  Rational lo = 0;
  if (y.lo - x.hi > lo) lo = y.lo - x.hi;
  if (x.lo - y.hi > lo) lo = x.lo - y.hi;
  Rational hi = y.hi - x.lo;
  if (x.hi - y.lo > hi) hi = x.hi - y.lo;
  if (to_double(hi - lo) > tol)
    throw Error(Errc::InsufficientDepth, "enclosure width " + std::to_string(to_double(hi - lo)) + " exceeds tolerance");
  return {lo, hi};
}

void OrbitItinerary::extend() {
  if (word_.size() >= kCompareDepth * 4)
    throw Error(Errc::DepthOverflow, "orbit itinerary grew past " + std::to_string(word_.size()) + " symbols");
  const Symbol s = map_->branch_of(point_);
  word_.push_back(s);
  point_ = map_->apply_branch(s, point_);
}

Cut::Cut(const MarkovMap& map, const Rational& e) : value_(e) {
  if (e < 0) {
    kind_ = Kind::Below;
  } else if (e >= 1) {
    kind_ = Kind::Above;
  } else {
    kind_ = Kind::Inside;
    itinerary_.emplace(map, e);
  }
}

}  // namespace ldrt
