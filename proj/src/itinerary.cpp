#include "ldrt/itinerary.hpp"

#include <cmath>

namespace ldrt {

SymbolicPoint sample_point(const GibbsMeasure& gibbs, Rng& rng, std::size_t depth) {
  if (depth == 0) throw Error(Errc::BadInput, "depth must be at least 1");
  if (depth > gibbs.map().max_depth()) throw Error(Errc::DepthOverflow, "depth " + std::to_string(depth));
  SymbolicPoint p;
  p.word.reserve(depth);
  p.word.push_back(gibbs.draw_initial(rng));
  while (p.word.size() < depth) p.word.push_back(gibbs.draw_next(p.word.back(), rng));
  return p;
}

Rational cylinder_midpoint(const MarkovMap& map, std::span<const Symbol> word) {
  const auto c = cylinder(map, word);
  Rational mid = (c.lo + c.hi) / 2;
  mid.canonicalize();
  return mid;
}

std::size_t depth_for_width(const MarkovMap& map, double width) {
  if (!(width > 0)) throw Error(Errc::BadInput, "width must be positive");
  const double n = std::ceil(-std::log(width) / map.log_beta());
  return static_cast<std::size_t>(std::max(1.0, n));
}

}  // namespace ldrt
