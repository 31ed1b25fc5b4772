#pragma once

#include <cstddef>
#include <span>

#include "ldrt/core.hpp"
#include "ldrt/dynamics.hpp"
#include "ldrt/thermo.hpp"

namespace ldrt {

/// A mu-random point known through a lazily grown word. Symbols past the
/// fixed prefix are drawn from the Markov chain of the Gibbs measure, which is
/// the conditional law of the tail given the prefix.
class ChainItinerary {
 public:
  ChainItinerary(const GibbsMeasure& gibbs, Rng rng, Word prefix = {})
      : gibbs_(&gibbs), rng_(std::move(rng)), word_(std::move(prefix)) {}

  Symbol at(std::size_t k) {
    while (word_.size() <= k) extend();
    return word_[k];
  }
  /// Makes sure at least n symbols are known.
  void reserve_depth(std::size_t n) {
    if (n > 0) at(n - 1);
  }
  const Word& word() const { return word_; }
  std::span<const Symbol> prefix(std::size_t n) {
    reserve_depth(n);
    return {word_.data(), n};
  }
  const GibbsMeasure& gibbs() const { return *gibbs_; }

 private:
  void extend() {
    word_.push_back(word_.empty() ? gibbs_->draw_initial(rng_) : gibbs_->draw_next(word_.back(), rng_));
  }

  const GibbsMeasure* gibbs_;
  Rng rng_;
  Word word_;
};

/// Itinerary of a SymbolicPoint; asking past its depth throws InsufficientDepth.
class FixedItinerary {
 public:
  explicit FixedItinerary(const SymbolicPoint& p) : word_(&p.word) {}

  Symbol at(std::size_t k) const {
    if (k >= word_->size())
      throw Error(Errc::InsufficientDepth, "symbol " + std::to_string(k) + " requested from a depth " +
                                               std::to_string(word_->size()) + " point");
    return (*word_)[k];
  }
  std::size_t depth() const { return word_->size(); }

 private:
  const Word* word_;
};

/// Word of length `depth` from the stationary chain of `gibbs`.
SymbolicPoint sample_point(const GibbsMeasure& gibbs, Rng& rng, std::size_t depth);

/// Exact rational midpoint of the cylinder of the first n symbols.
Rational cylinder_midpoint(const MarkovMap& map, std::span<const Symbol> word);

/// Depth at which every cylinder is narrower than width (beta^-n <= width).
std::size_t depth_for_width(const MarkovMap& map, double width);

}  // namespace ldrt
