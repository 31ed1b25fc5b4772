#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace ldrt {

using Rational = mpq_class;
using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;

/// +inf is an ordinary value for rates; it flows through min/max unchanged.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Errc {
  NotExpanding,
  NotMarkov,
  NotPrimitive,
  BadPartition,
  DepthOverflow,
  Inadmissible,
  InsufficientDepth,
  NoConvergence,
  BracketFailure,
  BadInput,
  InconsistentDimension,
  InconsistentVariance,
  MaximalDimension,
  BadInterval,
  ZeroMeasure,
  ZeroMass,
  NonPositiveRate,
  InvalidEstimate,
  Config,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

template <typename T>
struct Interval {
  T lo;
  T hi;
  T width() const { return hi - lo; }
  bool contains(const T& x) const { return lo <= x && x < hi; }
};

/// Accepts "p/q", integers and plain decimals ("0.3" is exactly 3/10).
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
inline double to_double(const Rational& q) { return q.get_d(); }

// Random streams. Every Monte Carlo sample owns an engine seeded from
// (master seed, operation tag, sample index) through std::seed_seq, so a
// sample's draws never depend on which worker ran it.
using Rng = std::mt19937_64;

Rng make_stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index);

/// Uniform on [0,1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace ldrt
