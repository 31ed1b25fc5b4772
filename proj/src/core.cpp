#include "ldrt/core.hpp"

#include <algorithm>
#include <cctype>

namespace ldrt {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::NotExpanding: return "NotExpanding";
    case Errc::NotMarkov: return "NotMarkov";
    case Errc::NotPrimitive: return "NotPrimitive";
    case Errc::BadPartition: return "BadPartition";
    case Errc::DepthOverflow: return "DepthOverflow";
    case Errc::Inadmissible: return "Inadmissible";
    case Errc::InsufficientDepth: return "InsufficientDepth";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::BracketFailure: return "BracketFailure";
    case Errc::BadInput: return "BadInput";
    case Errc::InconsistentDimension: return "InconsistentDimension";
    case Errc::InconsistentVariance: return "InconsistentVariance";
    case Errc::MaximalDimension: return "MaximalDimension";
    case Errc::BadInterval: return "BadInterval";
    case Errc::ZeroMeasure: return "ZeroMeasure";
    case Errc::ZeroMass: return "ZeroMass";
    case Errc::NonPositiveRate: return "NonPositiveRate";
    case Errc::InvalidEstimate: return "InvalidEstimate";
    case Errc::Config: return "Config";
  }
  return "Unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

Rational parse_decimal(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  const auto dot = s.find('.');
  std::string_view whole = s.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw Error(Errc::BadInput, "empty number");
  if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
      (dot != std::string_view::npos && frac.empty() && whole.empty()))
    throw Error(Errc::BadInput, "not a rational: '" + std::string(s) + "'");
  mpz_class num(std::string(whole.empty() ? "0" : whole) + std::string(frac), 10);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
  Rational q(num, den);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view s = trim(text);
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_decimal(s);
  const Rational num = parse_decimal(trim(s.substr(0, slash)));
  const Rational den = parse_decimal(trim(s.substr(slash + 1)));
  if (den == 0) throw Error(Errc::BadInput, "zero denominator in '" + std::string(s) + "'");
  return Rational(num / den);
}

std::string to_string(const Rational& q) {
  Rational c(q);
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rng make_stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace ldrt
