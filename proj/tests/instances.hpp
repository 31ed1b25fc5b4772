#pragma once

#include <cmath>
#include <vector>

#include "ldrt/dynamics.hpp"
#include "ldrt/thermo.hpp"

namespace fixtures {

using ldrt::Rational;

inline Rational q(const char* s) { return ldrt::parse_rational(s); }

inline ldrt::MarkovMap doubling() {
  return ldrt::build_map({{{q("0"), q("1/2"), q("2"), {}}, {q("1/2"), q("1"), q("2"), {}}}, {}});
}

// Full branches [0, 3/10) and [3/10, 1).
inline ldrt::MarkovMap unequal() {
  return ldrt::build_map({{{q("0"), q("3/10"), q("10/3"), {}}, {q("3/10"), q("1"), q("10/7"), {}}}, {}});
}

// Golden-mean coding: 0 -> {0,1}, 1 -> {0}.
inline ldrt::MarkovMap golden() {
  ldrt::MarkovMapSpec s;
  s.branches = {{q("0"), q("3/5"), q("5/3"), ldrt::Interval<Rational>{q("0"), q("1")}},
                {q("3/5"), q("1"), q("3/2"), ldrt::Interval<Rational>{q("0"), q("3/5")}}};
  s.transitions = Eigen::MatrixXi{{1, 1}, {1, 0}};
  return ldrt::build_map(s);
}

inline ldrt::GibbsMeasure bernoulli(const ldrt::MarkovMap& map, std::vector<double> p) {
  return ldrt::gibbs_measure(map, ldrt::Potential::log_weights(p));
}

inline ldrt::GibbsMeasure i1() { return bernoulli(doubling(), {0.5, 0.5}); }
inline ldrt::GibbsMeasure i2() { return bernoulli(doubling(), {0.25, 0.75}); }
inline ldrt::GibbsMeasure i3() { return bernoulli(unequal(), {0.5, 0.5}); }
inline ldrt::GibbsMeasure parry() {
  return ldrt::gibbs_measure(golden(), ldrt::Potential{Eigen::VectorXd::Zero(2)});
}

}  // namespace fixtures
