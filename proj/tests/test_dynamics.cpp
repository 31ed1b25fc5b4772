#include <doctest.h>

#include "instances.hpp"
#include "ldrt/itinerary.hpp"

using namespace ldrt;
using fixtures::q;

namespace {

Errc build_error(MarkovMapSpec s) {
  try {
    build_map(std::move(s));
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Config;  // no error
}

}  // namespace

TEST_CASE("build_map validates") {
  const auto d = fixtures::doubling();
  CHECK(d.size() == 2);
  CHECK(d.beta() == 2);
  CHECK(d.degree() == 2);
  CHECK(fixtures::unequal().beta() == q("10/7"));

  CHECK(build_error({{{q("0"), q("1/2"), q("0.8"), {}}, {q("1/2"), q("1"), q("2"), {}}}, {}}) ==
        Errc::NotExpanding);
  CHECK(build_error({{{q("0"), q("1/3"), q("2"), {}}, {q("1/2"), q("1"), q("2"), {}}}, {}}) == Errc::BadPartition);
  // Image ends inside a branch.
  CHECK(build_error({{{q("0"), q("1/2"), q("3/2"), Interval<Rational>{q("0"), q("3/4")}},
                      {q("1/2"), q("1"), q("2"), {}}},
                     {}}) == Errc::NotMarkov);
  // Slope times width disagrees with the declared image.
  CHECK(build_error({{{q("0"), q("1/2"), q("2"), Interval<Rational>{q("0"), q("1/2")}},
                      {q("1/2"), q("1"), q("2"), {}}},
                     {}}) == Errc::NotMarkov);
  MarkovMapSpec cyc;
  cyc.branches = {{q("0"), q("1/2"), q("2"), Interval<Rational>{q("0"), q("1")}},
                  {q("1/2"), q("3/4"), q("2"), Interval<Rational>{q("1/2"), q("1")}},
                  {q("3/4"), q("1"), q("2"), Interval<Rational>{q("1/2"), q("1")}}};
  CHECK(build_error(cyc) == Errc::NotPrimitive);
}

TEST_CASE("encode") {
  const auto d = fixtures::doubling();
  CHECK(encode(d, q("0.3"), 3).word == Word{0, 1, 0});
  CHECK(encode(d, q("0"), 4).word == Word{0, 0, 0, 0});
  CHECK(encode(fixtures::unequal(), q("0.9"), 2).word == Word{1, 1});
}

TEST_CASE("cylinder") {
  const auto d = fixtures::doubling();
  const auto a = cylinder(d, Word{0, 1});
  CHECK(a.lo == q("1/4"));
  CHECK(a.hi == q("1/2"));
  const auto b = cylinder(d, Word{1, 0, 1});
  CHECK(b.lo == q("5/8"));
  CHECK(b.hi == q("3/4"));
  CHECK(cylinder(fixtures::unequal(), Word{0}).hi == q("3/10"));
  CHECK_THROWS_AS(cylinder(fixtures::golden(), Word{1, 1}), Error);
}

TEST_CASE("orbit_distance encloses d(g^k x, x)") {
  const auto d = fixtures::doubling();
  const auto third = encode(d, q("1/3"), 20);
  const auto e = orbit_distance(d, third, 2, 1e-3);
  CHECK(e.lo == 0);
  CHECK(to_double(e.hi) <= 2 * std::ldexp(1.0, -18));
  const auto zero = encode(d, q("0"), 12);
  const auto z = orbit_distance(d, zero, 1, 1.0);
  CHECK(z.lo == 0);
  CHECK(z.hi == Rational(1, 1 << 11));
  const auto p = encode(d, q("0.3"), 30);
  const auto w = orbit_distance(d, p, 1, 1e-6);
  CHECK(w.lo <= q("0.3"));
  CHECK(w.hi >= q("0.3"));
  CHECK_THROWS_AS(orbit_distance(d, p, 1, 1e-12), Error);
}

TEST_CASE("coding conjugacy, shift property and widths on random words") {
  for (const auto& map : {fixtures::doubling(), fixtures::unequal(), fixtures::golden()}) {
    const auto gibbs = gibbs_measure(map, Potential{Eigen::VectorXd::Zero(map.size())});
    Rng rng = make_stream(1, 0, 0);
    for (int trial = 0; trial < 200; ++trial) {
      const auto w = sample_point(gibbs, rng, 12).word;
      const auto cyl = cylinder(map, w);
      const Rational mid = (cyl.lo + cyl.hi) / 2;
      CHECK(encode(map, mid, 11).word == Word(w.begin(), w.begin() + 11));
      const auto shifted = cylinder(map, std::span<const Symbol>(w).subspan(1));
      const Rational glo = map.apply_branch(w[0], cyl.lo), ghi = map.apply_branch(w[0], cyl.hi);
      CHECK(glo == shifted.lo);
      CHECK(ghi == shifted.hi);
      CHECK(to_double(cyl.width()) <= std::pow(to_double(map.beta()), -12.0) + 1e-300);
    }
  }
}

TEST_CASE("orbit enclosures shrink with depth") {
  const auto d = fixtures::doubling();
  Rng rng = make_stream(2, 0, 0);
  const auto gibbs = fixtures::i2();
  for (int trial = 0; trial < 50; ++trial) {
    const auto deep = sample_point(gibbs, rng, 40);
    Interval<Rational> prev{Rational(-1), Rational(2)};
    for (std::size_t depth = 10; depth <= 40; depth += 10) {
      SymbolicPoint p{Word(deep.word.begin(), deep.word.begin() + depth)};
      const auto e = orbit_distance(d, p, 3, 1.0);
      CHECK(e.lo >= prev.lo);
      CHECK(e.hi <= prev.hi);
      prev = e;
    }
  }
}

TEST_CASE("sample_point") {
  const auto i1 = fixtures::i1();
  Rng a = make_stream(5, 1, 0), b = make_stream(5, 1, 0);
  CHECK(sample_point(i1, a, 10).word == sample_point(i1, b, 10).word);

  const auto i2 = fixtures::i2();
  Rng rng = make_stream(6, 1, 0);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += sample_point(i2, rng, 1).word[0] == 0;
  const double se = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::abs(zeros / double(n) - 0.25) <= 3 * se);

  const auto parry = fixtures::parry();
  for (int i = 0; i < 2000; ++i) {
    const auto w = sample_point(parry, rng, 30).word;
    for (std::size_t k = 0; k + 1 < w.size(); ++k) REQUIRE_FALSE((w[k] == 1 && w[k + 1] == 1));
  }
}
