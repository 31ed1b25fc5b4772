#include <doctest.h>

#include "ldrt/core.hpp"

using namespace ldrt;

TEST_CASE("parse_rational keeps decimals exact") {
  CHECK(parse_rational("0.3") == Rational(3, 10));
  CHECK(parse_rational("-1/4") == Rational(-1, 4));
  CHECK(parse_rational(" 10/7 ") == Rational(10, 7));
  CHECK(parse_rational("2") == 2);
  CHECK(parse_rational("0.5/3") == Rational(1, 6));
  CHECK(to_string(Rational(6, 4)) == "3/2");
  CHECK(to_string(Rational(4, 2)) == "2");
}

TEST_CASE("parse_rational rejects junk") {
  CHECK_THROWS_AS(parse_rational("abc"), Error);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational(""), Error);
  CHECK_THROWS_AS(parse_rational("1e-3"), Error);
}

TEST_CASE("streams depend only on (seed, tag, index)") {
  auto a = make_stream(42, 7, 3), b = make_stream(42, 7, 3), c = make_stream(42, 7, 4), d = make_stream(43, 7, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
  for (int i = 0; i < 1000; ++i) {
    const double u = uniform01(a);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}
