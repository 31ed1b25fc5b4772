#include <doctest.h>

#include "instances.hpp"
#include "ldrt/measure.hpp"

using namespace ldrt;
using doctest::Approx;
using fixtures::q;

TEST_CASE("measure_interval") {
  const auto i1 = fixtures::i1(), i2 = fixtures::i2();
  CHECK(measure_interval(i1, {q("0.2"), q("0.5")}, 1e-12).value == Approx(0.3).epsilon(1e-11));
  const auto half = measure_interval(i2, {q("0"), q("1/2")}, 1e-3);
  CHECK(half.value == Approx(0.25).epsilon(1e-15));
  CHECK(half.error_bound == 0.0);
  const auto mid = measure_interval(i2, {q("1/4"), q("3/4")}, 1e-12);
  CHECK(std::abs(mid.value - 0.375) <= 1e-12 + mid.error_bound);
  CHECK(mid.error_bound <= 1e-12);
}

TEST_CASE("measure is additive and bounded by its error") {
  const auto g = fixtures::parry();
  Rng rng = make_stream(3, 0, 0);
  for (int i = 0; i < 300; ++i) {
    std::vector<Rational> cut;
    for (int k = 0; k < 3; ++k) cut.emplace_back(static_cast<long>(rng() % 100000), 100000L);
    std::sort(cut.begin(), cut.end());
    const auto ab = measure_interval(g, {cut[0], cut[1]}, 1e-12);
    const auto bc = measure_interval(g, {cut[1], cut[2]}, 1e-12);
    const auto ac = measure_interval(g, {cut[0], cut[2]}, 1e-12);
    CHECK(std::abs(ab.value + bc.value - ac.value) <= ab.error_bound + bc.error_bound + ac.error_bound + 1e-15);
  }
}

TEST_CASE("ball_measure") {
  CHECK(ball_measure(fixtures::i1(), q("1/2"), q("1/4"), 1e-12).value == Approx(0.5));
  const auto i2 = fixtures::i2();
  CHECK(ball_measure(i2, q("1/2"), q("1/4"), 1e-12).value == Approx(0.375).epsilon(1e-11));
  for (int k = 1; k <= 20; ++k) {
    const Rational r(1, 1L << k);
    const auto b = ball_measure_relative(i2, q("0"), r, 1e-9);
    CHECK(b.value == Approx(std::pow(0.25, k)).epsilon(1e-8));
  }
}

TEST_CASE("local dimension ratio") {
  const auto i1 = fixtures::i1(), i2 = fixtures::i2();
  const Rational r(1, 1 << 20);
  CHECK(local_dim_ratio(i1, q("1/3"), r) == Approx(std::log(2.0 * std::ldexp(1.0, -20)) / std::log(std::ldexp(1.0, -20))));
  CHECK(local_dim_ratio(i2, q("0"), Rational(1, 1024)) == Approx(2.0).epsilon(1e-9));
  const Rational x = 1 - Rational(1) / (mpz_class(1) << 40);
  CHECK(local_dim_ratio(i2, x, Rational(1, 1024)) == Approx(std::log2(4.0 / 3.0)).epsilon(1e-4));
}

TEST_CASE("classify_level_set") {
  const auto i1 = fixtures::i1(), i2 = fixtures::i2();
  CHECK(classify_level_set(i1, 1.0, q("1/3"), Rational(1, 1 << 12), LevelSet::Eps, 0.1) == Membership::In);
  const double d = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  const Rational r(1, 1 << 20);
  CHECK(classify_level_set(i2, d, q("0"), r, LevelSet::MinusXi, 0.5) == Membership::In);
  CHECK(classify_level_set(i2, d, q("0"), r, LevelSet::Eps, 0.1) == Membership::Out);
}

TEST_CASE("conditional sampling") {
  const auto i2 = fixtures::i2();
  Rng rng = make_stream(4, 0, 0);
  const int n = 100000;

  int tail_zeros = 0;
  for (int i = 0; i < 20000; ++i) {
    const auto p = conditional_sample(i2, {q("0"), q("1/2")}, rng, 6);
    REQUIRE(p.word[0] == 0);
    tail_zeros += p.word[3] == 0;
  }
  CHECK(std::abs(tail_zeros / 20000.0 - 0.25) <= 3 * std::sqrt(0.25 * 0.75 / 20000));

  int zeros = 0;
  const ConditionalSampler mid(i2, {q("1/4"), q("3/4")});
  CHECK(mid.mass() == Approx(0.375).epsilon(1e-10));
  for (int i = 0; i < n; ++i) zeros += mid.draw_prefix(rng)[0] == 0;
  CHECK(std::abs(zeros / double(n) - 0.5) <= 3 * std::sqrt(0.25 / n));

  // Lebesgue conditioned on [a, b]: uniform.
  const auto i1 = fixtures::i1();
  const Rational a = q("0.1"), b = q("0.7");
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = conditional_sample(i1, {a, b}, rng, 24);
    const auto cyl = cylinder(i1.map(), p.word);
    REQUIRE(cyl.hi >= a);
    REQUIRE(cyl.lo <= b);
    sum += to_double((cyl.lo + cyl.hi) / 2);
  }
  const double se = 0.6 / std::sqrt(12.0 * n);
  CHECK(std::abs(sum / n - 0.4) <= 3 * se);
}
