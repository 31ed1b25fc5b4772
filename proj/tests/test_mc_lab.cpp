#include <doctest.h>

#include <atomic>

#include "instances.hpp"
#include "ldrt/mc_lab.hpp"

using namespace ldrt;
using doctest::Approx;
using fixtures::q;

TEST_CASE("parallel_for visits every index once") {
  for (unsigned workers : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> seen(1001);
    parallel_for(seen.size(), workers, [&](std::size_t i) { seen[i]++; });
    for (const auto& s : seen) REQUIRE(s.load() == 1);
  }
}

TEST_CASE("return times of exact points") {
  const auto d = fixtures::doubling();
  CHECK(return_time(d, q("0"), q("1/1000"), 100).steps == 1);
  const auto third = return_time(d, q("1/3"), q("0.1"), 100);
  CHECK(third.steps == 2);
  CHECK_FALSE(third.censored);
  CHECK(return_time(d, q("0.3"), q("0.05"), 1000).censored);
}

TEST_CASE("hitting times") {
  const auto d = fixtures::doubling();
  OrbitItinerary x(d, q("1/3"));
  CHECK(hitting_time_set(d, x, Interval<Rational>{q("0.6"), q("0.7")}, 10).steps == 1);
  OrbitItinerary y(d, q("0.3"));  // 0.3 -> 0.6 -> 0.2 -> 0.4 -> 0.8 -> 0.6 ...
  CHECK(hitting_time_set(d, y, Interval<Rational>{q("0.4"), q("0.45")}, 10).steps == 3);
  CHECK(hitting_time_cylinder(y, Word{0}, 10).steps == 2);
}

TEST_CASE("return time is nonincreasing in r and bounded by hitting times of larger sets") {
  const auto g = fixtures::i2();
  const auto& map = g.map();
  Rng rng = make_stream(21, 0, 0);
  for (int i = 0; i < 1000; ++i) {
    const Rational x = sample_center(g, rng, 1e-12);
    const Rational r(1, 1L << (3 + rng() % 8));
    const auto big = return_time(map, x, r, 5000);
    const auto small = return_time(map, x, r / 2, 5000);
    REQUIRE(big.steps <= small.steps);
    OrbitItinerary it(map, x);
    const auto hit = hitting_time_set(map, it, Interval<Rational>{x - 2 * r, x + r}, 5000);
    REQUIRE(hit.steps <= big.steps);
  }
}

TEST_CASE("Kac") {
  const SeedPlan plan{7, 2};
  for (const auto& [g, w] : {std::pair{fixtures::i1(), Word{0}}, std::pair{fixtures::i2(), Word{0}},
                             std::pair{fixtures::i2(), Word{1, 1, 1}}, std::pair{fixtures::i3(), Word{0, 1}},
                             std::pair{fixtures::parry(), Word{1, 0}}}) {
    const auto k = kac_check(g, w, 100000, plan);
    CHECK(std::abs(k.mean_product - 1.0) <= 3 * k.stderr_product);
  }
  CHECK(kac_check(fixtures::i2(), Word{1, 1, 1}, 10, plan).mu_a == Approx(27.0 / 64).epsilon(1e-14));
  const auto k = kac_check(fixtures::i2(), Word{0, 0}, 20000, plan);
  CHECK(k.mean_product / k.mu_a == Approx(16.0).epsilon(3 * k.stderr_product));
  CHECK_THROWS_AS(kac_check(fixtures::parry(), Word{1, 1}, 10, plan), Error);
}

TEST_CASE("Wilson interval") {
  const double z = 1.959963984540054;
  const auto w0 = wilson_interval(0, 10);
  CHECK(w0.low == 0.0);
  CHECK(w0.high == Approx(z * z / (10 + z * z)).epsilon(1e-12));
  const auto w = wilson_interval(30, 100);
  const double p = 0.3, n = 100, c = (p + z * z / (2 * n)) / (1 + z * z / n);
  const double h = z / (1 + z * z / n) * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n));
  CHECK(w.low == Approx(c - h).epsilon(1e-12));
  CHECK(w.high == Approx(c + h).epsilon(1e-12));
}

TEST_CASE("fit_rate") {
  std::vector<TailEstimate> est;
  for (int k = 6; k <= 12; ++k) {
    TailEstimate e;
    e.r = std::ldexp(1.0, -k);
    e.n = 1000000;
    e.p_hat = std::pow(e.r, 0.4);
    e.hits = static_cast<std::size_t>(e.p_hat * e.n);
    const auto w = wilson_interval(e.hits, e.n);
    e.ci_low = w.low;
    e.ci_high = w.high;
    est.push_back(e);
  }
  const auto fit = fit_rate(est);
  CHECK_FALSE(fit.surrogate);
  CHECK(fit.slope == Approx(0.4).epsilon(1e-3));

  for (auto& e : est) {
    e.hits = 0;
    e.p_hat = 0;
  }
  est[3].hits = 40;
  est[3].p_hat = 4e-5;
  const auto sur = fit_rate(est);
  CHECK(sur.surrogate);
  CHECK(sur.slope >= 0);
}

TEST_CASE("tail estimates are identical for any worker count") {
  const auto g = fixtures::i2();
  const double d = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  TailConfig tc;
  tc.r_grid = {1.0 / 64, 1.0 / 128, 1.0 / 256};
  tc.n_per_r = 3000;
  for (auto event : {TailEvent::Slow, TailEvent::Fast}) {
    tc.event = event;
    const auto a = empirical_tail(g, d, tc, {42, 1});
    const auto b = empirical_tail(g, d, tc, {42, 5});
    REQUIRE(a.estimates.size() == b.estimates.size());
    for (std::size_t i = 0; i < a.estimates.size(); ++i) {
      CHECK(a.estimates[i].hits == b.estimates[i].hits);
      CHECK(a.estimates[i].censored == b.estimates[i].censored);
    }
    CHECK(a.fit.slope == b.fit.slope);
    CHECK(a.fit.slope >= 0);
  }
}

TEST_CASE("slow-return exponent on I1 is nonnegative") {
  TailConfig tc;
  tc.r_grid = {1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512};
  tc.n_per_r = 2000;
  tc.eps = 0.1;
  const auto t = empirical_tail(fixtures::i1(), 1.0, tc, {3, 1});
  CHECK(t.fit.slope >= 0);
}

TEST_CASE("survival curves") {
  const std::vector<double> t{0.1, 0.5, 1.0, 2.0};
  // The fixed point returns immediately: S collapses well below e^-t.
  const auto fixed = conditional_return_cdf(fixtures::i1(), q("0"), Rational(1, 1024), t, 4000, {5, 1});
  CHECK(fixed.survival[0] < std::exp(-0.1) - 0.2);

  const auto typical = conditional_return_cdf(fixtures::i2(), q("0.4"), Rational(1, 1024), t, 10000, {5, 1});
  CHECK(typical.survival[2] == Approx(std::exp(-1.0)).epsilon(0.05 / std::exp(-1.0)));
  for (std::size_t i = 0; i + 1 < t.size(); ++i) CHECK(typical.survival[i] >= typical.survival[i + 1]);

  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(exp_law_check(fixtures::i2(), Rational(1, 1024), 4, 10, zero, 0.3, 0.3, {1, 1}), Error);
}

TEST_CASE("exponential-law check counts the fixed-point neighbourhood as bad") {
  const std::vector<double> t{0.1, 0.5, 1.0};
  // At r = 1/8 many I1 balls sit near 0 or 1; the check must report a bad fraction, not hide it.
  const auto res = exp_law_check(fixtures::i1(), Rational(1, 8), 40, 500, t, 0.5, 0.5, {2, 1});
  CHECK(res.deviations.size() == 40);
  CHECK(res.worst_deviation > 0.1);
}

TEST_CASE("phi estimate runs and respects probability bounds") {
  PhiConfig pc;
  pc.a = {0.1};
  pc.eps = 0.3;
  pc.r_grid = {1.0 / 64, 1.0 / 128, 1.0 / 256};
  pc.n_centers = 40;
  pc.n_inner = 300;
  const double d = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
  const auto a = phi_rate_estimate(fixtures::i2(), d, pc, {8, 1});
  const auto b = phi_rate_estimate(fixtures::i2(), d, pc, {8, 4});
  REQUIRE(a.estimates.size() == 1);
  for (std::size_t k = 0; k < a.estimates[0].size(); ++k) {
    CHECK(a.estimates[0][k].hits == b.estimates[0][k].hits);
    CHECK(a.estimates[0][k].p_hat <= 1.0);
  }
  pc.a.clear();
  CHECK_THROWS_AS(phi_rate_estimate(fixtures::i2(), d, pc, {8, 1}), Error);
}
