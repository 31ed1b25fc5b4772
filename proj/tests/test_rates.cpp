#include <doctest.h>

#include "instances.hpp"
#include "ldrt/rates.hpp"

using namespace ldrt;
using doctest::Approx;

namespace {

// I2 oracle: at scale 2^-n, Z is the mean of iid Y in {2, log2(4/3)} with weights 1/4, 3/4,
// so Lambda*(x) is the relative entropy of the tilted law with mean -x, in bits.
double i2_rate(double x) {
  const double y0 = 2.0, y1 = std::log2(4.0 / 3.0);
  const double m = -x;
  if (m < y1 - 1e-15 || m > y0 + 1e-15) return kInf;
  const double q0 = std::clamp((m - y1) / (y0 - y1), 0.0, 1.0), q1 = 1 - q0;
  double kl = 0;
  if (q0 > 0) kl += q0 * std::log(q0 / 0.25);
  if (q1 > 0) kl += q1 * std::log(q1 / 0.75);
  return kl / std::log(2.0);
}

double i2_d() { return -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75)); }

const RateProfile& i2_profile() {
  static const RateProfile p = rate_profile(fixtures::i2());
  return p;
}

}  // namespace

TEST_CASE("Lambda(lambda) = T(lambda + 1)") {
  const auto& p = i2_profile();
  CHECK(std::abs(lambda_of(p, 0.0)) <= 1e-10);
  CHECK(lambda_of(p, -1.0) == Approx(1.0).epsilon(1e-8));
  CHECK(lambda_of(p, 1.0) == Approx(-0.6780719051126377).epsilon(1e-10));
}

TEST_CASE("support and T*") {
  const auto& p = i2_profile();
  CHECK(p.d_mu() == Approx(i2_d()).epsilon(1e-10));
  CHECK(p.support().lo == Approx(-2.0).epsilon(1e-8));
  CHECK(p.support().hi == Approx(-std::log2(4.0 / 3.0)).epsilon(1e-8));
  CHECK(t_star(p, -p.d_mu()) == Approx(-p.d_mu()).epsilon(1e-9));
  CHECK(t_star(p, 0.0) == kInf);

  const auto i1 = rate_profile(fixtures::i1());
  CHECK(i1.maximal_dimension());
  CHECK(t_star(i1, -1.0) == Approx(-1.0));
  CHECK(t_star(i1, -1.2) == kInf);
  CHECK(lambda_star(i1, -1.0) == Approx(0.0).epsilon(1e-12));
  CHECK(lambda_star(i1, -1.2) == kInf);
}

TEST_CASE("Lambda* matches the relative-entropy oracle on I2") {
  const auto& p = i2_profile();
  CHECK(std::abs(lambda_star(p, -p.d_mu())) <= 1e-12);
  for (int i = 1; i < 100; ++i) {
    const double x = -2.0 + (2.0 - std::log2(4.0 / 3.0)) * i / 100.0;
    CHECK(lambda_star(p, x) == Approx(i2_rate(x)).epsilon(1e-6));
  }
  CHECK(lambda_star(p, -2.0) == Approx(2.0).epsilon(1e-6));
  CHECK(lambda_star(p, -2.1) == kInf);
  CHECK(lambda_star(p, -0.3) == kInf);
}

TEST_CASE("Lambda* by dense supremum over q") {
  // sup_q {q x - T(q)} - x on a fine q grid, against the first-order-condition route.
  const auto& p = i2_profile();
  const double x = -p.d_mu() - 0.3;
  double best = -kInf;
  for (int i = 0; i <= 20000; ++i) {
    const double q = -10.0 + i * 1e-3;
    best = std::max(best, q * x - p.T(q));
  }
  CHECK(best - x == Approx(lambda_star(p, x)).epsilon(1e-6));
}

TEST_CASE("rate profile invariants") {
  for (const auto& g : {fixtures::i2(), fixtures::i3(), fixtures::parry()}) {
    const auto p = rate_profile(g);
    const auto s = p.support();
    const double h = s.width() / 400;
    for (int i = 1; i < 400; ++i) {
      const double x = s.lo + i * h;
      REQUIRE(lambda_star(p, x) >= -1e-9);
      if (i > 1 && i < 399)
        CHECK(lambda_star(p, x + h) - 2 * lambda_star(p, x) + lambda_star(p, x - h) >= -1e-8);
    }
    double prev_plus = 0, prev_minus = 0;
    for (double e = 0.01; e <= 0.3; e += 0.01) {
      const double plus = psi_rate(p, e), minus = psi_rate(p, -e);
      CHECK(plus > 0);
      CHECK(minus > 0);
      CHECK(plus >= prev_plus);
      CHECK(minus >= prev_minus);
      prev_plus = plus;
      prev_minus = minus;
    }
  }
}

TEST_CASE("psi") {
  const auto& p = i2_profile();
  CHECK(psi_rate(p, 0.0) == 0.0);
  CHECK(psi_rate(p, 0.3) == Approx(i2_rate(-i2_d() - 0.3)).epsilon(1e-6));
  const auto i1 = rate_profile(fixtures::i1());
  CHECK(psi_rate(i1, 0.1) == kInf);
  CHECK(psi_rate(i1, -0.1) == kInf);
}

TEST_CASE("g1") {
  const auto& p = i2_profile();
  CHECK(g1(p, 0.0) == 0.0);
  CHECK(g1(rate_profile(fixtures::i1()), 0.2) == 0.2);
  for (double eps : {0.02, 0.05, 0.1, 0.3}) {
    double grid = 0;
    for (int i = 1; i < 10000; ++i) {
      const double gamma = i * 1e-4;
      grid = std::max(grid, std::min((1 - gamma) * eps, i2_rate(-i2_d() - gamma * eps)));
    }
    CHECK(g1(p, eps) == Approx(grid).epsilon(1e-4));
  }
  // Frozen from the oracle above.
  CHECK(g1(p, 0.3) == Approx(0.0720234478).epsilon(1e-8));
}

TEST_CASE("g2") {
  const auto& p = i2_profile();
  CHECK(g2(rate_profile(fixtures::i1()), 0.3, 0.05, 0.5).value == Approx(0.05).epsilon(1e-9));
  const auto zero = g2(p, 0.0, 0.05, 0.5);
  CHECK((zero.value == 0.0 || zero.non_positive));

  const auto best = g2(p, 0.3, 0.05, 0.5);
  CHECK(best.value > 0);
  CHECK(best.value <= g1(p, 0.3) + 0.3);
  CHECK(g2_objective(p, 0.3, 0.05, 0.5, best.gamma, best.eps1, best.eps2) == Approx(best.value).epsilon(1e-12));
  CHECK(best.value == Approx(0.0142102089945).epsilon(1e-8));

  // No random triple beats the reported maximum.
  Rng rng = make_stream(11, 0, 0);
  for (int i = 0; i < 3000; ++i) {
    const double gamma = uniform01(rng), e1 = 0.3 * uniform01(rng), e2 = 0.3 * uniform01(rng);
    REQUIRE(g2_objective(p, 0.3, 0.05, 0.5, gamma, e1, e2) <= best.value + 1e-12);
  }
}

TEST_CASE("theorem25_lower_bounds") {
  const auto grids = default_theorem25_grids(0.2);
  const std::vector<PhiEntry> none;
  const auto infinite = [](double) { return kInf; };
  CHECK(theorem25_lower_bounds(infinite, none, 0.2, grids).first == Approx(0.2).epsilon(1e-9));
  const auto flat = [](double) { return 0.0; };
  CHECK(theorem25_lower_bounds(flat, none, 0.2, grids).first == 0.0);

  const auto& p = i2_profile();
  const auto psi = [&](double e) { return psi_rate(p, e); };
  CHECK(theorem25_lower_bounds(psi, none, 0.3, default_theorem25_grids(0.3)).first ==
        Approx(g1(p, 0.3)).epsilon(1e-6));
}

TEST_CASE("quadratic floor and rate combination") {
  const auto [f1, f2] = quadratic_floor(1.532, 0.05, 0.9);
  CHECK(f1 == Approx(0.003447).epsilon(1e-3));
  CHECK(f2 == Approx(0.000383).epsilon(1e-3));
  CHECK(quadratic_floor(3.0, 0.0, 0.9) == std::pair{0.0, 0.0});
  CHECK(quadratic_floor(kInf, 0.1, 0.9).first == kInf);
  CHECK_THROWS_AS(quadratic_floor(1.0, 0.1, 1.5), Error);

  CHECK(combine_min_rate(std::vector{0.5, 0.2}) == 0.2);
  CHECK(combine_min_rate(std::vector{kInf, 0.7}) == 0.7);
  CHECK_THROWS_AS(combine_min_rate(std::vector{0.5, 0.0}), Error);
  // phi(a, eps) >= min{psi(a - eps), b}.
  const auto& p = i2_profile();
  CHECK(combine_min_rate(std::vector{psi_rate(p, 0.1 - 0.3), 0.05}) == 0.05);
}
