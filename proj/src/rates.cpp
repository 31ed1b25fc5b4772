#include "ldrt/rates.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ldrt {

namespace {

constexpr double kSpectrumTol = 1e-15;

// Bisection for the root of a function that changes sign on [lo, hi].
template <typename F>
double bisect(F&& f, double lo, double hi, double tol = 1e-14) {
  const bool rising = f(hi) > 0;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ((f(mid) > 0) == rising ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double RateProfile::T(double q) const { return spectrum_T(gibbs_, q, kSpectrumTol); }

double RateProfile::T_prime(double q) const {
  const double h = 1e-5 * std::max(1.0, std::abs(q));
  return (T(q + h) - T(q - h)) / (2.0 * h);
}

double RateProfile::lambda_star_at(double q) const { return (q - 1.0) * T_prime(q) - T(q); }

double RateProfile::q_of(double x) const {
  double lo = -1.0, hi = 3.0;
  while (T_prime(lo) > x) {
    if (lo < -4.0 * q_low_) return -kInf;
    lo *= 2.0;
  }
  while (T_prime(hi) < x) {
    if (hi > 4.0 * q_high_) return kInf;
    hi *= 2.0;
  }
  return bisect([&](double q) { return T_prime(q) - x; }, lo, hi, 1e-13);
}

RateProfile rate_profile(const GibbsMeasure& gibbs) {
  RateProfile p;
  p.gibbs_ = gibbs;
  p.d_mu_ = dimension(gibbs).value();
  p.maximal_ = is_maximal_dimension(gibbs);
  if (p.maximal_) {
    p.support_ = {-p.d_mu_, -p.d_mu_};
    p.edge_low_ = p.edge_high_ = 0.0;
    return p;
  }
  // T' approaches its limits geometrically; double |q| until the edge and the
  // limiting value of Lambda* settle.
  auto edge = [&](double sign, double& x, double& value, double& q_edge) {
    double q = 4.0;
    double px = p.T_prime(sign * q), pv = p.lambda_star_at(sign * q);
    for (;;) {
      q *= 2.0;
      x = p.T_prime(sign * q);
      value = p.lambda_star_at(sign * q);
      if ((std::abs(x - px) < 1e-11 && std::abs(value - pv) < 1e-9) || q >= 4096.0) break;
      px = x;
      pv = value;
    }
    q_edge = q;
  };
  edge(-1.0, p.support_.lo, p.edge_low_, p.q_low_);
  edge(+1.0, p.support_.hi, p.edge_high_, p.q_high_);
  return p;
}

double lambda_of(const RateProfile& profile, double lambda) { return profile.T(lambda + 1.0); }

double t_star(const RateProfile& profile, double x) {
  const double d = profile.d_mu();
  if (profile.maximal_dimension()) return std::abs(x + d) <= 1e-9 ? -d : kInf;
  const auto& s = profile.support();
  // The edges are limits found numerically to about 1e-11.
  constexpr double slack = 1e-9;
  if (x < s.lo - slack || x > s.hi + slack) return kInf;
  if (x <= s.lo) return x + profile.edge_value_low();
  if (x >= s.hi) return x + profile.edge_value_high();
  const double q = profile.q_of(x);
  if (q == -kInf) return x + profile.edge_value_low();
  if (q == kInf) return x + profile.edge_value_high();
  return q * x - profile.T(q);
}

double lambda_star(const RateProfile& profile, double x) {
  const double t = t_star(profile, x);
  return t == kInf ? kInf : t - x;
}

double psi_rate(const RateProfile& profile, double signed_eps) {
  if (signed_eps == 0.0) return 0.0;
  if (profile.maximal_dimension()) return kInf;
  return lambda_star(profile, -profile.d_mu() - signed_eps);
}

double g1(const RateProfile& profile, double eps) {
  if (!(eps > 0)) return 0.0;
  if (profile.maximal_dimension()) return eps;
  const double d = profile.d_mu();
  // Along q < 1 the point x = T'(q) = -d - gamma eps moves left as q decreases,
  // so (1 - gamma) eps falls while Lambda*(x) rises: one sign change.
  auto gamma = [&](double q) { return (-d - profile.T_prime(q)) / eps; };
  auto gap = [&](double q) { return (1.0 - gamma(q)) * eps - profile.lambda_star_at(q); };
  double lo = -1.0;
  while (gap(lo) > 0) {
    if (profile.T_prime(lo) <= profile.support().lo + 1e-11 || lo < -1e5) {
      // Lambda* stays below (1 - gamma) eps up to the support edge; past the
      // edge Lambda* is infinite, so the supremum is the first term there.
      const double gamma_edge = (-d - profile.support().lo) / eps;
      return gamma_edge < 1.0 ? (1.0 - gamma_edge) * eps : profile.edge_value_low();
    }
    lo *= 2.0;
  }
  const double q = bisect(gap, lo, 1.0);
  const double g = gamma(q);
  return std::min((1.0 - g) * eps, profile.lambda_star_at(q));
}

double g2_objective(const RateProfile& profile, double eps, double a0, double d2, double gamma, double eps1,
                    double eps2) {
  const double first = -gamma * eps - eps2 + std::min(d2, eps - eps1);
  return std::min({first, psi_rate(profile, gamma * eps), std::min(a0, psi_rate(profile, -eps1)),
                   psi_rate(profile, -eps2)});
}

namespace {

std::vector<double> geometric(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  const double ratio = std::log(hi / lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo * std::exp(ratio * static_cast<double>(i));
  out.back() = hi;
  return out;
}

// Smallest gamma in (0,1) with Lambda*(-d - gamma eps) >= v, as gamma = (-d - x)/eps.
// Returns the support edge when Lambda* stays below v inside the support.
double left_inverse(const RateProfile& profile, double v) {
  const double d = profile.d_mu();
  if (v <= 0) return 0.0;
  if (profile.edge_value_low() <= v) return -d - profile.support().lo;
  double lo = 0.0;
  while (profile.lambda_star_at(lo) < v) lo = lo == 0.0 ? -1.0 : 2.0 * lo;
  const double q = bisect([&](double q) { return profile.lambda_star_at(q) - v; }, lo, 1.0, 1e-13);
  return -d - profile.T_prime(q);
}

// Smallest e > 0 with Lambda*(-d + e) >= v.
double right_inverse(const RateProfile& profile, double v) {
  const double d = profile.d_mu();
  if (v <= 0) return 0.0;
  if (profile.edge_value_high() <= v) return profile.support().hi + d;
  double hi = 2.0;
  while (profile.lambda_star_at(hi) < v) hi *= 2.0;
  const double q = bisect([&](double q) { return profile.lambda_star_at(q) - v; }, 1.0, hi, 1e-13);
  return profile.T_prime(q) + d;
}

}  // namespace

G2Result g2(const RateProfile& profile, double eps, double a0, double d2) {
  G2Result best;
  best.value = -kInf;
  if (!(eps > 0)) {
    best.value = 0.0;
    best.non_positive = true;
    return best;
  }
  if (profile.maximal_dimension()) {
    // Every Lambda* term is infinite off -d; the supremum sits at gamma, eps', eps'' -> 0.
    best.value = std::min({d2, eps, a0});
    best.non_positive = best.value <= 0;
    return best;
  }

  constexpr std::size_t kPoints = 32;
  Interval<double> range_gamma{1e-6, 1.0 - 1e-6}, range_e1{1e-6 * eps, eps * (1.0 - 1e-6)}, range_e2 = range_e1;
  for (int pass = 0; pass < 3; ++pass) {
    const auto gs = geometric(range_gamma.lo, range_gamma.hi, kPoints);
    const auto e1 = geometric(range_e1.lo, range_e1.hi, kPoints);
    const auto e2 = geometric(range_e2.lo, range_e2.hi, kPoints);
    std::vector<double> b(kPoints), c(kPoints), dd(kPoints);
    for (std::size_t i = 0; i < kPoints; ++i) {
      b[i] = psi_rate(profile, gs[i] * eps);
      c[i] = std::min(a0, psi_rate(profile, -e1[i]));
      dd[i] = psi_rate(profile, -e2[i]);
    }
    std::size_t bi = 0, bj = 0, bk = 0;
    double incumbent = -kInf;
    for (std::size_t i = 0; i < kPoints; ++i)
      for (std::size_t j = 0; j < kPoints; ++j)
        for (std::size_t k = 0; k < kPoints; ++k) {
          const double first = -gs[i] * eps - e2[k] + std::min(d2, eps - e1[j]);
          const double value = std::min({first, b[i], c[j], dd[k]});
          if (value > incumbent) {
            incumbent = value;
            bi = i, bj = j, bk = k;
          }
        }
    if (incumbent > best.value) best = {incumbent, gs[bi], e1[bj], e2[bk], false};
    auto around = [](const std::vector<double>& axis, std::size_t i) {
      return Interval<double>{axis[i == 0 ? 0 : i - 1], axis[std::min(i + 1, axis.size() - 1)]};
    };
    range_gamma = around(gs, bi);
    range_e1 = around(e1, bj);
    range_e2 = around(e2, bk);
  }

  // Polish. For a level v the cheapest feasible triple takes gamma, eps', eps''
  // as small as the Lambda* terms allow, because the first term decreases in
  // all three; feasibility is therefore monotone in v.
  auto triple = [&](double v) {
    const double gamma = left_inverse(profile, v) / eps;
    const double e = right_inverse(profile, v);
    return std::array<double, 2>{gamma, e};
  };
  auto feasible = [&](double v) {
    if (v > a0) return false;
    const auto [gamma, e] = triple(v);
    if (!(gamma < 1.0) || !(e < eps)) return false;
    return -gamma * eps - e + std::min(d2, eps - e) >= v;
  };
  double lo = std::max(0.0, best.value), hi = std::min({a0, d2, eps});
  if (feasible(lo)) {
    if (feasible(hi)) lo = hi;
    for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
      const double mid = 0.5 * (lo + hi);
      (feasible(mid) ? lo : hi) = mid;
    }
    auto [gamma, e] = triple(lo);
    // Inverses that sit on a support edge are infima; step just past the edge.
    const double nudge = 2e-9;
    if (profile.edge_value_low() <= lo) gamma += nudge / eps;
    if (profile.edge_value_high() <= lo) e += nudge;
    const double value = g2_objective(profile, eps, a0, d2, gamma, e, e);
    if (value > best.value) best = {value, gamma, e, e, false};
  }
  best.non_positive = best.value <= 0;
  return best;
}

Theorem25Grids default_theorem25_grids(double eps, std::size_t points) {
  const std::size_t quarter = std::max<std::size_t>(points / 4, 2);
  Theorem25Grids g;
  const auto left = geometric(1e-12, 0.01, quarter);
  g.gamma = left;
  for (std::size_t i = 1; i < points; ++i) g.gamma.push_back(0.01 + 0.98 * static_cast<double>(i) / points);
  for (auto it = left.rbegin(); it != left.rend(); ++it) g.gamma.push_back(1.0 - *it);
  for (double x : g.gamma) g.eps2.push_back(x * eps);
  return g;
}

std::pair<double, double> theorem25_lower_bounds(const std::function<double(double)>& psi,
                                                 std::span<const PhiEntry> phi, double eps,
                                                 const Theorem25Grids& grids) {
  std::vector<double> slow(grids.gamma.size()), fast(grids.eps2.size());
  for (std::size_t i = 0; i < grids.gamma.size(); ++i) slow[i] = psi(grids.gamma[i] * eps);
  for (std::size_t k = 0; k < grids.eps2.size(); ++k) fast[k] = psi(-grids.eps2[k]);

  double first = eps > 0 ? -kInf : 0.0;
  std::size_t at = 0;
  if (eps > 0)
    for (std::size_t i = 0; i < grids.gamma.size(); ++i) {
      const double v = std::min((1.0 - grids.gamma[i]) * eps, slow[i]);
      if (v > first) {
        first = v;
        at = i;
      }
    }
  // psi(gamma eps) is nondecreasing in gamma, so the maximum sits at the crossing
  // with (1 - gamma) eps; bisect it between the neighbours of the grid maximum.
  if (eps > 0 && !grids.gamma.empty() && std::isfinite(first)) {
    double lo = at > 0 ? grids.gamma[at - 1] : grids.gamma[at];
    double hi = at + 1 < grids.gamma.size() ? grids.gamma[at + 1] : grids.gamma[at];
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double lin = (1.0 - mid) * eps, dim = psi(mid * eps);
      first = std::max(first, std::min(lin, dim));
      (dim < lin ? lo : hi) = mid;
    }
  }

  double second = -kInf;
  for (const auto& entry : phi)
    for (std::size_t i = 0; i < grids.gamma.size(); ++i) {
      const double cap = std::min(slow[i], entry.value);
      if (cap <= second) continue;
      for (std::size_t k = 0; k < grids.eps2.size(); ++k) {
        const double value =
            std::min({-grids.gamma[i] * eps - grids.eps2[k] + entry.a, cap, fast[k]});
        second = std::max(second, value);
      }
    }
  return {first, second};
}

std::pair<double, double> quadratic_floor(double c, double eps, double kappa) {
  if (!(kappa > 0 && kappa < 1)) throw Error(Errc::BadInput, "kappa must lie in (0,1)");
  if (eps == 0) return {0.0, 0.0};
  if (c == kInf) return {kInf, kInf};
  return {kappa * c * eps * eps, kappa * c * (eps / 3.0) * (eps / 3.0)};
}

double combine_min_rate(std::span<const double> rates) {
  if (rates.empty()) throw Error(Errc::BadInput, "no rates to combine");
  double out = kInf;
  for (double r : rates) {
    if (!(r > 0)) throw Error(Errc::NonPositiveRate, "rate " + std::to_string(r) + " is not positive");
    out = std::min(out, r);
  }
  return out;
}

}  // namespace ldrt
