#include "ldrt/mc_lab.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>

namespace ldrt {

namespace {

// Stream tags: operation in the high bits, radius index and center below.
enum : std::uint64_t {
  kTagTail = 1,
  kTagKac = 2,
  kTagSurvival = 3,
  kTagPhiCenter = 4,
  kTagPhiInner = 5,
  kTagExpCenter = 6,
  kTagLevelSet = 7,
};

std::uint64_t tag_of(std::uint64_t op, std::uint64_t a = 0, std::uint64_t b = 0) {
  return (op << 56) | ((a & 0xffu) << 48) | (b & 0xffffffffffffu);
}

// Margin of the first depth: cylinders narrower than r / 2^24 leave an undecided
// strip of relative width 2^-23 around the ball boundary.
constexpr double kDepthMargin = 0x1.0p-24;
constexpr std::size_t kDeepenStep = 32;
constexpr int kMaxDeepen = 16;

template <typename It>
Word leading(It& x, std::size_t depth) {
  Word w(depth);
  for (std::size_t k = 0; k < depth; ++k) w[k] = x.at(k);
  return w;
}

// tau_r for a point known through its itinerary. With cylinder [lo, hi) of
// the first `depth` symbols, g^n x lies in the ball for sure when
// hi - r <= g^n x < lo + r and outside for sure when g^n x <= lo - r or
// g^n x >= hi + r; anything else deepens the word.
template <typename It>
ReturnTime ball_return(const MarkovMap& map, It& x, const Rational& r, std::size_t cap, std::size_t depth,
                       bool can_deepen) {
  struct Cuts {
    Cut in_lo, in_hi, out_lo, out_hi;
  };
  auto make = [&](std::size_t d) {
    const Word w = leading(x, d);
    const auto c = cylinder(map, w);
    return Cuts{Cut(map, c.hi - r), Cut(map, c.lo + r), Cut(map, c.lo - r), Cut(map, c.hi + r)};
  };
  std::optional<Cuts> cuts(make(depth));
  for (std::size_t n = 1; n <= cap; ++n) {
    for (int attempt = 0;; ++attempt) {
      if (cuts->out_lo.compare(x, n) <= 0 || cuts->out_hi.compare(x, n) >= 0) break;
      if (cuts->in_lo.compare(x, n) >= 0 && cuts->in_hi.compare(x, n) < 0) return {n, false};
      if (!can_deepen || attempt >= kMaxDeepen)
        throw Error(Errc::InsufficientDepth, "return at step " + std::to_string(n) + " undecided at depth " +
                                                 std::to_string(depth));
      depth += kDeepenStep;
      cuts.emplace(make(depth));
    }
  }
  return {cap, true};
}

double log_of(const Rational& r) { return std::log(to_double(r)); }

}  // namespace

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& body) {
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(workers, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) body(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ReturnTime return_time(const MarkovMap& map, const Rational& x, const Rational& r, std::size_t cap) {
  if (!(r > 0)) throw Error(Errc::BadInput, "radius must be positive");
  OrbitItinerary it(map, x);
  Cut lo(map, x - r), hi(map, x + r);
  for (std::size_t n = 1; n <= cap; ++n)
    if (lo.compare(it, n) > 0 && hi.compare(it, n) < 0) return {n, false};
  return {cap, true};
}

ReturnTime return_time(const MarkovMap& map, ChainItinerary& x, const Rational& r, std::size_t cap) {
  if (!(r > 0)) throw Error(Errc::BadInput, "radius must be positive");
  const std::size_t depth = depth_for_width(map, to_double(r) * kDepthMargin);
  return ball_return(map, x, r, cap, depth, true);
}

ReturnTime return_time(const MarkovMap& map, const SymbolicPoint& p, const Rational& r, std::size_t cap) {
  if (!(r > 0)) throw Error(Errc::BadInput, "radius must be positive");
  if (p.depth() == 0) throw Error(Errc::InsufficientDepth, "empty word");
  FixedItinerary x(p);
  const std::size_t depth = std::min(p.depth(), depth_for_width(map, to_double(r) * kDepthMargin));
  return ball_return(map, x, r, cap, depth, false);
}

Wilson wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

RateFit fit_rate(std::span<const TailEstimate> estimates) {
  RateFit fit;
  std::vector<double> w;
  for (const auto& e : estimates) {
    fit.r_grid.push_back(e.r);
    if (e.invalid || e.hits < 10) continue;
    const double nn = static_cast<double>(e.n);
    fit.points.emplace_back(std::log(e.r), std::log(e.p_hat));
    w.push_back(nn * e.p_hat / std::max(1.0 - e.p_hat, 1.0 / nn));
  }
  if (fit.points.size() < 2) {
    // One-sided surrogate from the deepest valid radius.
    fit.surrogate = true;
    const TailEstimate* deepest = nullptr;
    for (const auto& e : estimates)
      if (!e.invalid && (!deepest || e.r < deepest->r)) deepest = &e;
    if (deepest) fit.slope = std::log(std::max(deepest->ci_high, 1e-300)) / std::log(deepest->r);
    return fit;
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    sx += w[i] * fit.points[i].first;
    sy += w[i] * fit.points[i].second;
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double dx = fit.points[i].first - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (fit.points[i].second - my);
  }
  fit.slope = sxy / sxx;
  double chi2 = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double res = fit.points[i].second - my - fit.slope * (fit.points[i].first - mx);
    chi2 += w[i] * res * res;
  }
  const double dof = static_cast<double>(w.size()) - 2.0;
  const double inflation = dof > 0 ? std::max(1.0, chi2 / dof) : 1.0;
  fit.stderr_slope = std::sqrt(inflation / sxx);
  return fit;
}

TailResult empirical_tail(const GibbsMeasure& gibbs, double d_mu, const TailConfig& config, const SeedPlan& plan) {
  if (!(config.eps > 0)) throw Error(Errc::BadInput, "eps must be positive");
  TailResult out;
  const MarkovMap& map = gibbs.map();
  const bool slow = config.event == TailEvent::Slow;
  for (std::size_t ri = 0; ri < config.r_grid.size(); ++ri) {
    const double rd = config.r_grid[ri];
    const Rational r(rd);
    TailEstimate est;
    est.r = rd;
    est.threshold_exponent = slow ? d_mu + config.eps : d_mu - config.eps;
    const double threshold = std::exp(-est.threshold_exponent * std::log(rd));
    // tau >= T  <=>  no return in the first ceil(T) - 1 steps;  tau <= T  <=>  a return by floor(T).
    const double needed = slow ? std::ceil(threshold) - 1.0 : std::floor(threshold);
    const double configured = std::floor(config.cap_factor * threshold);
    est.cap = static_cast<std::size_t>(std::max(0.0, std::min(needed, configured)));
    est.invalid = configured < needed;
    est.n = config.n_per_r;

    std::vector<ReturnTime> times(config.n_per_r);
    parallel_for(config.n_per_r, plan.workers, [&](std::size_t i) {
      ChainItinerary x(gibbs, make_stream(plan.seed, tag_of(kTagTail, ri, slow ? 0 : 1), i));
      times[i] = return_time(map, x, r, est.cap);
    });
    for (const auto& t : times) {
      est.censored += t.censored;
      est.hits += slow ? t.censored : !t.censored;
    }
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.n);
    const auto ci = wilson_interval(est.hits, est.n);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    out.estimates.push_back(est);
  }
  out.fit = fit_rate(out.estimates);
  return out;
}

KacResult kac_check(const GibbsMeasure& gibbs, std::span<const Symbol> word, std::size_t n_samples,
                    const SeedPlan& plan) {
  if (word.empty() || !is_admissible(gibbs.map(), word)) throw Error(Errc::Inadmissible, "Kac set must be an admissible cylinder");
  if (n_samples < 2) throw Error(Errc::BadInput, "need at least two samples");
  KacResult out;
  out.mu_a = gibbs.cylinder_mass(word);
  if (!(out.mu_a > 0)) throw Error(Errc::ZeroMass, "cylinder has zero mass");
  const auto cap = static_cast<std::size_t>(std::ceil(1e4 / out.mu_a));
  std::vector<ReturnTime> times(n_samples);
  parallel_for(n_samples, plan.workers, [&](std::size_t i) {
    ChainItinerary x(gibbs, make_stream(plan.seed, tag_of(kTagKac), i), Word(word.begin(), word.end()));
    times[i] = hitting_time_cylinder(x, word, cap);
  });
  double sum = 0, sum2 = 0;
  for (const auto& t : times) {
    const auto v = static_cast<double>(t.steps);
    sum += v;
    sum2 += v * v;
    out.censored += t.censored;
  }
  const double nn = static_cast<double>(n_samples);
  const double mean = sum / nn;
  const double var = (sum2 - nn * mean * mean) / (nn - 1.0);
  out.mean_product = mean * out.mu_a;
  out.stderr_product = std::sqrt(var / nn) * out.mu_a;
  return out;
}

SurvivalCurve conditional_return_cdf(const GibbsMeasure& gibbs, const Rational& x0, const Rational& r,
                                     std::span<const double> t_grid, std::size_t n, const SeedPlan& plan,
                                     std::uint64_t tag) {
  if (t_grid.empty()) throw Error(Errc::BadInput, "empty t grid");
  for (double t : t_grid)
    if (!(t > 0)) throw Error(Errc::BadInput, "t grid must be positive");
  Rational lo = x0 - 2 * r, hi = x0 + 2 * r;
  if (lo < 0) lo = 0;
  if (hi > 1) hi = 1;
  const Interval<Rational> ball{lo, hi};
  const ConditionalSampler sampler(gibbs, ball);
  SurvivalCurve out;
  out.t.assign(t_grid.begin(), t_grid.end());
  out.mu_ball = sampler.mass();
  out.n = n;
  const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
  const auto cap = static_cast<std::size_t>(std::ceil(t_max / out.mu_ball)) + 1;
  std::vector<ReturnTime> times(n);
  parallel_for(n, plan.workers, [&](std::size_t i) {
    auto x = sampler.draw(make_stream(plan.seed, tag_of(kTagSurvival, 0, tag), i));
    times[i] = hitting_time_set(gibbs.map(), x, ball, cap);
  });
  for (double t : t_grid) {
    const double limit = t / out.mu_ball;
    std::size_t alive = 0;
    for (const auto& rt : times) alive += rt.censored || static_cast<double>(rt.steps) > limit;
    out.survival.push_back(static_cast<double>(alive) / static_cast<double>(n));
  }
  return out;
}

Rational sample_center(const GibbsMeasure& gibbs, Rng& rng, double width) {
  const std::size_t depth = depth_for_width(gibbs.map(), width);
  const auto p = sample_point(gibbs, rng, depth);
  return cylinder_midpoint(gibbs.map(), p.word);
}

PhiResult phi_rate_estimate(const GibbsMeasure& gibbs, double d_mu, const PhiConfig& config, const SeedPlan& plan) {
  if (config.a.empty()) throw Error(Errc::BadInput, "no exponents a");
  if (config.n_centers == 0 || config.n_inner == 0 || config.batch == 0)
    throw Error(Errc::BadInput, "phi sample counts must be positive");
  const std::size_t na = config.a.size();
  PhiResult out;
  out.a = config.a;
  out.estimates.assign(na, {});
  out.undecided.assign(na, 0);
  out.invalid.assign(na, false);
  const MarkovMap& map = gibbs.map();

  for (std::size_t ri = 0; ri < config.r_grid.size(); ++ri) {
    const double rd = config.r_grid[ri];
    const Rational r(rd);
    const double threshold = std::exp(-(d_mu - config.eps) * std::log(rd));
    const auto cap = static_cast<std::size_t>(std::floor(threshold));
    // 0 = non-event, 1 = event, 2 = undecided (counted as event)
    std::vector<std::vector<int>> status(config.n_centers, std::vector<int>(na, 2));
    parallel_for(config.n_centers, plan.workers, [&](std::size_t c) {
      Rng center_rng = make_stream(plan.seed, tag_of(kTagPhiCenter, ri), c);
      const Rational x0 = sample_center(gibbs, center_rng, rd * 0x1.0p-30);
      Rational lo = x0 - 2 * r, hi = x0 + 2 * r;
      if (lo < 0) lo = 0;
      if (hi > 1) hi = 1;
      const Interval<Rational> ball{lo, hi};
      const ConditionalSampler sampler(gibbs, ball);
      std::size_t hits = 0, n = 0;
      auto& st = status[c];
      while (n < config.n_inner && std::find(st.begin(), st.end(), 2) != st.end()) {
        const std::size_t stop = std::min(config.n_inner, n + config.batch);
        for (; n < stop; ++n) {
          auto x = sampler.draw(make_stream(plan.seed, tag_of(kTagPhiInner, ri, c), n));
          hits += !hitting_time_set(map, x, ball, cap).censored;
        }
        const auto ci = wilson_interval(hits, n);
        for (std::size_t k = 0; k < na; ++k) {
          if (st[k] != 2) continue;
          const double level = config.C * std::exp(config.a[k] * std::log(rd));
          if (ci.low > level) st[k] = 1;
          else if (ci.high < level) st[k] = 0;
        }
      }
    });
    for (std::size_t k = 0; k < na; ++k) {
      TailEstimate est;
      est.r = rd;
      est.threshold_exponent = d_mu - config.eps;
      est.n = config.n_centers;
      est.cap = cap;
      std::size_t undecided = 0;
      for (const auto& st : status) {
        est.hits += st[k] != 0;
        undecided += st[k] == 2;
      }
      est.censored = undecided;
      est.invalid = static_cast<double>(undecided) > 0.2 * static_cast<double>(config.n_centers);
      out.undecided[k] += undecided;
      out.invalid[k] = out.invalid[k] || est.invalid;
      est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.n);
      const auto ci = wilson_interval(est.hits, est.n);
      est.ci_low = ci.low;
      est.ci_high = ci.high;
      out.estimates[k].push_back(est);
    }
  }
  for (std::size_t k = 0; k < na; ++k) out.fits.push_back(fit_rate(out.estimates[k]));
  return out;
}

ExpLawResult exp_law_check(const GibbsMeasure& gibbs, const Rational& r, std::size_t n_centers, std::size_t n_inner,
                           std::span<const double> t_grid, double a, double b, const SeedPlan& plan) {
  if (t_grid.empty() || *std::min_element(t_grid.begin(), t_grid.end()) <= 0)
    throw Error(Errc::BadInput, "t grid must start above 0");
  ExpLawResult out;
  out.deviation_bound = std::exp(a * log_of(r));
  out.fraction_bound = std::exp(b * log_of(r));
  out.deviations.assign(n_centers, 0.0);
  parallel_for(n_centers, plan.workers, [&](std::size_t c) {
    Rng rng = make_stream(plan.seed, tag_of(kTagExpCenter), c);
    const Rational x0 = sample_center(gibbs, rng, to_double(r) * 0x1.0p-30);
    const auto curve = conditional_return_cdf(gibbs, x0, r, t_grid, n_inner, {plan.seed, 1}, c);
    double worst = 0;
    for (std::size_t i = 0; i < curve.t.size(); ++i)
      worst = std::max(worst, std::abs(curve.survival[i] - std::exp(-curve.t[i])));
    out.deviations[c] = worst;
  });
  std::size_t bad = 0;
  for (double dv : out.deviations) {
    bad += dv > out.deviation_bound;
    out.worst_deviation = std::max(out.worst_deviation, dv);
  }
  out.fraction_bad = static_cast<double>(bad) / static_cast<double>(n_centers);
  out.verdict = out.fraction_bad <= out.fraction_bound;
  return out;
}

TailResult level_set_tail(const GibbsMeasure& gibbs, double d_mu, double eps, std::span<const double> r_grid,
                          std::size_t n_per_r, const SeedPlan& plan) {
  if (eps == 0) throw Error(Errc::BadInput, "eps must be nonzero");
  TailResult out;
  for (std::size_t ri = 0; ri < r_grid.size(); ++ri) {
    const double rd = r_grid[ri];
    const Rational r(rd);
    const double log_r = std::log(rd);
    std::vector<char> event(n_per_r, 0);
    parallel_for(n_per_r, plan.workers, [&](std::size_t i) {
      Rng rng = make_stream(plan.seed, tag_of(kTagLevelSet, ri), i);
      const Rational x = sample_center(gibbs, rng, rd * 0x1.0p-40);
      const auto q = ball_measure_relative(gibbs, x, r, 1e-9);
      const double z = std::log(q.value) / log_r;
      event[i] = eps > 0 ? z >= d_mu + eps : z <= d_mu + eps;
    });
    TailEstimate est;
    est.r = rd;
    est.threshold_exponent = d_mu + eps;
    est.n = n_per_r;
    for (char e : event) est.hits += e;
    est.p_hat = static_cast<double>(est.hits) / static_cast<double>(est.n);
    const auto ci = wilson_interval(est.hits, est.n);
    est.ci_low = ci.low;
    est.ci_high = ci.high;
    out.estimates.push_back(est);
  }
  out.fit = fit_rate(out.estimates);
  return out;
}

}  // namespace ldrt
