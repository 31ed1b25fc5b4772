#include "ldrt/measure.hpp"

#include <cmath>

namespace ldrt {

namespace {

// Row of the chain leading into level k of an itinerary: pi at k = 0.
double step_weight(const GibbsMeasure& g, const Word* prefix, std::size_t k, Symbol j) {
  return k == 0 ? g.stationary()(j) : g.transition()((*prefix)[k - 1], j);
}

struct SideMass {
  double value = 0.0;
  double error = 0.0;
  std::size_t nodes = 0;
};

// Share of the cylinder of x_0..x_{first_level-1} lying on one side of x,
// summed along the itinerary of x until the undecided remainder drops to tol.
// first_level = 0 measures against all of [0,1]. An orbit point sitting on a
// domain endpoint splits its child exactly, so the sum stops there with no error.
SideMass side_mass(const GibbsMeasure& g, OrbitItinerary& x, const Rational& start, std::size_t first_level, bool right,
                   double tol) {
  const MarkovMap& map = g.map();
  SideMass out;
  Rational y = start;
  for (std::size_t k = 0; k < first_level; ++k) y = map.apply_branch(x.at(k), y);
  double mass = 1.0;
  const int m = g.size();
  for (std::size_t k = first_level;; ++k) {
    const Symbol s = x.at(k);
    ++out.nodes;
    for (int j = 0; j < m; ++j) {
      if (right ? j > s : j < s) out.value += mass * step_weight(g, &x.computed(), k, static_cast<Symbol>(j));
    }
    mass *= step_weight(g, &x.computed(), k, s);
    const bool at_lo = y == map.lo(s), at_hi = y == 1;
    if (at_lo || at_hi) {
      if (right == at_lo) out.value += mass;
      return out;
    }
    if (mass <= tol) break;
    y = map.apply_branch(s, y);
  }
  out.value += mass / 2;
  out.error = mass / 2;
  return out;
}

MeasureQueryResult interval_absolute(const GibbsMeasure& g, const Interval<Rational>& uv, double tol) {
  const auto& [u, v] = uv;
  if (!(0 <= u && u <= v && v <= 1)) throw Error(Errc::BadInterval, "need 0 <= u <= v <= 1");
  if (!(tol > 0)) throw Error(Errc::BadInput, "tolerance must be positive");
  MeasureQueryResult out;
  if (u == v) return out;
  const MarkovMap& map = g.map();
  const bool lower = u > 0, upper = v < 1;
  if (!lower && !upper) {
    out.value = 1.0;
    return out;
  }
  if (!upper) {
    OrbitItinerary x(map, u);
    const auto s = side_mass(g, x, u, 0, true, tol);
    return {s.value, s.error, s.nodes};
  }
  if (!lower) {
    OrbitItinerary x(map, v);
    const auto s = side_mass(g, x, v, 0, false, tol);
    return {s.value, s.error, s.nodes};
  }

  OrbitItinerary a(map, u), b(map, v);
  // Common prefix, carrying its mass.
  double common = 1.0;
  std::size_t k = 0;
  for (; a.at(k) == b.at(k); ++k) {
    common *= step_weight(g, &a.computed(), k, a.at(k));
    if (common <= tol || k + 1 >= kCompareDepth) return {common / 2, common / 2, k + 1};  // u, v share a tiny cylinder
  }
  const Symbol su = a.at(k), sv = b.at(k);
  double middle = 0.0;
  for (int j = su + 1; j < sv; ++j) middle += step_weight(g, &a.computed(), k, static_cast<Symbol>(j));
  const double wu = step_weight(g, &a.computed(), k, su);
  const double wv = step_weight(g, &b.computed(), k, sv);
  const double scale_u = common * wu, scale_v = common * wv;
  const auto right = scale_u > 0 ? side_mass(g, a, u, k + 1, true, tol / (2 * scale_u)) : SideMass{};
  const auto left = scale_v > 0 ? side_mass(g, b, v, k + 1, false, tol / (2 * scale_v)) : SideMass{};
  out.value = common * middle + scale_u * right.value + scale_v * left.value;
  out.error_bound = scale_u * right.error + scale_v * left.error;
  out.nodes_visited = k + 1 + right.nodes + left.nodes;
  out.value = std::min(1.0, std::max(0.0, out.value));
  return out;
}

MeasureQueryResult interval_relative(const GibbsMeasure& g, const Interval<Rational>& uv, double rtol) {
  double tol = 1e-6;
  MeasureQueryResult q;
  std::size_t nodes = 0;
  for (int pass = 0; pass < 64; ++pass) {
    q = interval_absolute(g, uv, tol);
    nodes += q.nodes_visited;
    if (q.error_bound <= rtol * q.value || q.error_bound == 0) break;
    tol = q.value > 2 * q.error_bound ? 0.5 * rtol * q.value : tol * 1e-6;
    if (tol < 1e-300) break;
  }
  q.nodes_visited = nodes;
  return q;
}

Interval<Rational> clipped_ball(const Rational& x, const Rational& r) {
  if (!(r > 0)) throw Error(Errc::BadInput, "radius must be positive");
  if (x < 0 || x > 1) throw Error(Errc::BadInput, "center outside [0,1]");
  Rational lo = x - r, hi = x + r;
  if (lo < 0) lo = 0;
  if (hi > 1) hi = 1;
  return {lo, hi};
}

}  // namespace

MeasureQueryResult measure_interval(const GibbsMeasure& gibbs, const Interval<Rational>& uv, double tol) {
  return interval_absolute(gibbs, uv, tol);
}

MeasureQueryResult ball_measure(const GibbsMeasure& gibbs, const Rational& x, const Rational& r, double tol) {
  return interval_absolute(gibbs, clipped_ball(x, r), tol);
}

MeasureQueryResult ball_measure_relative(const GibbsMeasure& gibbs, const Rational& x, const Rational& r,
                                         double rtol) {
  return interval_relative(gibbs, clipped_ball(x, r), rtol);
}

double local_dim_ratio(const GibbsMeasure& gibbs, const Rational& x, const Rational& r) {
  if (!(r > 0 && r < 1)) throw Error(Errc::BadInput, "radius must lie in (0,1)");
  const auto q = ball_measure_relative(gibbs, x, r, 1e-9);
  if (!(q.value > 0)) throw Error(Errc::ZeroMeasure, "ball has zero measure");
  return std::log(q.value) / std::log(to_double(r));
}

Membership classify_level_set(const GibbsMeasure& gibbs, double d_mu, const Rational& x, const Rational& r,
                              LevelSet kind, double eps) {
  const double log_r = std::log(to_double(r));
  const double threshold = std::exp(log_r * (kind == LevelSet::Eps ? d_mu + eps : d_mu - eps));
  for (double rel : {1e-6, 1e-12}) {
    const auto q = ball_measure(gibbs, x, r, threshold * rel);
    if (q.value - q.error_bound >= threshold) return kind == LevelSet::Eps ? Membership::In : Membership::Out;
    if (q.value + q.error_bound < threshold) return kind == LevelSet::Eps ? Membership::Out : Membership::In;
    if (kind == LevelSet::MinusXi && q.value + q.error_bound <= threshold) return Membership::In;
  }
  return Membership::Undecidable;
}

ConditionalSampler::ConditionalSampler(const GibbsMeasure& gibbs, const Interval<Rational>& uv)
    : gibbs_(&gibbs), uv_(uv) {
  mass_ = interval_relative(gibbs, uv, 1e-9).value;
  if (!(mass_ > 0)) throw Error(Errc::ZeroMass, "conditioning interval has zero mass");
  lower_ = make_boundary(uv.lo, true);
  upper_ = make_boundary(uv.hi, false);
}

ConditionalSampler::Boundary ConditionalSampler::make_boundary(const Rational& x, bool right_side) const {
  Boundary b;
  b.active = right_side ? x > 0 : x < 1;
  if (!b.active) return b;
  const auto& g = *gibbs_;
  OrbitItinerary it(g.map(), x);
  // Grow until the boundary cylinder is negligible next to the interval.
  double mass = 1.0;
  for (std::size_t k = 0;; ++k) {
    mass *= step_weight(g, &it.computed(), k, it.at(k));
    if (mass < 1e-12 * mass_ || k + 2 >= kCompareDepth) break;
  }
  b.word = it.computed();
  const std::size_t n_levels = b.word.size();
  b.share.assign(n_levels, 0.5);
  const int m = g.size();
  for (std::size_t n = n_levels - 1; n-- > 0;) {
    const Symbol from = b.word[n], next = b.word[n + 1];
    double s = 0.0;
    for (int j = 0; j < m; ++j)
      if (right_side ? j > next : j < next) s += g.transition()(from, j);
    b.share[n] = s + g.transition()(from, next) * b.share[n + 1];
  }
  return b;
}

Word ConditionalSampler::draw_prefix(Rng& rng) const {
  const auto& g = *gibbs_;
  const int m = g.size();
  Word w;
  bool on_lower = lower_.active, on_upper = upper_.active;
  std::vector<double> weights(static_cast<std::size_t>(m));
  for (std::size_t n = 0; on_lower || on_upper; ++n) {
    if ((on_lower && n >= lower_.word.size()) || (on_upper && n >= upper_.word.size())) break;
    const Symbol lu = on_lower ? lower_.word[n] : 0;
    const Symbol uv = on_upper ? upper_.word[n] : 0;
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
      double wt = step_weight(g, &w, n, static_cast<Symbol>(j));
      if (on_lower && j < lu) wt = 0;
      if (on_upper && j > uv) wt = 0;
      const bool shared = on_lower && on_upper && lu == uv;
      if (!shared) {
        if (on_lower && j == lu) wt *= lower_.share[n];
        if (on_upper && j == uv) wt *= upper_.share[n];
      }
      weights[static_cast<std::size_t>(j)] = wt;
      total += wt;
    }
    if (!(total > 0)) throw Error(Errc::ZeroMass, "conditional descent reached a null cylinder");
    double u = uniform01(rng) * total;
    int pick = 0;
    while (pick + 1 < m && (weights[static_cast<std::size_t>(pick)] == 0 || u >= weights[static_cast<std::size_t>(pick)])) {
      u -= weights[static_cast<std::size_t>(pick)];
      ++pick;
    }
    while (weights[static_cast<std::size_t>(pick)] == 0) --pick;  // rounding at the top end
    const auto j = static_cast<Symbol>(pick);
    w.push_back(j);
    on_lower = on_lower && j == lu;
    on_upper = on_upper && j == uv;
  }
  return w;
}

ChainItinerary ConditionalSampler::draw(Rng rng) const {
  Word prefix = draw_prefix(rng);
  return ChainItinerary(*gibbs_, std::move(rng), std::move(prefix));
}

SymbolicPoint conditional_sample(const GibbsMeasure& gibbs, const Interval<Rational>& uv, Rng& rng,
                                 std::size_t depth) {
  const ConditionalSampler sampler(gibbs, uv);
  SymbolicPoint p{sampler.draw_prefix(rng)};
  while (p.word.size() < depth)
    p.word.push_back(p.word.empty() ? gibbs.draw_initial(rng) : gibbs.draw_next(p.word.back(), rng));
  return p;
}

}  // namespace ldrt
