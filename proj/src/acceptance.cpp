#include "ldrt/acceptance.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "ldrt/mc_lab.hpp"
#include "ldrt/rates.hpp"

namespace ldrt {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double x) { return format_number(x); }

struct Instance {
  ScenarioConfig config;
  MarkovMap map;
  GibbsMeasure gibbs;
  RateProfile profile;
};

Instance load_instance(const std::filesystem::path& path) {
  ScenarioConfig config = load_scenario(path);
  MarkovMap map = scenario_map(config);
  GibbsMeasure gibbs = scenario_gibbs(config, map);
  RateProfile profile = rate_profile(gibbs);
  return {std::move(config), std::move(map), std::move(gibbs), std::move(profile)};
}

bool full_branches(const MarkovMap& map) {
  for (int i = 0; i < map.size(); ++i)
    if (map.image(i).lo != 0 || map.image(i).hi != 1) return false;
  return true;
}

std::vector<double> q_grid41() {
  std::vector<double> q;
  for (int i = 0; i <= 40; ++i) q.push_back(-5.0 + 0.25 * i);
  return q;
}

// Largest |spectrum_T - moran_T| over the 41-point grid.
double moran_gap(const GibbsMeasure& gibbs) {
  const auto& map = gibbs.map();
  std::vector<double> p(gibbs.stationary().data(), gibbs.stationary().data() + gibbs.size());
  std::vector<double> a;
  for (int i = 0; i < map.size(); ++i) a.push_back(1.0 / to_double(map.slope(i)));  // contraction ratios
  double worst = 0;
  for (double q : q_grid41()) worst = std::max(worst, std::abs(spectrum_T(gibbs, q) - moran_T(p, a, q)));
  return worst;
}

struct Identities {
  double t1 = 0, t0 = 0, first = -kInf, second = kInf;
};

Identities identities(const GibbsMeasure& gibbs) {
  Identities id;
  id.t1 = std::abs(spectrum_T(gibbs, 1.0));
  id.t0 = std::abs(spectrum_T(gibbs, 0.0) - 1.0);
  const auto q = q_grid41();
  std::vector<double> t;
  for (double x : q) t.push_back(spectrum_T(gibbs, x));
  for (std::size_t i = 0; i + 1 < t.size(); ++i) id.first = std::max(id.first, t[i + 1] - t[i]);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) id.second = std::min(id.second, t[i + 1] - 2 * t[i] + t[i - 1]);
  return id;
}

bool identities_ok(const Identities& id) {
  return id.t1 <= 1e-10 && id.t0 <= 1e-8 && id.first <= 1e-8 && id.second >= -1e-8;
}

std::string identities_text(const Identities& id) {
  return "|T(1)|=" + num(id.t1) + " |T(0)-1|=" + num(id.t0) + " max dT=" + num(id.first) + " min d2T=" + num(id.second);
}

struct Normalization {
  double at_min = 0, lowest = kInf;
  bool psi_ok = true;
  std::string psi_text;
};

Normalization normalization(const RateProfile& profile) {
  Normalization n;
  const double d = profile.d_mu();
  n.at_min = std::abs(lambda_star(profile, -d));
  const auto sup = profile.support();
  const double lo = sup.lo - 0.1 * std::max(sup.width(), 0.1), hi = sup.hi + 0.1 * std::max(sup.width(), 0.1);
  for (int i = 0; i <= 400; ++i) n.lowest = std::min(n.lowest, lambda_star(profile, lo + (hi - lo) * i / 400.0));
  for (double e : {0.05, 0.1, 0.2, 0.3}) {
    const double plus = psi_rate(profile, e), minus = psi_rate(profile, -e);
    const bool ok = profile.maximal_dimension() ? (std::isinf(plus) && std::isinf(minus)) : (plus > 0 && minus > 0);
    n.psi_ok = n.psi_ok && ok;
    n.psi_text += " psi(+-" + num(e) + ")=" + num(plus) + "/" + num(minus);
  }
  return n;
}

bool normalization_ok(const Normalization& n) { return n.at_min <= 1e-6 && n.lowest >= -1e-9 && n.psi_ok; }

std::string normalization_text(const Normalization& n) {
  return "|L*(-d)|=" + num(n.at_min) + " min L*=" + num(n.lowest) + n.psi_text;
}

std::vector<double> dyadic_grid(int from, int to, int step = 1) {
  std::vector<double> r;
  for (int k = from; k <= to; k += step) r.push_back(std::ldexp(1.0, -k));
  return r;
}

// Cramer rate of the mean of Y = log p_w / log(1/2), expressed per unit of -log r.
double cramer_exponent(std::span<const double> p, double x) {
  std::vector<double> y;
  for (double pi : p) y.push_back(std::log(pi) / std::log(0.5));
  auto neg_dual = [&](double theta) {
    double m = 0;
    for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * std::exp(theta * y[i]);
    return -(theta * x - std::log(m));
  };
  const auto [theta, value] = boost::math::tools::brent_find_minima(neg_dual, -50.0, 50.0, 52);
  (void)theta;
  return -value / std::log(2.0);
}

bool same_bytes(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  return std::string(std::istreambuf_iterator<char>(fa), {}) == std::string(std::istreambuf_iterator<char>(fb), {});
}

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& o) : opt_(o) {}

  Instance& inst(const std::string& name) {
    for (auto& [n, i] : cache_)
      if (n == name) return i;
    cache_.emplace_back(name, load_instance(opt_.scenario_dir / (name + ".cfg")));
    return cache_.back().second;
  }
  SeedPlan plan() const { return {opt_.seed, opt_.workers}; }

  CriterionResult c1() {
    const auto t0 = Clock::now();
    const double g2i = moran_gap(inst("i2_bernoulli_quarter").gibbs);
    const double g3i = moran_gap(inst("i3_unequal_slopes").gibbs);
    const double s = elapsed(t0);
    return {1, "spectrum matches the Moran oracle", g2i < 1e-8 && g3i < 1e-8 && s < 5.0,
            "max gap I2=" + num(g2i) + " I3=" + num(g3i) + " (< 1e-8), runtime < 5 s", s};
  }

  CriterionResult c2() {
    bool ok = true;
    std::string detail;
    for (const char* n : {"i1_lebesgue", "i2_bernoulli_quarter", "i3_unequal_slopes"}) {
      const auto id = identities(inst(n).gibbs);
      ok = ok && identities_ok(id);
      detail += std::string(detail.empty() ? "" : "; ") + n + ": " + identities_text(id);
    }
    return {2, "T(1)=0, T(0)=1, T convex nonincreasing", ok, detail, 0};
  }

  CriterionResult c3() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;
    for (const char* n : {"i1_lebesgue", "i2_bernoulli_quarter", "i3_unequal_slopes"}) {
      const auto nm = normalization(inst(n).profile);
      ok = ok && normalization_ok(nm);
      detail += std::string(detail.empty() ? "" : "; ") + n + ": " + normalization_text(nm);
    }
    const double s = elapsed(t0);
    return {3, "Lambda* normalization and psi sign", ok && s < 5.0, detail, s};
  }

  CriterionResult c4() {
    bool ok = true;
    std::string detail;
    for (const char* n : {"i2_bernoulli_quarter", "i3_unequal_slopes"}) {
      const auto c = curvature(inst(n).gibbs);
      ok = ok && c.discrepancy <= 0.01;
      detail += std::string(n) + ": c=" + num(c.from_spectrum) + " vs " + num(c.from_variance) + "; ";
    }
    const auto& g = inst("i2_bernoulli_quarter").gibbs;
    const double lam = lyapunov(g), var = variance(g).value();
    const bool ref = std::abs(lam - std::log(2.0)) < 1e-12 && std::abs(var - 0.2262) < 5e-4;
    detail += "I2 lambda=" + num(lam) + " sigma^2=" + num(var);
    return {4, "two routes to the curvature agree within 1%", ok && ref, detail, 0};
  }

  CriterionResult c5() {
    const auto& i2 = inst("i2_bernoulli_quarter");
    const double c = curvature(i2.gibbs).value();
    const double kappa = 0.9, a0 = i2.config.a0, d2 = i2.config.d2;
    bool ok = true;
    std::string detail = "c=" + num(c);
    for (double eps : {0.02, 0.05}) {
      const auto [f1, f2] = quadratic_floor(c, eps, kappa);
      const double v1 = g1(i2.profile, eps);
      const auto v2 = g2(i2.profile, eps, a0, d2);
      const double at_quarter = g2_objective(i2.profile, eps, a0, d2, 0.25, eps / 4, eps / 4);
      ok = ok && v1 >= f1 && v2.value >= f2 && v2.value >= at_quarter;
      detail += "; eps=" + num(eps) + ": g1=" + num(v1) + (v1 >= f1 ? " >= " : " < ") + num(f1) +
                ", g2=" + num(v2.value) + (v2.value >= f2 ? " >= " : " < ") + num(f2) +
                " (objective at gamma=eps'=eps''/eps=1/4: " + num(at_quarter) + ")";
    }
    return {5, "quadratic floors for g1 and g2", ok, detail, 0};
  }

  CriterionResult c6() {
    bool ok = true;
    std::string detail;
    for (const char* n : {"i2_bernoulli_quarter", "i3_unequal_slopes"}) {
      const auto& in = inst(n);
      const double a0 = in.config.a0, d2 = in.config.d2;
      const auto psi = [&](double e) { return psi_rate(in.profile, e); };
      for (double eps : {0.05, 0.1, 0.2, 0.3}) {
        const auto best = g2(in.profile, eps, a0, d2);
        std::vector<PhiEntry> table;
        auto add = [&](double e1) { table.push_back({std::min(d2, eps - e1), std::min(a0, psi(-e1))}); };
        for (int k = 1; k < 200; ++k) add(eps * k / 200.0);
        add(best.eps1);
        auto grids = default_theorem25_grids(eps);
        grids.gamma.push_back(best.gamma);
        grids.eps2.push_back(best.eps2);
        const double second = theorem25_lower_bounds(psi, table, eps, grids).second;
        const double gap = std::abs(second - best.value);
        ok = ok && gap <= 1e-6;
        detail += std::string(detail.empty() ? "" : "; ") + n + " eps=" + num(eps) + ": " + num(second) + " vs g2 " +
                  num(best.value);
      }
    }
    return {6, "assembled bound reproduces g2 to 1e-6", ok, detail, 0};
  }

  CriterionResult c7() {
    const auto t0 = Clock::now();
    const auto& g = inst("i2_bernoulli_quarter").gibbs;
    bool ok = true;
    std::string detail;
    for (const Word& w : {Word{0}, Word{1, 1}, Word{0, 1, 0}}) {
      const auto k = kac_check(g, w, 100000, plan());
      const bool hit = std::abs(k.mean_product - 1.0) <= 3 * k.stderr_product && k.censored == 0;
      ok = ok && hit;
      std::string word;
      for (Symbol s : w) word += char('0' + s);
      detail += "(" + word + ") " + num(k.mean_product) + " +- " + num(k.stderr_product) + "; ";
    }
    const double s = elapsed(t0);
    return {7, "Kac: mean return time times mu(A) = 1", ok && s < 60.0, detail + "runtime < 60 s", s};
  }

  CriterionResult c8() {
    const auto t0 = Clock::now();
    const auto& in = inst("i2_bernoulli_quarter");
    TailConfig tc;
    tc.eps = 0.3;
    tc.event = TailEvent::Slow;
    tc.r_grid = dyadic_grid(8, 14);
    tc.n_per_r = 10000;
    const auto tail = empirical_tail(in.gibbs, in.profile.d_mu(), tc, plan());
    const double bound = g1(in.profile, 0.3) - 0.1;
    const double s = elapsed(t0);
    return {8, "slow-return exponent >= g1(0.3) - 0.1", tail.fit.slope >= bound && s < 900.0,
            "slope=" + num(tail.fit.slope) + " +- " + num(tail.fit.stderr_slope) + " vs " + num(bound), s};
  }

  CriterionResult c9() {
    const auto t0 = Clock::now();
    const auto& in = inst("i2_bernoulli_quarter");
    const double eps = 0.3;
    TailConfig tc;
    tc.eps = eps;
    tc.event = TailEvent::Fast;
    tc.r_grid = dyadic_grid(8, 14);
    tc.n_per_r = 10000;
    const auto tail = empirical_tail(in.gibbs, in.profile.d_mu(), tc, plan());

    PhiConfig pc;
    pc.a = {0.05, 0.1, 0.15, 0.2, 0.25};
    pc.eps = eps;
    pc.C = in.config.C;
    pc.r_grid = dyadic_grid(8, 12);
    pc.n_centers = 200;
    pc.n_inner = 2000;
    const auto phi = phi_rate_estimate(in.gibbs, in.profile.d_mu(), pc, plan());
    std::vector<PhiEntry> table;
    std::string phis;
    for (std::size_t k = 0; k < phi.a.size(); ++k) {
      phis += " phi(" + num(phi.a[k]) + ")=" + (phi.invalid[k] ? std::string("invalid") : num(phi.fits[k].slope));
      if (!phi.invalid[k]) table.push_back({phi.a[k], phi.fits[k].slope});
    }
    const auto psi = [&](double e) { return psi_rate(in.profile, e); };
    const double bound =
        table.empty() ? kInf : theorem25_lower_bounds(psi, table, eps, default_theorem25_grids(eps)).second;
    const double s = elapsed(t0);
    return {9, "fast-return exponent >= assembled bound - 0.1", tail.fit.slope >= bound - 0.1 && s < 900.0,
            "slope=" + num(tail.fit.slope) + " +- " + num(tail.fit.stderr_slope) + " vs bound " + num(bound) +
                " - 0.1;" + phis,
            s};
  }

  CriterionResult c10() {
    const auto t0 = Clock::now();
    const auto& g = inst("i2_bernoulli_quarter").gibbs;
    std::vector<double> t;
    for (int i = 1; i <= 30; ++i) t.push_back(0.1 * i);
    const Rational r(1, 1024);
    const double a = std::log(10.0) / std::log(1024.0);  // r^a = 0.1
    const auto res = exp_law_check(g, r, 200, 10000, t, a, a, plan());
    const double s = elapsed(t0);
    return {10, "exponential law at r = 2^-10", res.fraction_bad <= 0.1 && s < 600.0,
            "fraction_bad=" + num(res.fraction_bad) + " (<= 0.1), worst deviation=" + num(res.worst_deviation), s};
  }

  CriterionResult c11() {
    const auto t0 = Clock::now();
    const auto& in = inst("i2_bernoulli_quarter");
    const double d = in.profile.d_mu(), eps = 0.3;
    const auto tail = level_set_tail(in.gibbs, d, eps, dyadic_grid(16, 48, 4), 10000, plan());
    const double target = lambda_star(in.profile, -d - eps);
    std::vector<double> p(in.gibbs.stationary().data(), in.gibbs.stationary().data() + in.gibbs.size());
    const double iid = cramer_exponent(p, d + eps);
    const double rel = std::abs(tail.fit.slope - target) / target;
    const double rel_iid = std::abs(tail.fit.slope - iid) / iid;
    const bool ok = rel <= 0.25 && rel_iid <= 0.25 && std::abs(iid - target) <= 1e-6;
    return {11, "level-set exponent within 25% of Lambda*(-d-0.3)", ok,
            "slope=" + num(tail.fit.slope) + " +- " + num(tail.fit.stderr_slope) + " vs " + num(target) +
                " (rel " + num(rel) + "), iid Cramer " + num(iid),
            elapsed(t0)};
  }

  CriterionResult c12() {
    const auto t0 = Clock::now();
    if (opt_.cli.empty()) return {12, "determinism across worker counts", false, "no CLI executable given", 0};
    const auto cfg = opt_.scenario_dir / "i2_bernoulli_quarter.cfg";
    std::vector<std::filesystem::path> dirs;
    for (unsigned w : {1u, 8u}) {
      const auto dir = opt_.work_dir / ("workers" + std::to_string(w));
      std::filesystem::remove_all(dir);
      const std::string cmd = "\"" + opt_.cli.string() + "\" run \"" + cfg.string() + "\" --seed 42 --workers " +
                              std::to_string(w) + " --out \"" + dir.string() + "\" > /dev/null";
      const int rc = std::system(cmd.c_str());
      if (rc == -1 || !std::filesystem::exists(dir / "report.txt"))
        return {12, "determinism across worker counts", false, "run failed: " + cmd, elapsed(t0)};
      dirs.push_back(dir);
    }
    std::size_t files = 0;
    std::string differing;
    for (const auto& e : std::filesystem::directory_iterator(dirs[0])) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (!same_bytes(e.path(), dirs[1] / e.path().filename())) differing += " " + e.path().filename().string();
    }
    return {12, "determinism across worker counts", files > 0 && differing.empty(),
            std::to_string(files) + " CSV files compared" + (differing.empty() ? "" : ", differ:" + differing),
            elapsed(t0)};
  }

 private:
  static double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

  AcceptanceOptions opt_;
  std::vector<std::pair<std::string, Instance>> cache_;
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& report) {
  Suite suite(options);
  using Fn = CriterionResult (Suite::*)();
  const Fn all[] = {&Suite::c1, &Suite::c2, &Suite::c3, &Suite::c4,  &Suite::c5,  &Suite::c6,
                    &Suite::c7, &Suite::c8, &Suite::c9, &Suite::c10, &Suite::c11, &Suite::c12};
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 12; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end())
      continue;
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = (suite.*all[id - 1])();
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0};
    }
    if (r.seconds == 0) r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (report) report(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CriterionResult> verify_scenario(const ScenarioConfig& config) {
  std::vector<CriterionResult> out;
  const MarkovMap map = scenario_map(config);
  const GibbsMeasure gibbs = scenario_gibbs(config, map);
  const RateProfile profile = rate_profile(gibbs);
  if (full_branches(map) && gibbs.is_bernoulli()) {
    const double gap = moran_gap(gibbs);
    out.push_back({1, "spectrum matches the Moran oracle", gap < 1e-8, "max gap=" + num(gap), 0});
  }
  const auto id = identities(gibbs);
  out.push_back({2, "T(1)=0, T(0)=1, T convex nonincreasing", identities_ok(id), identities_text(id), 0});
  const auto nm = normalization(profile);
  out.push_back({3, "Lambda* normalization and psi sign", normalization_ok(nm), normalization_text(nm), 0});
  if (!profile.maximal_dimension()) {
    const auto c = curvature(gibbs);
    out.push_back({4, "two routes to the curvature agree within 1%", c.discrepancy <= 0.01,
                   "c=" + num(c.from_spectrum) + " vs " + num(c.from_variance), 0});
  }
  const RunReport report = run_scenario(config, {.write_files = false});
  for (const auto& v : report.verdicts)
    out.push_back({0, v.predicate, v.pass, num(v.lhs) + " " + v.relation + " " + num(v.rhs), 0});
  return out;
}

std::string format_result(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  std::string head = r.pass ? "PASS" : "FAIL";
  if (r.id > 0) head += " [" + std::to_string(r.id) + "]";
  return head + " " + r.title + ": " + r.detail + (r.seconds > 0 ? " (" + std::string(secs) + " s)" : "");
}

}  // namespace ldrt
