#include "ldrt/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ldrt {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(Errc::Config, where + ": " + what);
}

double parse_real(const std::string& token, const std::string& where) {
  try {
    if (token.find('/') != std::string::npos) return to_double(parse_rational(token));
  } catch (const Error&) {
    config_error(where, "not a number: '" + token + "'");
  }
  double v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) config_error(where, "not a number: '" + token + "'");
  return v;
}

Rational parse_exact(const std::string& token, const std::string& where) {
  try {
    return parse_rational(token);
  } catch (const Error&) {
    config_error(where, "not an exact rational: '" + token + "'");
  }
}

std::uint64_t parse_count(const std::string& token, const std::string& where) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size())
    config_error(where, "not a nonnegative integer: '" + token + "'");
  return v;
}

std::string real_text(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string join_reals(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? " " : "") + real_text(xs[i]);
  return out;
}

std::vector<double> parse_list(const std::string& value, const std::string& where) {
  std::vector<double> out;
  for (const auto& tok : split_ws(value)) out.push_back(parse_real(tok, where));
  return out;
}

Eigen::MatrixXi parse_matrix(const std::string& value, const std::string& where) {
  std::vector<std::vector<int>> rows;
  std::stringstream in(value);
  for (std::string row; std::getline(in, row, ';');) {
    std::vector<int> r;
    for (const auto& tok : split_ws(row)) {
      if (tok != "0" && tok != "1") config_error(where, "transition entries must be 0 or 1");
      r.push_back(tok == "1");
    }
    if (!r.empty()) rows.push_back(r);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXi a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m) config_error(where, "transition matrix must be square");
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = rows[i][j];
  }
  return a;
}

}  // namespace

std::vector<double> ScenarioConfig::r_grid() const {
  std::vector<double> out;
  for (Rational r = r_max; r >= r_min && out.size() < 256; r *= r_ratio) out.push_back(to_double(r));
  return out;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const { return serialize_scenario(*this) == serialize_scenario(o); }

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig c;
  c.epsilons.clear();
  bool epsilons_set = false;
  std::string section;
  std::string line;
  static const std::map<std::string, std::vector<std::string>> keys{
      {"map", {"branch", "transition"}},
      {"potential", {"log_weights", "values"}},
      {"spectrum", {"q_min", "q_max", "step"}},
      {"rates", {"epsilons", "lambda_points"}},
      {"sampling",
       {"epsilons", "r_max", "r_min", "ratio", "n_per_r", "cap_factor", "n_centers", "n_inner", "phi_a"}},
      {"constants", {"C", "a0", "d2", "kappa"}},
      {"run", {"name", "seed", "workers", "output_dir"}},
  };
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string where = "line " + std::to_string(number);
    const auto hash = line.find('#');
    const std::string text = trim(std::string_view(line).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') config_error(where, "unterminated section header");
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (!keys.contains(section)) config_error(where, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) config_error(where, "expected key = value");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    if (section.empty()) config_error(where, "key '" + key + "' outside any section");
    const auto& allowed = keys.at(section);
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      config_error(where, "unknown key '" + key + "' in [" + section + "]");
    const std::string field = where + " (" + section + "." + key + ")";

    if (section == "map" && key == "branch") {
      const auto tok = split_ws(value);
      if (tok.size() != 3 && tok.size() != 5) config_error(field, "branch needs lo hi slope [image_lo image_hi]");
      BranchSpec b{parse_exact(tok[0], field), parse_exact(tok[1], field), parse_exact(tok[2], field), {}};
      if (tok.size() == 5) b.image = Interval<Rational>{parse_exact(tok[3], field), parse_exact(tok[4], field)};
      c.map.branches.push_back(std::move(b));
    } else if (section == "map") {
      c.map.transitions = parse_matrix(value, field);
    } else if (section == "potential") {
      c.log_weights = key == "log_weights";
      c.potential = parse_list(value, field);
    } else if (section == "spectrum") {
      (key == "q_min" ? c.q_min : key == "q_max" ? c.q_max : c.q_step) = parse_real(value, field);
    } else if (section == "rates") {
      if (key == "epsilons") {
        c.epsilons = parse_list(value, field);
        epsilons_set = true;
      } else {
        c.lambda_points = parse_count(value, field);
      }
    } else if (section == "sampling") {
      if (key == "epsilons") c.mc_epsilons = parse_list(value, field);
      else if (key == "phi_a") c.phi_a = parse_list(value, field);
      else if (key == "r_max") c.r_max = parse_exact(value, field);
      else if (key == "r_min") c.r_min = parse_exact(value, field);
      else if (key == "ratio") c.r_ratio = parse_exact(value, field);
      else if (key == "cap_factor") c.cap_factor = parse_real(value, field);
      else if (key == "n_per_r") c.n_per_r = parse_count(value, field);
      else if (key == "n_centers") c.n_centers = parse_count(value, field);
      else c.n_inner = parse_count(value, field);
    } else if (section == "constants") {
      (key == "C" ? c.C : key == "a0" ? c.a0 : key == "d2" ? c.d2 : c.kappa) = parse_real(value, field);
    } else if (section == "run") {
      if (key == "name") c.name = value;
      else if (key == "output_dir") c.output_dir = value;
      else if (key == "workers") c.workers = static_cast<unsigned>(parse_count(value, field));
      else {
        c.seed = parse_count(value, field);
        c.seed_set = true;
      }
    }
  }
  if (!epsilons_set) c.epsilons = ScenarioConfig{}.epsilons;
  validate(c);
  return c;
}

ScenarioConfig parse_scenario_text(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, "cannot open " + path.string());
  return parse_scenario(in);
}

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& field, const std::string& what) { config_error("field " + field, what); };
  if (c.map.branches.empty()) fail("map.branch", "no branches");
  if (c.potential.size() != c.map.branches.size())
    fail("potential", "needs one value per branch (" + std::to_string(c.map.branches.size()) + ")");
  if (c.log_weights)
    for (double p : c.potential)
      if (!(p > 0)) fail("potential.log_weights", "weights must be positive");
  if (!(c.q_step > 0)) fail("spectrum.step", "step must be positive");
  if (!(c.q_min < c.q_max)) fail("spectrum", "q_min must be below q_max");
  for (double e : c.epsilons)
    if (!(e >= 0)) fail("rates.epsilons", "epsilons must be nonnegative");
  if (c.lambda_points < 2) fail("rates.lambda_points", "need at least 2 points");
  for (double e : c.mc_epsilons)
    if (!(e > 0)) fail("sampling.epsilons", "epsilons must be positive");
  if (!(c.r_min > 0 && c.r_min < c.r_max && c.r_max < 1)) fail("r_grid", "need 0 < r_min < r_max < 1");
  if (!(c.r_ratio > 0 && c.r_ratio < 1)) fail("r_grid", "ratio must lie in (0,1)");
  if (c.n_per_r < 1) fail("sampling.n_per_r", "count must be at least 1");
  if (c.n_centers < 1) fail("sampling.n_centers", "count must be at least 1");
  if (c.n_inner < 1) fail("sampling.n_inner", "count must be at least 1");
  if (!(c.cap_factor >= 1)) fail("sampling.cap_factor", "cap factor must be at least 1");
  for (double a : c.phi_a)
    if (!(a > 0)) fail("sampling.phi_a", "exponents must be positive");
  if (!(c.C > 0)) fail("constants.C", "must be positive");
  if (!(c.a0 > 0)) fail("constants.a0", "must be positive");
  if (!(c.d2 > 0)) fail("constants.d2", "must be positive");
  if (!(c.kappa > 0 && c.kappa < 1)) fail("constants.kappa", "must lie in (0,1)");
  if (!c.seed_set) fail("run.seed", "a seed is required");
  if (c.workers < 1) fail("run.workers", "need at least one worker");
}

std::string serialize_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "[map]\n";
  for (const auto& b : c.map.branches) {
    out << "branch = " << to_string(b.lo) << ' ' << to_string(b.hi) << ' ' << to_string(b.slope);
    if (b.image) out << ' ' << to_string(b.image->lo) << ' ' << to_string(b.image->hi);
    out << '\n';
  }
  if (c.map.transitions.size() != 0) {
    out << "transition =";
    for (Eigen::Index i = 0; i < c.map.transitions.rows(); ++i) {
      if (i) out << ';';
      for (Eigen::Index j = 0; j < c.map.transitions.cols(); ++j) out << ' ' << c.map.transitions(i, j);
    }
    out << '\n';
  }
  out << "\n[potential]\n" << (c.log_weights ? "log_weights" : "values") << " = " << join_reals(c.potential) << '\n';
  out << "\n[spectrum]\nq_min = " << real_text(c.q_min) << "\nq_max = " << real_text(c.q_max)
      << "\nstep = " << real_text(c.q_step) << '\n';
  out << "\n[rates]\nepsilons = " << join_reals(c.epsilons) << "\nlambda_points = " << c.lambda_points << '\n';
  out << "\n[sampling]\n";
  if (!c.mc_epsilons.empty()) out << "epsilons = " << join_reals(c.mc_epsilons) << '\n';
  out << "r_max = " << to_string(c.r_max) << "\nr_min = " << to_string(c.r_min) << "\nratio = " << to_string(c.r_ratio)
      << "\nn_per_r = " << c.n_per_r << "\ncap_factor = " << real_text(c.cap_factor) << "\nn_centers = " << c.n_centers
      << "\nn_inner = " << c.n_inner << '\n';
  if (!c.phi_a.empty()) out << "phi_a = " << join_reals(c.phi_a) << '\n';
  out << "\n[constants]\nC = " << real_text(c.C) << "\na0 = " << real_text(c.a0) << "\nd2 = " << real_text(c.d2)
      << "\nkappa = " << real_text(c.kappa) << '\n';
  out << "\n[run]\n";
  if (!c.name.empty()) out << "name = " << c.name << '\n';
  if (c.seed_set) out << "seed = " << c.seed << '\n';
  out << "workers = " << c.workers << "\noutput_dir = " << c.output_dir << '\n';
  return out.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0 ? 0.0 : x);  // no "-0"
  return buf;
}

MarkovMap scenario_map(const ScenarioConfig& config) { return build_map(config.map); }

GibbsMeasure scenario_gibbs(const ScenarioConfig& config, const MarkovMap& map) {
  Potential p;
  if (config.log_weights) {
    p = Potential::log_weights(config.potential);
  } else {
    p.values = Eigen::Map<const Eigen::VectorXd>(config.potential.data(), static_cast<Eigen::Index>(config.potential.size()));
  }
  return gibbs_measure(map, p);
}

std::vector<std::pair<double, double>> lambda_curve(const RateProfile& profile, double x_min, double x_max,
                                                    std::size_t points) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = x_min + (x_max - x_min) * static_cast<double>(i) / static_cast<double>(points - 1);
    out.emplace_back(x, lambda_star(profile, x));
  }
  return out;
}

bool RunReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

Verdict check(std::string predicate, double lhs, std::string relation, double rhs) {
  bool pass = false;
  if (relation == "<=") pass = lhs <= rhs;
  else if (relation == ">=") pass = lhs >= rhs;
  return {std::move(predicate), lhs, std::move(relation), rhs, pass};
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  validate(config);
  RunReport rep;
  rep.config = config;
  // Worker count and output location do not change results.
  ScenarioConfig hashed = config;
  hashed.workers = 1;
  hashed.output_dir = "out";
  rep.config_hash = fnv1a(serialize_scenario(hashed));

  auto stage = [](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
    }
  };

  const MarkovMap map = stage("build", [&] { return scenario_map(config); });
  const GibbsMeasure gibbs = stage("thermo", [&] { return scenario_gibbs(config, map); });
  rep.spectrum = stage("thermo", [&] { return compute_spectrum(gibbs, config.q_min, config.q_max, config.q_step); });
  rep.lyapunov = lyapunov(gibbs);
  rep.curvature = stage("thermo", [&] { return curvature(gibbs); });
  const RateProfile profile = stage("rates", [&] { return rate_profile(gibbs); });
  rep.d_mu = profile.d_mu();
  rep.maximal_dimension = profile.maximal_dimension();
  rep.support = profile.support();

  // Curve grid: odd point count centered on -d when the support is a point,
  // otherwise the support padded by a tenth on each side.
  stage("rates", [&] {
    const double width = rep.support.width();
    if (rep.maximal_dimension) {
      const std::size_t n = config.lambda_points | 1u;
      const double half = 0.5 * static_cast<double>(n - 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = -rep.d_mu + (static_cast<double>(i) - half) / half * 0.5;
        rep.lambda_curve.emplace_back(x, lambda_star(profile, x));
      }
    } else {
      rep.lambda_curve =
          lambda_curve(profile, rep.support.lo - 0.1 * width, rep.support.hi + 0.1 * width, config.lambda_points);
    }
    return 0;
  });

  const double c = rep.maximal_dimension ? kInf : rep.curvature.value();
  stage("rates", [&] {
    for (double eps : config.epsilons) {
      RateRow row;
      row.eps = eps;
      row.psi_plus = psi_rate(profile, eps);
      row.psi_minus = psi_rate(profile, -eps);
      row.g1 = g1(profile, eps);
      row.g2 = g2(profile, eps, config.a0, config.d2);
      std::tie(row.floor_g1, row.floor_g2) = quadratic_floor(c, eps, config.kappa);
      rep.rates.push_back(row);
    }
    return 0;
  });

  const auto r_grid = config.r_grid();
  const SeedPlan plan{config.seed, config.workers};
  stage("mc_lab", [&] {
    for (double eps : config.mc_epsilons) {
      TailConfig tc;
      tc.eps = eps;
      tc.r_grid = r_grid;
      tc.n_per_r = config.n_per_r;
      tc.cap_factor = config.cap_factor;
      tc.event = TailEvent::Slow;
      rep.slow_tails.emplace_back(eps, empirical_tail(gibbs, rep.d_mu, tc, plan));
      tc.event = TailEvent::Fast;
      rep.fast_tails.emplace_back(eps, empirical_tail(gibbs, rep.d_mu, tc, plan));

      auto it = std::find_if(rep.rates.begin(), rep.rates.end(), [&](const RateRow& r) { return r.eps == eps; });
      if (it == rep.rates.end()) {
        RateRow row;
        row.eps = eps;
        row.psi_plus = psi_rate(profile, eps);
        row.psi_minus = psi_rate(profile, -eps);
        row.g1 = g1(profile, eps);
        row.g2 = g2(profile, eps, config.a0, config.d2);
        std::tie(row.floor_g1, row.floor_g2) = quadratic_floor(c, eps, config.kappa);
        rep.rates.push_back(row);
        it = rep.rates.end() - 1;
      }
      RateRow& row = *it;
      row.measured = true;
      row.slope_ge = rep.slow_tails.back().second.fit.slope;
      row.stderr_ge = rep.slow_tails.back().second.fit.stderr_slope;
      row.slope_le = rep.fast_tails.back().second.fit.slope;
      row.stderr_le = rep.fast_tails.back().second.fit.stderr_slope;
      row.bound_le = row.g2.value;
      if (!config.phi_a.empty()) {
        PhiConfig pc;
        pc.a = config.phi_a;
        pc.eps = eps;
        pc.C = config.C;
        pc.r_grid = r_grid;
        pc.n_centers = config.n_centers;
        pc.n_inner = config.n_inner;
        auto phi = phi_rate_estimate(gibbs, rep.d_mu, pc, plan);
        std::vector<PhiEntry> table;
        for (std::size_t k = 0; k < phi.a.size(); ++k)
          if (!phi.invalid[k]) table.push_back({phi.a[k], phi.fits[k].slope});
        if (!table.empty()) {
          const auto psi = [&](double e) { return psi_rate(profile, e); };
          row.bound_le = theorem25_lower_bounds(psi, table, eps, default_theorem25_grids(eps)).second;
        }
        rep.phi.emplace_back(eps, std::move(phi));
      }
      row.pass_ge = row.slope_ge >= row.g1 - 0.1;
      row.pass_le = row.slope_le >= row.bound_le - 0.1;
    }
    return 0;
  });
  std::sort(rep.rates.begin(), rep.rates.end(), [](const RateRow& a, const RateRow& b) { return a.eps < b.eps; });

  // Verdicts.
  const auto& q = rep.spectrum.q;
  const auto& t = rep.spectrum.T;
  rep.verdicts.push_back(check("|T(1)|", std::abs(spectrum_T(gibbs, 1.0)), "<=", 1e-10));
  rep.verdicts.push_back(check("|T(0) - 1|", std::abs(spectrum_T(gibbs, 0.0) - 1.0), "<=", 1e-8));
  double worst_slope = -kInf, worst_curv = kInf;
  for (std::size_t i = 0; i + 1 < q.size(); ++i) worst_slope = std::max(worst_slope, t[i + 1] - t[i]);
  for (std::size_t i = 1; i + 1 < q.size(); ++i) worst_curv = std::min(worst_curv, t[i + 1] - 2 * t[i] + t[i - 1]);
  if (q.size() >= 2) rep.verdicts.push_back(check("max first difference of T", worst_slope, "<=", 1e-8));
  if (q.size() >= 3) rep.verdicts.push_back(check("min second difference of T", worst_curv, ">=", -1e-8));
  rep.verdicts.push_back(check("|Lambda*(-d)|", std::abs(lambda_star(profile, -rep.d_mu)), "<=", 1e-6));
  if (!rep.maximal_dimension)
    rep.verdicts.push_back(check("curvature route discrepancy", rep.curvature.discrepancy, "<=", 0.01));
  for (const auto& row : rep.rates) {
    if (!row.measured) continue;
    const std::string tag = "eps=" + format_number(row.eps);
    rep.verdicts.push_back(check("slow-return exponent " + tag + " vs g1 - 0.1", row.slope_ge, ">=", row.g1 - 0.1));
    rep.verdicts.push_back(check("fast-return exponent " + tag + " vs bound - 0.1", row.slope_le, ">=", row.bound_le - 0.1));
  }

  if (options.write_files) {
    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    auto write = [&](const char* name, const std::function<void(std::ostream&)>& fn) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw Error(Errc::Config, "cannot write " + (dir / name).string());
      fn(out);
    };
    write("spectrum.csv", [&](std::ostream& o) { emit_spectrum(o, rep.spectrum); });
    write("lambda_curve.csv", [&](std::ostream& o) { emit_lambda_curve(o, rep.lambda_curve); });
    write("rate_comparison.csv", [&](std::ostream& o) { emit_rate_comparison(o, rep); });
    write("tail_estimates.csv", [&](std::ostream& o) { emit_tail_estimates(o, rep); });
    write("rate_fits.csv", [&](std::ostream& o) { emit_rate_fits(o, rep); });
    write("report.txt", [&](std::ostream& o) { emit_report(o, rep); });
  }
  return rep;
}

void emit_spectrum(std::ostream& out, const SpectrumTable& table) {
  out << "q,T,T_over_1_minus_q\n";
  for (std::size_t i = 0; i < table.q.size(); ++i) {
    const bool at_one = std::abs(table.q[i] - 1.0) < 1e-12;
    out << format_number(table.q[i]) << ',' << format_number(table.T[i]) << ','
        << (at_one ? std::string("nan") : format_number(table.hp(i))) << '\n';
  }
}

void emit_lambda_curve(std::ostream& out, const std::vector<std::pair<double, double>>& curve) {
  out << "x,lambda_star\n";
  for (const auto& [x, v] : curve) out << format_number(x) << ',' << format_number(v) << '\n';
}

void emit_rate_comparison(std::ostream& out, const RunReport& report) {
  out << "eps,psi_plus,psi_minus,g1,g2,quadratic_floor_g1,quadratic_floor_g2,empirical_slope_ge,empirical_slope_le,"
         "verdict_ge,verdict_le\n";
  const double nan = std::nan("");
  for (const auto& r : report.rates) {
    out << format_number(r.eps) << ',' << format_number(r.psi_plus) << ',' << format_number(r.psi_minus) << ','
        << format_number(r.g1) << ',' << format_number(r.g2.value) << ',' << format_number(r.floor_g1) << ','
        << format_number(r.floor_g2) << ',' << format_number(r.measured ? r.slope_ge : nan) << ','
        << format_number(r.measured ? r.slope_le : nan) << ','
        << (r.measured ? (r.pass_ge ? "pass" : "fail") : "skip") << ','
        << (r.measured ? (r.pass_le ? "pass" : "fail") : "skip") << '\n';
  }
}

void emit_tail_estimates(std::ostream& out, const RunReport& report) {
  out << "kind,eps,a,r,threshold_exponent,hits,n,p_hat,ci_low,ci_high,censored,cap,invalid\n";
  const double nan = std::nan("");
  auto row = [&](const char* kind, double eps, double a, const TailEstimate& e) {
    out << kind << ',' << format_number(eps) << ',' << format_number(a) << ',' << format_number(e.r) << ','
        << format_number(e.threshold_exponent) << ',' << e.hits << ',' << e.n << ',' << format_number(e.p_hat) << ','
        << format_number(e.ci_low) << ',' << format_number(e.ci_high) << ',' << e.censored << ',' << e.cap << ','
        << (e.invalid ? 1 : 0) << '\n';
  };
  for (const auto& [eps, t] : report.slow_tails)
    for (const auto& e : t.estimates) row("slow", eps, nan, e);
  for (const auto& [eps, t] : report.fast_tails)
    for (const auto& e : t.estimates) row("fast", eps, nan, e);
  for (const auto& [eps, phi] : report.phi)
    for (std::size_t k = 0; k < phi.a.size(); ++k)
      for (const auto& e : phi.estimates[k]) row("phi", eps, phi.a[k], e);
}

void emit_rate_fits(std::ostream& out, const RunReport& report) {
  out << "kind,eps,a,slope,stderr,points_used,surrogate\n";
  const double nan = std::nan("");
  auto row = [&](const char* kind, double eps, double a, const RateFit& f) {
    out << kind << ',' << format_number(eps) << ',' << format_number(a) << ',' << format_number(f.slope) << ','
        << format_number(f.stderr_slope) << ',' << f.points.size() << ',' << (f.surrogate ? 1 : 0) << '\n';
  };
  for (const auto& [eps, t] : report.slow_tails) row("slow", eps, nan, t.fit);
  for (const auto& [eps, t] : report.fast_tails) row("fast", eps, nan, t.fit);
  for (const auto& [eps, phi] : report.phi)
    for (std::size_t k = 0; k < phi.a.size(); ++k) row("phi", eps, phi.a[k], phi.fits[k]);
}

void emit_report(std::ostream& out, const RunReport& report) {
  const auto& c = report.config;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(report.config_hash));
  out << "provenance\n";
  out << "  scenario: " << (c.name.empty() ? "(unnamed)" : c.name) << '\n';
  out << "  config_hash: fnv1a64:" << hash << '\n';
  out << "  seed: " << c.seed << '\n';
  out << "  version: " << kVersion << "\n\n";

  out << "measure\n";
  out << "  d_mu: " << format_number(report.d_mu) << '\n';
  out << "  lyapunov: " << format_number(report.lyapunov) << '\n';
  out << "  T''(1): " << format_number(report.spectrum.T2_at_1) << '\n';
  out << "  maximal_dimension: " << (report.maximal_dimension ? "yes" : "no") << '\n';
  if (report.maximal_dimension) {
    out << "  c: inf\n";
  } else {
    out << "  c (spectrum): " << format_number(report.curvature.from_spectrum) << '\n';
    out << "  c (variance): " << format_number(report.curvature.from_variance) << '\n';
  }
  out << "  support of Lambda*: [" << format_number(report.support.lo) << ", " << format_number(report.support.hi)
      << "]\n";
  if (!report.lambda_curve.empty()) {
    const auto low = std::min_element(report.lambda_curve.begin(), report.lambda_curve.end(),
                                      [](const auto& a, const auto& b) { return a.second < b.second; });
    out << "  Lambda* minimum on curve: " << format_number(low->second) << " at x = " << format_number(low->first)
        << '\n';
  }
  out << '\n';

  out << "verdicts\n";
  for (const auto& v : report.verdicts)
    out << "  " << (v.pass ? "PASS" : "FAIL") << "  " << v.predicate << ": " << format_number(v.lhs) << ' '
        << v.relation << ' ' << format_number(v.rhs) << '\n';
  out << "\nresult: " << (report.all_pass() ? "pass" : "fail") << '\n';
}

}  // namespace ldrt
