#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ldrt/core.hpp"
#include "ldrt/dynamics.hpp"
#include "ldrt/mc_lab.hpp"
#include "ldrt/rates.hpp"
#include "ldrt/thermo.hpp"

namespace ldrt {

inline constexpr const char* kVersion = "0.3.0";

/// Scenario file. Grammar (one statement per line, '#' starts a comment):
///
///   [section]
///   key = value
///
/// Sections and keys:
///   [map]        branch = lo hi slope [image_lo image_hi]   (repeatable, in order)
///                transition = 1 1; 1 0                       (rows separated by ';', optional)
///   [potential]  log_weights = p_1 ... p_m  |  values = z_1 ... z_m
///   [spectrum]   q_min, q_max, step
///   [rates]      epsilons = e_1 ...   lambda_points = n
///   [sampling]   epsilons = e_1 ...   r_max, r_min, ratio, n_per_r, cap_factor,
///                n_centers, n_inner, phi_a = a_1 ...
///   [constants]  C, a0, d2, kappa
///   [run]        name, seed, workers, output_dir
///
/// Numbers may be written as p/q fractions.
struct ScenarioConfig {
  std::string name;
  MarkovMapSpec map;
  bool log_weights = true;
  std::vector<double> potential;

  double q_min = -5.0, q_max = 5.0, q_step = 0.25;

  std::vector<double> epsilons{0.05, 0.1, 0.2, 0.3};
  std::size_t lambda_points = 201;

  std::vector<double> mc_epsilons;
  Rational r_max{1, 256}, r_min{1, 16384}, r_ratio{1, 2};
  std::size_t n_per_r = 10000;
  double cap_factor = 10.0;
  std::size_t n_centers = 200;
  std::size_t n_inner = 2000;
  std::vector<double> phi_a;

  double C = 1.0, a0 = 0.05, d2 = 0.5, kappa = 0.9;

  std::uint64_t seed = 0;
  bool seed_set = false;
  unsigned workers = 1;
  std::string output_dir = "out";

  /// r_max, r_max * ratio, ... down to r_min inclusive.
  std::vector<double> r_grid() const;
  bool operator==(const ScenarioConfig&) const;
};

/// Throws Error(Config) naming the line or the field.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const ScenarioConfig& config);
void validate(const ScenarioConfig& config);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

/// Fixed 12 significant digits; "inf", "-inf", "nan" for the specials.
std::string format_number(double x);

struct Verdict {
  std::string predicate;
  double lhs = 0.0;
  std::string relation;
  double rhs = 0.0;
  bool pass = false;
};

struct RateRow {
  double eps = 0.0;
  double psi_plus = 0.0, psi_minus = 0.0;
  double g1 = 0.0;
  G2Result g2;
  double floor_g1 = 0.0, floor_g2 = 0.0;
  bool measured = false;
  double slope_ge = 0.0, slope_le = 0.0;
  double stderr_ge = 0.0, stderr_le = 0.0;
  double bound_le = 0.0;  // theoretical bound the fast exponent is held to
  bool pass_ge = false, pass_le = false;
};

struct RunReport {
  ScenarioConfig config;
  SpectrumTable spectrum;
  double d_mu = 0.0;
  double lyapunov = 0.0;
  Curvature curvature;
  bool maximal_dimension = false;
  Interval<double> support{};
  std::vector<std::pair<double, double>> lambda_curve;
  std::vector<RateRow> rates;
  std::vector<std::pair<double, TailResult>> slow_tails, fast_tails;
  std::vector<std::pair<double, PhiResult>> phi;
  std::vector<Verdict> verdicts;
  std::uint64_t config_hash = 0;

  bool all_pass() const;
};

struct RunOptions {
  bool write_files = true;
};

RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Evenly spaced x grid over [x_min, x_max] with the Lambda* value at each point.
std::vector<std::pair<double, double>> lambda_curve(const RateProfile& profile, double x_min, double x_max,
                                                    std::size_t points);

void emit_lambda_curve(std::ostream& out, const std::vector<std::pair<double, double>>& curve);
void emit_spectrum(std::ostream& out, const SpectrumTable& table);
void emit_rate_comparison(std::ostream& out, const RunReport& report);
void emit_tail_estimates(std::ostream& out, const RunReport& report);
void emit_rate_fits(std::ostream& out, const RunReport& report);
void emit_report(std::ostream& out, const RunReport& report);

/// Map and Gibbs measure of a scenario.
MarkovMap scenario_map(const ScenarioConfig& config);
GibbsMeasure scenario_gibbs(const ScenarioConfig& config, const MarkovMap& map);

}  // namespace ldrt
