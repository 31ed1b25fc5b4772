#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ldrt/scenario.hpp"

using namespace ldrt;

#ifndef LDRT_SCENARIO_DIR
#define LDRT_SCENARIO_DIR "scenarios"
#endif

namespace {

const std::filesystem::path kScenarios{LDRT_SCENARIO_DIR};

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
[map]
branch = 0 1/2 2
branch = 1/2 1 2
[potential]
log_weights = 0.25 0.75
[run]
seed = 1
)";

}  // namespace

TEST_CASE("bundled scenarios round-trip") {
  for (const char* name : {"i1_lebesgue", "i2_bernoulli_quarter", "i3_unequal_slopes", "golden_mean_markov"}) {
    const auto c = load_scenario(kScenarios / (std::string(name) + ".cfg"));
    CHECK(c.name == name);
    const auto again = parse_scenario_text(serialize_scenario(c));
    CHECK(again == c);
    CHECK(serialize_scenario(again) == serialize_scenario(c));
  }
}

TEST_CASE("parsed values") {
  const auto c = load_scenario(kScenarios / "i2_bernoulli_quarter.cfg");
  CHECK(c.map.branches.size() == 2);
  CHECK(c.map.branches[1].lo == Rational(1, 2));
  CHECK(c.r_max == Rational(1, 256));
  CHECK(c.r_grid().size() == 7);
  CHECK(c.r_grid().back() == 1.0 / 16384);
  CHECK(c.mc_epsilons == std::vector{0.3});
  CHECK(c.seed == 42);

  const auto g = load_scenario(kScenarios / "golden_mean_markov.cfg");
  CHECK(g.map.transitions(1, 1) == 0);
  CHECK_FALSE(g.log_weights);
}

TEST_CASE("config errors name the line or field") {
  const std::string base = kMinimal;
  CHECK(error_of(base).empty());
  CHECK(error_of(base + "[sampling]\nr_min = 1/8\nr_max = 1/16\n").find("r_grid") != std::string::npos);
  CHECK(error_of(base + "[bogus]\n").find("line 9") != std::string::npos);
  CHECK(error_of(base + "[run]\ncolour = red\n").find("unknown key 'colour'") != std::string::npos);
  CHECK(error_of(base + "[spectrum]\nstep = 0\n").find("spectrum.step") != std::string::npos);
  CHECK(error_of(base + "[sampling]\nn_per_r = 0\n").find("n_per_r") != std::string::npos);
  CHECK(error_of(base + "[spectrum]\nq_min = x\n").find("line 10") != std::string::npos);

  std::string no_seed = kMinimal;
  no_seed.replace(no_seed.find("seed = 1"), 8, "");
  CHECK(error_of(no_seed).find("seed") != std::string::npos);
}

TEST_CASE("number formatting and hashing") {
  CHECK(format_number(1.0 / 3) == "0.333333333333");
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(-0.0) == "0");
  CHECK(fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("maximal-dimension report") {
  auto c = load_scenario(kScenarios / "i1_lebesgue.cfg");
  const auto r = run_scenario(c, {.write_files = false});
  CHECK(r.maximal_dimension);
  CHECK(r.all_pass());
  std::size_t finite = 0;
  for (const auto& [x, v] : r.lambda_curve)
    if (std::isfinite(v)) {
      ++finite;
      CHECK(x == doctest::Approx(-1.0).epsilon(1e-12));
      CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
  CHECK(finite == 1);
  for (const auto& row : r.rates) {
    CHECK(row.g1 == row.eps);
    if (row.eps == 0) CHECK((row.psi_plus == 0 && row.g2.value == 0 && row.floor_g1 == 0 && row.floor_g2 == 0));
  }
  std::ostringstream report;
  emit_report(report, r);
  CHECK(report.str().find("maximal_dimension: yes") != std::string::npos);
  std::ostringstream table;
  emit_rate_comparison(table, r);
  CHECK(table.str().find(",inf,inf,") != std::string::npos);
}

TEST_CASE("lambda curve of I2") {
  auto c = load_scenario(kScenarios / "i2_bernoulli_quarter.cfg");
  c.mc_epsilons.clear();
  c.lambda_points = 2001;
  const auto r = run_scenario(c, {.write_files = false});
  const auto low = std::min_element(r.lambda_curve.begin(), r.lambda_curve.end(),
                                    [](const auto& a, const auto& b) { return a.second < b.second; });
  CHECK(low->first == doctest::Approx(-0.8113).epsilon(1e-3));
  CHECK(low->second < 1e-5);
  CHECK(r.lambda_curve.front().second == kInf);
  CHECK(r.lambda_curve.back().second == kInf);
}

TEST_CASE("verdicts follow the exponent rules") {
  auto c = load_scenario(kScenarios / "i2_bernoulli_quarter.cfg");
  c.r_max = Rational(1, 64);
  c.r_min = Rational(1, 256);
  c.n_per_r = 800;
  c.epsilons = {0.3};
  const auto r = run_scenario(c, {.write_files = false});
  REQUIRE(r.rates.size() == 1);
  const auto& row = r.rates[0];
  CHECK(row.measured);
  CHECK(row.pass_ge == (row.slope_ge >= row.g1 - 0.1));
  CHECK(row.pass_le == (row.slope_le >= row.g2.value - 0.1));
  std::ostringstream out;
  emit_rate_comparison(out, r);
  CHECK(out.str().find(row.pass_ge ? ",pass," : ",fail,") != std::string::npos);
}
