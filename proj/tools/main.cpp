#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "ldrt/acceptance.hpp"
#include "ldrt/rates.hpp"
#include "ldrt/scenario.hpp"

using namespace ldrt;

namespace {

int cmd_run(const std::string& path, const std::optional<std::uint64_t>& seed, const std::optional<unsigned>& workers,
            const std::optional<std::string>& out) {
  ScenarioConfig config = load_scenario(path);
  if (seed) {
    config.seed = *seed;
    config.seed_set = true;
  }
  if (workers) config.workers = *workers;
  if (out) config.output_dir = *out;
  const RunReport report = run_scenario(config);
  emit_report(std::cout, report);
  return report.all_pass() ? 0 : 1;
}

int cmd_spectrum(const std::string& path, double q_min, double q_max, double step) {
  const ScenarioConfig config = load_scenario(path);
  const MarkovMap map = scenario_map(config);
  const GibbsMeasure gibbs = scenario_gibbs(config, map);
  emit_spectrum(std::cout, compute_spectrum(gibbs, q_min, q_max, step));
  return 0;
}

int cmd_lambda_curve(const std::string& path, double x_min, double x_max, std::size_t points) {
  const ScenarioConfig config = load_scenario(path);
  const MarkovMap map = scenario_map(config);
  const GibbsMeasure gibbs = scenario_gibbs(config, map);
  emit_lambda_curve(std::cout, lambda_curve(rate_profile(gibbs), x_min, x_max, points));
  return 0;
}

int cmd_verify(const std::string& path) {
  const ScenarioConfig config = load_scenario(path);
  bool ok = true;
  for (const auto& r : verify_scenario(config)) {
    std::cout << format_result(r) << '\n';
    ok = ok && r.pass;
  }
  std::cout << (ok ? "verify: pass" : "verify: fail") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation rates of return times for piecewise-linear Markov maps"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  auto* run = app.add_subcommand("run", "Run a scenario and write its output files");
  run->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed (overrides the file)");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "Output directory");

  double q_min = -5, q_max = 5, q_step = 0.25;
  auto* spectrum = app.add_subcommand("spectrum", "Print the T(q) table as CSV");
  spectrum->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--q-min", q_min);
  spectrum->add_option("--q-max", q_max);
  spectrum->add_option("--step", q_step)->check(CLI::PositiveNumber);

  double x_min = -2, x_max = 0;
  std::size_t points = 201;
  auto* curve = app.add_subcommand("lambda-curve", "Print (x, Lambda*(x)) as CSV");
  curve->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  curve->add_option("--x-min", x_min)->required();
  curve->add_option("--x-max", x_max)->required();
  curve->add_option("--points", points)->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));

  auto* verify = app.add_subcommand("verify", "Check the scenario against the acceptance predicates");
  verify->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config, seed, workers, out);
    if (*spectrum) return cmd_spectrum(config, q_min, q_max, q_step);
    if (*curve) return cmd_lambda_curve(config, x_min, x_max, points);
    if (*verify) return cmd_verify(config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
