#include <iostream>

#include <CLI11.hpp>

#include "ldrt/acceptance.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  ldrt::AcceptanceOptions opt;
  app.add_option("--scenarios", opt.scenario_dir, "Directory with the bundled scenarios")->check(CLI::ExistingDirectory);
  app.add_option("--cli", opt.cli, "Path to the ldrt executable");
  app.add_option("--work-dir", opt.work_dir, "Scratch directory");
  app.add_option("--workers", opt.workers, "Worker threads for the sampling criteria");
  app.add_option("--only", opt.only, "Criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  std::size_t failed = 0;
  const auto results = ldrt::run_acceptance(opt, [&](const ldrt::CriterionResult& r) {
    std::cout << ldrt::format_result(r) << std::endl;
    failed += !r.pass;
  });
  std::cout << results.size() - failed << "/" << results.size() << " criteria pass" << std::endl;
  return failed == 0 ? 0 : 1;
}
