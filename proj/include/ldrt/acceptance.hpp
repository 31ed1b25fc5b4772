#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ldrt/scenario.hpp"

namespace ldrt {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::filesystem::path scenario_dir = "scenarios";
  /// CLI executable used by the determinism criterion; empty skips to a failure.
  std::filesystem::path cli;
  std::filesystem::path work_dir = std::filesystem::temp_directory_path() / "ldrt_acceptance";
  std::uint64_t seed = 42;
  unsigned workers = 1;
  std::vector<int> only;  // empty runs all
};

/// Runs the numbered criteria in order; `report` sees each result as it completes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& report = {});

/// Scenario-local checks: Moran oracle (full branches only), spectrum identities,
/// Lambda* normalization, psi positivity, curvature routes and the run verdicts.
std::vector<CriterionResult> verify_scenario(const ScenarioConfig& config);

/// "PASS [n] title: detail (1.23 s)".
std::string format_result(const CriterionResult& result);

}  // namespace ldrt
