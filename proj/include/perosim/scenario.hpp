#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "perosim/config.hpp"

namespace perosim {

enum ExitCode : int { kExitOk = 0, kExitInvariant = 2, kExitSolverAbort = 3, kExitConfig = 4 };

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::filesystem::path directory;  ///< where the artifacts went
  nlohmann::json verdict;
};

/// $PEROSIM_OUTPUT_ROOT, or ./perosim-output when unset.
std::filesystem::path output_root();

/// Runs the scenario and writes below root / spec.output:
///   resolved_config.json, verdict.json, diagnostics*.csv (trajectories),
///   final.ckpt or abort.ckpt, profile.csv, and per kind iv.csv,
///   orders.csv or axioms.csv. Progress lines go to `log` when given.
/// The verdict lists every evaluated invariant once under "invariants".
ScenarioOutcome run_scenario(const ScenarioSpec& spec, const std::filesystem::path& root, std::ostream* log = nullptr);

}  // namespace perosim
