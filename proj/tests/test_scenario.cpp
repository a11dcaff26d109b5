#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "perosim/scenario.hpp"
#include "support.hpp"

using namespace perosim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / "perosim_test_scenarios" / name;
  fs::remove_all(p);
  return p;
}

ScenarioSpec small_transient() {
  ScenarioSpec s;
  s.name = "small";
  s.kind = ScenarioKind::Transient;
  s.device = testing::pin_small(6, true);
  s.T = 0.2;
  return s;
}

int count_rows(const fs::path& csv) {
  std::ifstream in(csv);
  int n = 0;
  for (std::string l; std::getline(in, l);)
    if (!l.empty() && l[0] != '#') ++n;
  return n - 1;  // header
}

}  // namespace

TEST_CASE("a transient writes all artifacts and a passing verdict") {
  const auto root = scratch("transient");
  const auto out = run_scenario(small_transient(), root);
  CHECK(out.exit_code == kExitOk);
  for (const char* f : {"resolved_config.json", "verdict.json", "diagnostics.csv", "final.ckpt", "profile.csv"})
    CHECK(fs::exists(out.directory / f));
  const auto& inv = out.verdict["invariants"];
  for (const char* name : {"energy_decay", "mass_conservation", "carrier_balance", "bounds"}) {
    CAPTURE(name);
    CHECK(inv.contains(name));
  }
  CHECK(inv.size() == 4);
  CHECK(out.verdict["status"] == "ok");
}

TEST_CASE("a failed invariant gives exit code 2") {
  auto spec = small_transient();
  spec.solver.tolerances.balance = 0.0;
  spec.solver.tolerances.mass_drift = 0.0;
  const auto out = run_scenario(spec, scratch("invariant"));
  CHECK(out.exit_code == kExitInvariant);
}

TEST_CASE("a solver abort gives exit code 3 and an abort checkpoint") {
  auto spec = small_transient();
  spec.device.contacts[1].psi = 40.0;
  spec.solver.max_newton_iters = 2;
  spec.solver.dt_initial = 0.1;
  spec.solver.dt_min = 0.05;
  const auto out = run_scenario(spec, scratch("abort"));
  CHECK(out.exit_code == kExitSolverAbort);
  CHECK(fs::exists(out.directory / "abort.ckpt"));
  CHECK(out.verdict["status"] == "solver_abort");
}

TEST_CASE("the uniqueness probe reports its discrepancy") {
  auto spec = small_transient();
  spec.kind = ScenarioKind::UniquenessProbe;
  spec.perturbations = 3;
  const auto out = run_scenario(spec, scratch("probe"));
  CHECK(out.exit_code == kExitOk);
  CHECK(out.verdict["invariants"].contains("uniqueness"));
  CHECK(out.verdict["invariants"]["uniqueness"].contains("max_discrepancy"));
}

TEST_CASE("a convergence study writes its orders") {
  auto spec = small_transient();
  spec.kind = ScenarioKind::ConvergenceStudy;
  spec.device = testing::bulk_np(16);
  spec.studies = {"poisson", "temporal"};
  spec.poisson_cells = {8, 16, 32};
  spec.study_dt = 0.05;
  const auto out = run_scenario(spec, scratch("study"));
  CHECK(out.exit_code == kExitOk);
  CHECK(count_rows(out.directory / "orders.csv") >= 4);
}

TEST_CASE("the command line maps config errors to exit code 4") {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{ \"scenario\": { \"nmae\": 1 } }";
  const std::string cmd = std::string(PEROSIM_CLI) + " simulate " + (dir / "bad.json").string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 4);
}
