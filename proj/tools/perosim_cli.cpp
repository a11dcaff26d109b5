// perosim command line: one scenario per invocation.
#include <iostream>

#include <CLI11.hpp>

#include "perosim/config.hpp"
#include "perosim/errors.hpp"
#include "perosim/scenario.hpp"

namespace {

int run(perosim::ScenarioSpec spec) {
  const auto out = perosim::run_scenario(spec, perosim::output_root(), &std::cerr);
  std::cout << out.verdict.dump(2) << "\n";
  std::cerr << "artifacts in " << out.directory.string() << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-diffusion solver for perovskite devices with vacancy migration"};
  app.require_subcommand(1);
  app.footer(
      "Output root: $PEROSIM_OUTPUT_ROOT (default ./perosim-output).\n"
      "Exit codes: 0 ok, 2 invariant failure, 3 solver abort, 4 config error.");

  std::string config;
  int n = 3, levels = 3;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto* simulate = app.add_subcommand("simulate", "run the scenario kind named in the config");
  simulate->add_option("config", config, "scenario file")->required();

  auto* axioms = app.add_subcommand("check-axioms", "check the statistics axioms on a z grid");
  axioms->add_option("config", config, "scenario file")->required();

  auto* sweep = app.add_subcommand("sweep", "stationary bias sweep with terminal currents");
  sweep->add_option("config", config, "scenario file")->required();

  auto* probe = app.add_subcommand("probe-uniqueness", "compare transients computed along different solver paths");
  probe->add_option("config", config, "scenario file")->required();
  probe->add_option("--n", n, "number of solver paths")->check(CLI::Range(2, 64));
  auto* seed_opt = probe->add_option("--seed", seed, "RNG seed");

  auto* study = app.add_subcommand("study", "convergence study");
  study->add_option("config", config, "scenario file")->required();
  study->add_option("--levels", levels, "refinement levels")->check(CLI::Range(3, 12));

  CLI11_PARSE(app, argc, argv);
  seed_given = seed_opt->count() > 0;

  perosim::ScenarioSpec spec;
  try {
    spec = perosim::parse_config(config);
    if (*axioms) spec.kind = perosim::ScenarioKind::AxiomCheck;
    if (*sweep) {
      spec.kind = perosim::ScenarioKind::StationarySweep;
      if (spec.biases.empty()) throw perosim::ValidationError("/scenario/biases", "a sweep needs at least one bias");
    }
    if (*probe) {
      spec.kind = perosim::ScenarioKind::UniquenessProbe;
      spec.perturbations = n;
      if (seed_given) spec.seed = seed;
    }
    if (*study) {
      spec.kind = perosim::ScenarioKind::ConvergenceStudy;
      spec.levels = levels;
    }
  } catch (const perosim::ConfigParseError& e) {
    std::cerr << config << ": " << e.what() << "\n";
    return perosim::kExitConfig;
  } catch (const perosim::ValidationError& e) {
    std::cerr << config << ": " << e.what() << "\n";
    return perosim::kExitConfig;
  }

  try {
    return run(std::move(spec));
  } catch (const perosim::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return perosim::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return perosim::kExitSolverAbort;
  }
}
