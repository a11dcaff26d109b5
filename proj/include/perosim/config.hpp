#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "perosim/device.hpp"
#include "perosim/solver.hpp"

namespace perosim {

enum class ScenarioKind { EquilibriumDecay, Transient, StationarySweep, UniquenessProbe, ConvergenceStudy, AxiomCheck };

std::string to_string(ScenarioKind k);

/// Syntax error in a config file, with 1-based line and column.
class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

struct ScenarioSpec {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::Transient;
  std::filesystem::path source;  ///< config file (empty for in-memory specs)
  DeviceConfig device;
  SolverConfig solver;

  double T = 1.0;
  std::vector<double> dt_sweep;         ///< equilibrium_decay: fixed steps to run
  std::vector<double> biases;           ///< stationary_sweep
  int perturbations = 3;                ///< uniqueness_probe runs
  bool vary_paths = true;
  std::uint64_t seed = 0;
  std::vector<std::string> studies{"poisson", "temporal"};  ///< convergence_study parts
  int levels = 3;
  std::vector<int> poisson_cells{16, 32, 64};
  std::vector<int> refinement_factors{1, 2, 4};
  std::vector<double> gradient_q{2.25, 2.5, 3.0};
  double study_dt = 0.1;  ///< coarsest dt of the temporal study
  double study_T = 0;     ///< horizon of the temporal study (0: T)
  double axiom_from = -30, axiom_to = 30;
  int axiom_points = 61;
  std::string output;  ///< output subdirectory (default: name)
};

/// One documented config key. `pointer` uses "*" for array elements and
/// free-form map keys.
struct SchemaEntry {
  std::string pointer;
  std::string symbol;  ///< model symbol the key sets
  std::string doc;
};
const std::vector<SchemaEntry>& config_schema();

/// Reads, checks against the schema and validates. Throws ConfigParseError
/// for syntax errors and ValidationError (field = JSON pointer) otherwise.
ScenarioSpec parse_config(const std::filesystem::path& path);
ScenarioSpec parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});

/// Fully resolved configuration (defaults filled) plus a physical-units echo
/// when scaling factors are present.
nlohmann::json resolved_config(const ScenarioSpec& spec);

}  // namespace perosim
