#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "perosim/diagnostics.hpp"
#include "perosim/solver.hpp"
#include "perosim/statistics.hpp"

namespace perosim {

/// Provenance written at the top of every CSV. The first line carries the
/// wall-clock timestamp and is the only line that differs between reruns.
struct OutputHeader {
  std::string scenario;
  std::uint64_t seed = 0;
  bool timestamp = true;
};

/// One row per report:
///   t, dt, free_energy, residual, newton_iterations, max_phi_gap,
///   energy_increase, mass_drift, bounds_breach,
///   then per species <id>_mass, <id>_min, <id>_max, <id>_margin, <id>_balance,
///   then grad_q<q> for each recorded exponent.
std::string diagnostics_csv(const std::vector<DiagnosticsReport>& reports, const OutputHeader& header);

/// Columns: study, level, h, dt, error, order (empty when undefined).
std::string study_csv(const std::vector<std::pair<std::string, ConvergenceResult>>& studies,
                      const OutputHeader& header);

/// Columns: statistics, axiom, z, pass, value.
std::string axioms_csv(const std::vector<AxiomReport>& reports, const OutputHeader& header);

/// Columns: bias, then current_<contact> per contact.
std::string iv_csv(const Device& d, const std::vector<SweepPoint>& sweep, const OutputHeader& header);

/// Fields available in a nodal profile.
std::vector<std::string> profile_fields(const Device& d);

/// Nodal values of `fields` at the snapshot time, one row per node in
/// row-major order (k = i + (nx+1) j). Field names: x, y (2D), psi,
/// phi_<id>, u_<id>, G, R. Cells outside a species region are empty.
/// Throws ValidationError on an unknown field.
std::string emit_profile(const Device& d, const State& s, const std::vector<std::string>& fields,
                         const OutputHeader& header);

/// Text checkpoint, every number with 17 significant digits.
std::string checkpoint_text(const Device& d, const State& s);
/// Parses a checkpoint for `d`. Throws ValidationError on a malformed file,
/// an unsupported version or a device hash mismatch.
State parse_checkpoint(const Device& d, const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Device& d, const State& s);
State load_checkpoint(const std::filesystem::path& path, const Device& d);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

/// printf-style %.17g.
std::string fmt17(double v);

}  // namespace perosim
