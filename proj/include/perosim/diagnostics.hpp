#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perosim/assembly.hpp"

namespace perosim {

struct SolverConfig;

struct DiagnosticsTolerances {
  double energy_increase = 1e-10;  ///< relative to max(1, |Psi|)
  double mass_drift = 1e-12;       ///< relative vacancy mass change
  double balance = 1e-10;          ///< electron/hole bookkeeping defect per step
};

struct SpeciesDiagnostics {
  std::string id;
  double mass = 0;
  double min = 0, max = 0;
  double margin = 0;  ///< min distance to the range limits (0 and N/gamma)
  double balance_defect = 0;
};

struct DiagnosticsReport {
  double t = 0;
  double dt = 0;
  double free_energy = 0;
  std::vector<SpeciesDiagnostics> species;
  double max_phi_gap = 0;  ///< max |phi_n - phi_p|
  double residual = 0;
  int newton_iterations = 0;
  bool energy_increase = false;
  bool mass_drift = false;
  bool bounds_breach = false;
  std::map<double, double> gradient_norms;  ///< q -> ||grad u||_{L^q} (first vacancy or electron)
};

/// Discrete Psi: electrostatic edge energy of psi - psi^D plus chemical
/// energies vol * Phi_i(u_i) with Phi_i the exact antiderivative relative to
/// the Dirichlet reference v_i^D.
double free_energy(const Device& d, const State& s);
/// Chemical energy density Phi(u) = u (v - vD) - N (A(v + zeta) - A(vD + zeta)).
double chemical_energy_density(const ShiftedStatistics& st, double u, double v_ref);

double species_mass(const Device& d, const State& s, int species);

struct BoundsEntry {
  std::string id;
  double min = 0, max = 0, margin = 0;
  bool breach = false;
};
std::vector<BoundsEntry> bounds_report(const Device& d, const State& s);

/// (sum_edges w_e |du / d_e|^q)^{1/q} with w_e = face * length / dim, weights
/// summing to the measure of the species region.
double gradient_norm(const Device& d, const State& s, int species, double q);

/// Maximum of |phi_n - phi_p| over nodes (0 without both carriers).
double max_quasi_fermi_gap(const Device& d, const State& s);

/// Whether the device has Dirichlet data compatible with thermodynamic
/// equilibrium (constant psi^D and phi^D, time independent) and G = 0.
bool equilibrium_conditions(const Device& d);

/// Report for state `s`; `prev` / `old` give the previous report and state
/// for the flags and the balance defects (may be null for the first state).
/// `initial_masses` are the species masses of the first state of the run.
DiagnosticsReport make_report(const Device& d, const State& s, const State* old, const DiagnosticsReport* prev,
                              const std::vector<double>& initial_masses, double dt, double residual,
                              int newton_iterations, FluxScheme scheme, const DiagnosticsTolerances& tol = {});

struct EnergyDecayResult {
  bool pass = true;
  bool equilibrium_mode = true;
  double worst_increase = 0;     ///< largest Psi_{k+1} - Psi_k (may be negative)
  double worst_relative = 0;     ///< that increase over max(1, |Psi_k|)
  double growth_constant = 0;    ///< general mode: fitted c in Psi <= (Psi0 + c) e^{ct}
};
EnergyDecayResult energy_decay_check(const std::vector<DiagnosticsReport>& reports, bool equilibrium_mode,
                                     double tolerance = 1e-10);

/// Empirical constant of the lower bound
///   |u_n|_1 + |u_p|_1 + sum |u_i|_1 + |psi|_{H^1}^2 <= c (1 + Psi).
double psi_lower_bound_constant(const Device& d, const State& s);

struct StudyRow {
  int level = 0;
  double h = 0;
  double dt = 0;
  double error = 0;
  double order = 0;  ///< NaN on the first row or when undefined
  bool order_defined = false;
};

struct ConvergenceResult {
  std::vector<StudyRow> rows;
  std::vector<double> orders;  ///< observed orders between consecutive levels
  bool undefined = false;      ///< some order could not be computed (zero errors)
};

/// Orders from errors against an exact reference: errors e_k at sizes h_k.
ConvergenceResult orders_from_errors(const std::vector<double>& h, const std::vector<double>& dt,
                                     const std::vector<double>& errors);
/// Orders without an exact solution: successive differences of a scalar or
/// field quantity sampled at nested resolutions (ratio 2).
ConvergenceResult orders_from_differences(const std::vector<double>& h, const std::vector<double>& dt,
                                          const std::vector<double>& differences);

/// 1D Poisson with C(x) = pi^2 sin(pi x), eps = 1, psi^D = 0 on [0,1]; the
/// exact solution is sin(pi x). Returns the max nodal error per level.
ConvergenceResult poisson_manufactured_study(const std::vector<int>& cells);

/// Backward Euler dt-halving on a smooth transient of `device`, comparing
/// final states; order from successive differences.
ConvergenceResult temporal_study(const Device& device, double T, const std::vector<double>& dts,
                                 const SolverConfig& config);

/// Convergence on an arbitrary scenario: `solve(level)` returns a scalar
/// quantity at refinement level `level` (h halves per level).
ConvergenceResult spatial_study(const std::function<double(int level, double& h)>& solve, int levels);

struct RegularityLevel {
  int factor = 1;
  double h = 0;
  std::map<std::string, std::map<double, double>> norms;  ///< species -> q -> norm
};
struct RegularityResult {
  std::vector<RegularityLevel> levels;
  double max_ratio = 0;  ///< largest norm(level k+1) / norm(level k)
  bool changes_decreasing = true;  ///< successive relative changes shrink
  bool pass = false;     ///< no growth by more than 2 between levels
};
/// Gradient norms of every species of the stationary state of `base` refined
/// by each factor in turn.
RegularityResult regularity_probe(const Device& base, const SolverConfig& config, const std::vector<int>& factors,
                                  const std::vector<double>& qs);

}  // namespace perosim
