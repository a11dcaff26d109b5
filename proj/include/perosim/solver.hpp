#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perosim/assembly.hpp"
#include "perosim/diagnostics.hpp"
#include "perosim/errors.hpp"

namespace perosim {

struct SolverConfig {
  double newton_tol = 1e-10;  ///< residual 2-norm
  double step_tol = 1e-9;     ///< max-norm of the last Newton update
  int max_newton_iters = 50;
  int max_halvings = 10;      ///< line search factors 1, 1/2, ..., 2^-max_halvings
  double density_safeguard = 0.9;
  double damping_cap = 1.0;   ///< largest line-search factor in the first iterations
  int damped_iterations = 0;  ///< how many iterations the cap applies to (0 = all)

  double dt_initial = 1e-3;
  double dt_min = 1e-10;
  double dt_max = 1.0;
  double dt_grow = 1.5;
  double dt_shrink = 0.5;
  int grow_after = 3;
  bool adaptive = true;       ///< false: fixed dt_initial (except the final clip)

  bool gummel = false;
  double gummel_tol = 1e-8;
  int gummel_max_iters = 200;
  std::vector<std::string> gummel_order;  ///< species ids; empty = roster order

  FluxScheme scheme = FluxScheme::ExcessChemicalPotential;
  bool keep_states = true;
  DiagnosticsTolerances tolerances;

  /// Multiplicative noise on the Newton initial guess (uniqueness probe).
  double guess_noise = 0;
  std::uint64_t guess_seed = 0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;  ///< all accepted states, or first and last only
  std::vector<DiagnosticsReport> reports;
  std::vector<double> dts;
  int rejected_steps = 0;
  bool aborted = false;
  std::string abort_reason;
};

/// Thrown when the time step falls below dt_min; carries what was computed.
class TransientAbort : public StepFailure {
 public:
  TransientAbort(const std::string& what, Trajectory partial, State last_attempt)
      : StepFailure(what), partial_(std::move(partial)), last_(std::move(last_attempt)) {}
  const Trajectory& partial() const { return partial_; }
  const State& last_attempt() const { return last_; }

 private:
  Trajectory partial_;
  State last_;
};

struct NewtonStats {
  int iterations = 0;
  double residual = 0;
  std::vector<double> history;  ///< residual 2-norm per iterate
};

/// One backward Euler step from `old` to old.t + dt (dt = infinity for the
/// stationary system). Throws NewtonDiverged or BoundsBreach.
State solve_step(const Device& d, const State& old, double dt, const SolverConfig& config,
                 NewtonStats* stats = nullptr, const State* guess = nullptr);

/// Transient on [0, T] from `initial` (default: initial_state(d)). When
/// `grid` is given the step sequence is replayed exactly (failed steps are
/// sub-stepped internally); otherwise dt adapts.
Trajectory run_transient(const Device& d, double T, const SolverConfig& config,
                         const std::optional<State>& initial = std::nullopt,
                         const std::vector<double>* grid = nullptr);

/// Stationary state at `bias` by pseudo-transient continuation from the
/// initial data. Vacancy masses are those of the initial data (or `start`).
State solve_stationary(const Device& d, const SolverConfig& config, double bias,
                       const std::optional<State>& start = std::nullopt);

struct SweepPoint {
  double bias = 0;
  std::vector<double> currents;  ///< per contact
  State state;
};
std::vector<SweepPoint> bias_sweep(const Device& d, const SolverConfig& config, const std::vector<double>& biases);

struct ProbeRun {
  int index = 0;
  std::string description;
  bool failed = false;
  std::string failure;
};

struct ProbeResult {
  double max_discrepancy = 0;
  double threshold = 0;  ///< 10 newton_tol
  std::vector<ProbeRun> runs;
  std::vector<double> times;
  bool failed = false;
  Trajectory reference;  ///< run 0, whose time grid the others replay
  bool pass() const { return !failed && max_discrepancy <= threshold; }
};

/// Runs the transient `n` times with different solver paths (guess noise,
/// damping caps, Gummel with permuted order) on the time grid of the first
/// run and returns the largest L-infinity difference between any two runs.
/// With vary_paths = false every run uses the same configuration.
ProbeResult uniqueness_probe(const Device& d, double T, const SolverConfig& config, int n, std::uint64_t seed,
                             bool vary_paths = true);

/// Largest absolute difference over all unknowns.
double state_distance(const State& a, const State& b);

}  // namespace perosim
