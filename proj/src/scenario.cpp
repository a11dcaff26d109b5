#include "perosim/scenario.hpp"

#include <cmath>
#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>

#include "perosim/errors.hpp"
#include "perosim/io.hpp"

namespace perosim {
namespace {

using json = nlohmann::json;

// Accumulates the trajectory invariants over one or more runs.
struct TrajectoryChecks {
  bool energy_ok = true, equilibrium_mode = true;
  double energy_worst_relative = -INFINITY, growth_constant = 0;
  double mass_drift = 0;
  bool mass_flag = false;
  double balance = 0;
  bool bounds_flag = false;
  double min_margin = INFINITY;
  double lower_bound_constant = 0;
  double tol_balance = 1e-10, tol_mass = 1e-12;

  void add(const Device& d, const Trajectory& tr, const SolverConfig& cfg) {
    tol_balance = cfg.tolerances.balance;
    tol_mass = cfg.tolerances.mass_drift;
    if (tr.reports.empty()) return;
    equilibrium_mode = equilibrium_mode && equilibrium_conditions(d);
    const auto e = energy_decay_check(tr.reports, equilibrium_conditions(d), cfg.tolerances.energy_increase);
    energy_ok = energy_ok && e.pass;
    energy_worst_relative = std::max(energy_worst_relative, e.worst_relative);
    growth_constant = std::max(growth_constant, e.growth_constant);

    const auto& first = tr.reports.front();
    for (const auto& r : tr.reports) {
      mass_flag = mass_flag || r.mass_drift;
      bounds_flag = bounds_flag || r.bounds_breach;
      for (std::size_t i = 0; i < r.species.size(); ++i) {
        const auto& sp = d.species()[i];
        min_margin = std::min(min_margin, r.species[i].margin);
        if (sp.role == SpeciesRole::Vacancy) {
          const double m0 = first.species[i].mass;
          mass_drift = std::max(mass_drift, std::abs(r.species[i].mass - m0) / std::max(std::abs(m0), 1e-300));
        } else {
          balance = std::max(balance, std::abs(r.species[i].balance_defect));
        }
      }
    }
    if (!tr.states.empty())
      lower_bound_constant = std::max(lower_bound_constant, psi_lower_bound_constant(d, tr.states.back()));
  }

  bool balance_ok() const { return balance <= tol_balance; }

  void write(json& inv) const {
    inv["energy_decay"] = {{"pass", energy_ok},
                           {"mode", equilibrium_mode ? "equilibrium" : "general"},
                           {"worst_relative_increase", energy_worst_relative},
                           {"growth_constant", growth_constant}};
    inv["mass_conservation"] = {{"pass", !mass_flag && mass_drift <= tol_mass},
                                {"max_relative_drift", mass_drift},
                                {"tolerance", tol_mass}};
    inv["carrier_balance"] = {{"pass", balance_ok()}, {"max_defect", balance}, {"tolerance", tol_balance}};
    inv["bounds"] = {{"pass", !bounds_flag}, {"min_margin", min_margin}};
  }
};

bool all_pass(const json& inv) {
  for (const auto& [k, v] : inv.items())
    if (!v.at("pass").get<bool>()) return false;
  return true;
}

OutputHeader header_for(const ScenarioSpec& spec) { return {spec.name, spec.seed, true}; }

std::string dt_tag(double dt) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", dt);
  return buf;
}

struct Context {
  const ScenarioSpec& spec;
  const Device* device;
  std::filesystem::path dir;
  std::ostream* log;
  json invariants = json::object();
  json metrics = json::object();

  const Device& dev() const { return *device; }
  void say(const std::string& s) const {
    if (log) *log << "[" << spec.name << "] " << s << std::endl;
  }
  void trajectory_files(const Trajectory& tr, const std::string& suffix) const {
    write_text(dir / ("diagnostics" + suffix + ".csv"), diagnostics_csv(tr.reports, header_for(spec)));
  }
  void final_files(const State& s) const {
    save_checkpoint(dir / "final.ckpt", dev(), s);
    write_text(dir / "profile.csv", emit_profile(dev(), s, profile_fields(dev()), header_for(spec)));
  }
};

void run_equilibrium_decay(Context& c) {
  TrajectoryChecks checks;
  std::vector<double> dts = c.spec.dt_sweep;
  if (dts.empty()) dts.push_back(c.spec.solver.dt_initial);
  json per_dt = json::array();
  for (double dt : dts) {
    SolverConfig cfg = c.spec.solver;
    cfg.adaptive = false;
    cfg.dt_initial = dt;
    cfg.dt_max = std::max(cfg.dt_max, dt);
    cfg.keep_states = false;
    c.say("dt = " + dt_tag(dt));
    const Trajectory tr = run_transient(c.dev(), c.spec.T, cfg);
    c.trajectory_files(tr, "_dt" + dt_tag(dt));
    TrajectoryChecks one;
    one.add(c.dev(), tr, cfg);
    checks.add(c.dev(), tr, cfg);
    per_dt.push_back({{"dt", dt},
                      {"steps", tr.times.size() - 1},
                      {"energy_decay", one.energy_ok},
                      {"final_free_energy", tr.reports.back().free_energy}});
    if (dt == dts.back()) c.final_files(tr.states.back());
  }
  checks.write(c.invariants);
  c.metrics["dt_sweep"] = per_dt;
  c.metrics["lower_bound_constant"] = checks.lower_bound_constant;
}

void run_transient_kind(Context& c) {
  SolverConfig cfg = c.spec.solver;
  cfg.keep_states = false;
  const Trajectory tr = run_transient(c.dev(), c.spec.T, cfg);
  c.trajectory_files(tr, "");
  TrajectoryChecks checks;
  checks.add(c.dev(), tr, cfg);
  checks.write(c.invariants);
  c.metrics["steps"] = tr.times.size() - 1;
  c.metrics["rejected_steps"] = tr.rejected_steps;
  c.metrics["final_free_energy"] = tr.reports.back().free_energy;
  c.metrics["lower_bound_constant"] = checks.lower_bound_constant;
  c.final_files(tr.states.back());
}

void run_sweep(Context& c) {
  const auto sweep = bias_sweep(c.dev(), c.spec.solver, c.spec.biases);
  write_text(c.dir / "iv.csv", iv_csv(c.dev(), sweep, header_for(c.spec)));

  // stationary states: admissible and with the vacancy masses of the initial data
  const State init = initial_state(c.dev());
  bool bounds_ok = true;
  double margin = INFINITY, drift = 0;
  std::vector<DiagnosticsReport> reports;
  std::vector<double> m0;
  for (std::size_t i = 0; i < c.dev().species().size(); ++i)
    m0.push_back(species_mass(c.dev(), init, static_cast<int>(i)));
  for (const auto& p : sweep) {
    const Device biased = c.dev().with_bias(p.bias);
    for (const auto& b : bounds_report(biased, p.state)) {
      bounds_ok = bounds_ok && !b.breach;
      margin = std::min(margin, b.margin);
    }
    for (std::size_t i = 0; i < c.dev().species().size(); ++i)
      if (c.dev().species()[i].role == SpeciesRole::Vacancy)
        drift = std::max(drift, std::abs(species_mass(biased, p.state, static_cast<int>(i)) - m0[i]) / m0[i]);
    reports.push_back(make_report(biased, p.state, nullptr, nullptr, m0, 0.0, 0.0, 0, c.spec.solver.scheme,
                                  c.spec.solver.tolerances));
    reports.back().t = p.bias;  // sweep parameter in place of time
  }
  c.trajectory_files(Trajectory{{}, {}, reports, {}, 0, false, {}}, "");
  const double tol = c.spec.solver.tolerances.mass_drift;
  c.invariants["mass_conservation"] = {{"pass", drift <= tol}, {"max_relative_drift", drift}, {"tolerance", tol}};
  c.invariants["bounds"] = {{"pass", bounds_ok}, {"min_margin", margin}};
  json iv = json::array();
  for (const auto& p : sweep) iv.push_back({{"bias", p.bias}, {"currents", p.currents}});
  c.metrics["iv"] = iv;
  if (!sweep.empty()) {
    const Device biased = c.dev().with_bias(sweep.back().bias);
    save_checkpoint(c.dir / "final.ckpt", biased, sweep.back().state);
    write_text(c.dir / "profile.csv",
               emit_profile(biased, sweep.back().state, profile_fields(biased), header_for(c.spec)));
  }
}

void run_probe(Context& c) {
  const ProbeResult r =
      uniqueness_probe(c.dev(), c.spec.T, c.spec.solver, c.spec.perturbations, c.spec.seed, c.spec.vary_paths);
  json runs = json::array();
  for (const auto& run : r.runs)
    runs.push_back({{"index", run.index}, {"path", run.description}, {"failed", run.failed}, {"failure", run.failure}});
  c.metrics["runs"] = runs;
  c.metrics["accepted_times"] = r.times.size();
  c.invariants["uniqueness"] = {{"pass", r.pass()},
                                {"max_discrepancy", r.max_discrepancy},
                                {"threshold", r.threshold},
                                {"perturbations", c.spec.perturbations}};
  if (r.failed) {
    std::string why = "uniqueness probe run failed";
    for (const auto& run : r.runs)
      if (run.failed) why += ": run " + std::to_string(run.index) + ": " + run.failure;
    throw StepFailure(why);
  }
  c.trajectory_files(r.reference, "");
  TrajectoryChecks checks;
  checks.add(c.dev(), r.reference, c.spec.solver);
  checks.write(c.invariants);
  c.final_files(r.reference.states.back());
}

json orders_json(const ConvergenceResult& r) {
  json o = json::array();
  for (double v : r.orders) o.push_back(v);
  return o;
}

bool orders_within(const ConvergenceResult& r, double target, double tol) {
  if (r.undefined || r.orders.empty()) return false;
  for (double o : r.orders)
    if (!(std::abs(o - target) <= tol)) return false;
  return true;
}

void run_study(Context& c) {
  const int L = c.spec.levels;
  std::vector<std::pair<std::string, ConvergenceResult>> studies;
  for (const auto& name : c.spec.studies) {
    if (name == "poisson") {
      std::vector<int> cells = c.spec.poisson_cells;
      while (static_cast<int>(cells.size()) < L) cells.push_back(cells.back() * 2);
      cells.resize(L);
      c.say("poisson manufactured study");
      const auto r = poisson_manufactured_study(cells);
      c.invariants["poisson_order"] = {{"pass", orders_within(r, 2.0, 0.2)}, {"orders", orders_json(r)},
                                       {"expected", 2.0}, {"tolerance", 0.2}};
      studies.emplace_back(name, r);
    } else if (name == "temporal") {
      std::vector<double> dts;
      for (int k = 0; k < L; ++k) dts.push_back(c.spec.study_dt / std::pow(2.0, k));
      c.say("temporal study");
      const auto r = temporal_study(c.dev(), c.spec.study_T > 0 ? c.spec.study_T : c.spec.T, dts, c.spec.solver);
      c.invariants["temporal_order"] = {{"pass", orders_within(r, 1.0, 0.2)}, {"orders", orders_json(r)},
                                        {"expected", 1.0}, {"tolerance", 0.2}};
      studies.emplace_back(name, r);
    } else if (name == "regularity") {
      c.say("regularity probe");
      const auto r = regularity_probe(c.dev(), c.spec.solver, c.spec.refinement_factors, c.spec.gradient_q);
      json levels = json::array();
      ConvergenceResult rows;
      for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const auto& lv = r.levels[k];
        json norms = json::object();
        for (const auto& [id, byq] : lv.norms)
          for (const auto& [q, v] : byq) norms[id + "_q" + dt_tag(q)] = v;
        levels.push_back({{"factor", lv.factor}, {"h", lv.h}, {"norms", norms}});
      }
      c.invariants["regularity"] = {{"pass", r.pass},
                                    {"max_ratio", r.max_ratio},
                                    {"changes_decreasing", r.changes_decreasing},
                                    {"bound", 2.0}};
      c.metrics["regularity_levels"] = levels;
    }
  }
  write_text(c.dir / "orders.csv", study_csv(studies, header_for(c.spec)));
}

void run_axioms(Context& c) {
  std::vector<double> full, positive;
  const int P = c.spec.axiom_points;
  for (int k = 0; k < P; ++k) {
    const double z = P == 1 ? c.spec.axiom_from
                            : c.spec.axiom_from + (c.spec.axiom_to - c.spec.axiom_from) * k / (P - 1.0);
    full.push_back(z);
    if (z >= 0) positive.push_back(z);
  }
  if (positive.empty()) positive.push_back(std::max(0.0, c.spec.axiom_to));

  std::vector<StatisticsKind> kinds{StatisticsKind::boltzmann(), StatisticsKind::fermi_dirac_half(),
                                    StatisticsKind::blakemore(1.0)};
  for (const auto& s : c.spec.device.species)
    if (std::find(kinds.begin(), kinds.end(), s.statistics) == kinds.end()) kinds.push_back(s.statistics);

  std::vector<AxiomReport> reports;
  for (const auto& k : kinds) {
    reports.push_back(verify_axioms(k, k.bounded() ? positive : full));
    const auto& r = reports.back();
    int failed = 0;
    for (const auto& ch : r.checks) failed += !ch.pass;
    c.invariants["axioms_" + k.name()] = {
        {"pass", r.all_pass()}, {"checks", r.checks.size()}, {"failed", failed}, {"empirical_c", r.empirical_c}};
  }
  write_text(c.dir / "axioms.csv", axioms_csv(reports, header_for(c.spec)));
}

}  // namespace

std::filesystem::path output_root() {
  const char* env = std::getenv("PEROSIM_OUTPUT_ROOT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("perosim-output");
}

ScenarioOutcome run_scenario(const ScenarioSpec& spec, const std::filesystem::path& root, std::ostream* log) {
  ScenarioOutcome out;
  out.directory = root / (spec.output.empty() ? spec.name : spec.output);
  std::filesystem::create_directories(out.directory);
  write_text(out.directory / "resolved_config.json", resolved_config(spec).dump(2) + "\n");

  // the axiom check needs no device
  const bool needs_device = spec.kind != ScenarioKind::AxiomCheck;
  std::optional<Device> device;
  if (needs_device) device.emplace(build_device(spec.device));
  Context ctx{spec, needs_device ? &*device : nullptr, out.directory, log};
  std::string status = "ok";
  json abort_info;
  try {
    switch (spec.kind) {
      case ScenarioKind::EquilibriumDecay: run_equilibrium_decay(ctx); break;
      case ScenarioKind::Transient: run_transient_kind(ctx); break;
      case ScenarioKind::StationarySweep: run_sweep(ctx); break;
      case ScenarioKind::UniquenessProbe: run_probe(ctx); break;
      case ScenarioKind::ConvergenceStudy: run_study(ctx); break;
      case ScenarioKind::AxiomCheck: run_axioms(ctx); break;
    }
  } catch (const TransientAbort& e) {
    status = "solver_abort";
    abort_info = {{"reason", e.what()}, {"t", e.last_attempt().t}};
    ctx.trajectory_files(e.partial(), "_partial");
    save_checkpoint(out.directory / "abort.ckpt", ctx.dev(), e.last_attempt());
  } catch (const StepFailure& e) {
    status = "solver_abort";
    abort_info = {{"reason", e.what()}};
  } catch (const NewtonDiverged& e) {
    status = "solver_abort";
    abort_info = {{"reason", e.what()}};
  } catch (const BoundsBreach& e) {
    status = "solver_abort";
    abort_info = {{"reason", e.what()}};
  }

  if (status == "ok" && !all_pass(ctx.invariants)) status = "invariant_failure";
  out.exit_code = status == "ok" ? kExitOk : status == "invariant_failure" ? kExitInvariant : kExitSolverAbort;

  json v;
  v["scenario"] = spec.name;
  v["kind"] = to_string(spec.kind);
  v["seed"] = spec.seed;
  v["status"] = status;
  v["exit_code"] = out.exit_code;
  v["invariants"] = ctx.invariants;
  v["metrics"] = ctx.metrics;
  if (!abort_info.is_null()) v["abort"] = abort_info;
  if (needs_device) {
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(device->hash()));
    v["device_hash"] = hash;
  }
  write_text(out.directory / "verdict.json", v.dump(2) + "\n");
  out.verdict = std::move(v);
  ctx.say("status " + status);
  return out;
}

}  // namespace perosim
