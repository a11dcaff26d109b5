#include "perosim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "perosim/errors.hpp"

namespace perosim {
namespace {

using json = nlohmann::json;

const std::vector<SchemaEntry> kSchema = {
    {"/scenario", "", "scenario parameters"},
    {"/scenario/name", "", "scenario name, default output subdirectory"},
    {"/scenario/kind", "",
     "equilibrium_decay | transient | stationary_sweep | uniqueness_probe | convergence_study | axiom_check"},
    {"/scenario/T", "T", "final time of S = [0, T]"},
    {"/scenario/dt_sweep", "tau", "fixed backward Euler steps run by equilibrium_decay"},
    {"/scenario/biases", "", "applied biases of a stationary sweep"},
    {"/scenario/perturbations", "", "number of solver paths in the uniqueness probe"},
    {"/scenario/vary_paths", "", "false: every probe run uses the same solver path"},
    {"/scenario/seed", "", "RNG seed, recorded in every output header"},
    {"/scenario/studies", "", "parts of a convergence study: poisson, temporal, regularity"},
    {"/scenario/levels", "", "number of refinement levels"},
    {"/scenario/poisson_cells", "", "cell counts of the manufactured Poisson study"},
    {"/scenario/refinement_factors", "", "mesh refinement factors of the regularity probe"},
    {"/scenario/gradient_q", "q", "exponents of the discrete W^{1,q} seminorms"},
    {"/scenario/study_dt", "tau", "coarsest time step of the temporal study"},
    {"/scenario/study_T", "T", "horizon of the temporal study (default: T)"},
    {"/scenario/axiom_grid", "", "z grid of the statistics axiom check"},
    {"/scenario/axiom_grid/from", "z", "first grid point"},
    {"/scenario/axiom_grid/to", "z", "last grid point"},
    {"/scenario/axiom_grid/points", "", "number of grid points"},
    {"/scenario/output", "", "output subdirectory below the output root"},

    {"/solver", "", "nonlinear and time stepping parameters"},
    {"/solver/newton_tol", "", "residual 2-norm tolerance"},
    {"/solver/step_tol", "", "max-norm bound on the last Newton update"},
    {"/solver/max_newton_iters", "", "Newton iteration limit"},
    {"/solver/max_halvings", "", "line search factors 1, 1/2, ..., 2^-max_halvings"},
    {"/solver/density_safeguard", "", "largest fraction of the distance to a density bound per step"},
    {"/solver/damping_cap", "", "largest damping factor in the first iterations"},
    {"/solver/damped_iterations", "", "iterations the damping cap applies to (0 = all)"},
    {"/solver/dt_initial", "tau", "initial time step"},
    {"/solver/dt_min", "tau", "smallest time step before aborting"},
    {"/solver/dt_max", "tau", "largest time step"},
    {"/solver/dt_grow", "", "growth factor after a streak of successes"},
    {"/solver/dt_shrink", "", "shrink factor after a failure"},
    {"/solver/grow_after", "", "successes before growing the step"},
    {"/solver/adaptive", "", "false: fixed dt_initial"},
    {"/solver/gummel", "", "run decoupled Gummel sweeps before Newton"},
    {"/solver/gummel_tol", "", "Gummel update tolerance"},
    {"/solver/gummel_max_iters", "", "Gummel sweep limit"},
    {"/solver/gummel_order", "", "species ids in Gummel order"},
    {"/solver/scheme", "", "excess_chemical_potential | classical_sg"},
    {"/solver/keep_states", "", "keep every accepted state in memory"},
    {"/solver/tolerances", "", "invariant tolerances"},
    {"/solver/tolerances/energy_increase", "Psi", "allowed relative free-energy increase per step"},
    {"/solver/tolerances/mass_drift", "", "allowed relative vacancy mass drift"},
    {"/solver/tolerances/balance", "", "allowed electron/hole bookkeeping defect per step"},

    {"/device", "", "device description (object or path to a JSON file)"},
    {"/device/geometry", "Omega", "domain"},
    {"/device/geometry/dimension", "d", "1 or 2"},
    {"/device/geometry/width", "", "lateral extent of a 2D device"},
    {"/device/layers", "", "layers stacked along x (1D) or y (2D), first at 0"},
    {"/device/layers/*", "", "one layer"},
    {"/device/layers/*/name", "", "layer name"},
    {"/device/layers/*/thickness", "", "layer thickness"},
    {"/device/layers/*/cells", "", "cells across the layer (>= 2)"},
    {"/device/layers/*/region", "Omega_0", "bulk | perovskite"},
    {"/device/layers/*/permittivity", "epsilon", "scaled permittivity"},
    {"/device/layers/*/doping", "C", "scaled doping profile"},
    {"/device/mesh", "", "mesh parameters"},
    {"/device/mesh/cells_across", "", "lateral cells of a 2D device"},
    {"/device/species", "", "mobile species"},
    {"/device/species/*", "", "one species"},
    {"/device/species/*/id", "i", "species id"},
    {"/device/species/*/role", "", "electron | hole | vacancy"},
    {"/device/species/*/charge", "z_i", "charge number"},
    {"/device/species/*/mobility", "mu_i", "mobility per region"},
    {"/device/species/*/mobility/bulk", "mu_i", "mobility in bulk layers"},
    {"/device/species/*/mobility/perovskite", "mu_i", "mobility in the perovskite layer"},
    {"/device/species/*/statistics", "F_i", "statistics function"},
    {"/device/species/*/statistics/kind", "F_i", "boltzmann | fermi_dirac_half | blakemore"},
    {"/device/species/*/statistics/gamma", "gamma", "Blakemore parameter"},
    {"/device/species/*/zeta", "zeta_i", "band-edge shift"},
    {"/device/species/*/density_of_states", "N_i", "density of states / maximal vacancy density"},
    {"/device/species/*/initial", "u_i^0", "initial density"},
    {"/device/species/*/initial/value", "u_i^0", "default initial density"},
    {"/device/species/*/initial/layers", "u_i^0", "initial density per layer name"},
    {"/device/species/*/initial/layers/*", "u_i^0", "initial density in one layer"},
    {"/device/species/*/initial/perturbation", "", "relative sine perturbation"},
    {"/device/species/*/initial/perturbation/amplitude", "", "relative amplitude in [0, 1)"},
    {"/device/species/*/initial/perturbation/modes", "", "number of half waves across the stack"},
    {"/device/contacts", "Gamma_D", "Ohmic contacts"},
    {"/device/contacts/*", "Gamma_D", "one contact"},
    {"/device/contacts/*/name", "", "contact name"},
    {"/device/contacts/*/side", "", "xmin | xmax | ymin | ymax"},
    {"/device/contacts/*/from", "", "2D: start of the contact along its side"},
    {"/device/contacts/*/to", "", "2D: end of the contact along its side"},
    {"/device/contacts/*/psi", "psi^D", "electrostatic potential"},
    {"/device/contacts/*/phi", "phi^D", "quasi Fermi potential"},
    {"/device/contacts/*/bias_weight", "", "psi^D and phi^D shift by bias_weight * (bias + ramp t)"},
    {"/device/contacts/*/ramp", "", "bias ramp rate"},
    {"/device/generation", "G", "Beer-Lambert generation"},
    {"/device/generation/photon_flux", "F_ph", "incident photon flux"},
    {"/device/generation/absorption", "alpha_G", "absorption coefficient"},
    {"/device/generation/axis", "x_vert", "x | y"},
    {"/device/generation/surface", "", "min | max: side the light enters"},
    {"/device/recombination", "r_0", "recombination prefactor"},
    {"/device/recombination/model", "r_0", "constant | srh_like"},
    {"/device/recombination/r0", "r_0", "constant prefactor"},
    {"/device/recombination/r_bar", "r_bar", "upper bound of r_0"},
    {"/device/recombination/n_ref", "", "srh_like reference electron density"},
    {"/device/recombination/p_ref", "", "srh_like reference hole density"},
    {"/device/units", "", "scaling factors used for the physical-units echo"},
    {"/device/units/thermal_voltage", "U_T", "thermal voltage in V"},
    {"/device/units/thermal_energy", "k_B T", "thermal energy in eV"},
    {"/device/units/length", "", "length scale in m"},
};

bool in_schema(const std::string& pattern) {
  static const std::set<std::string> keys = [] {
    std::set<std::string> s;
    for (const auto& e : kSchema) s.insert(e.pointer);
    return s;
  }();
  return keys.count(pattern) > 0;
}

std::string escape(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

void check_keys(const json& j, const std::string& pointer, const std::string& pattern) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string p = pointer + "/" + escape(it.key());
      std::string pat = pattern + "/" + it.key();
      if (!in_schema(pat)) {
        pat = pattern + "/*";
        if (!in_schema(pat)) throw ValidationError(p, "unknown key");
      }
      check_keys(it.value(), p, pat);
    }
  } else if (j.is_array()) {
    const std::string pat = pattern + "/*";
    if (!in_schema(pat)) return;  // arrays of scalars
    for (std::size_t i = 0; i < j.size(); ++i) check_keys(j[i], pointer + "/" + std::to_string(i), pat);
  }
}

// Typed access with the JSON pointer in every error.
class Node {
 public:
  Node(const json& j, std::string ptr) : j_(j), ptr_(std::move(ptr)) {}
  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  Node at(const char* key) const { return {j_.at(key), ptr_ + "/" + key}; }
  Node at(std::size_t i) const { return {j_.at(i), ptr_ + "/" + std::to_string(i)}; }
  std::size_t size() const { return j_.size(); }
  const json& raw() const { return j_; }
  const std::string& ptr() const { return ptr_; }

  double num() const {
    if (!j_.is_number()) throw ValidationError(ptr_, "expected a number");
    return j_.get<double>();
  }
  long long integer() const {
    if (!j_.is_number_integer()) throw ValidationError(ptr_, "expected an integer");
    return j_.get<long long>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) throw ValidationError(ptr_, "expected true or false");
    return j_.get<bool>();
  }
  std::string str() const {
    if (!j_.is_string()) throw ValidationError(ptr_, "expected a string");
    return j_.get<std::string>();
  }
  void require_object() const {
    if (!j_.is_object()) throw ValidationError(ptr_, "expected an object");
  }
  void require_array() const {
    if (!j_.is_array()) throw ValidationError(ptr_, "expected an array");
  }
  template <class T, class F>
  std::vector<T> list(F f) const {
    require_array();
    std::vector<T> out;
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(f(at(i)));
    return out;
  }

  void opt(const char* key, double& v) const {
    if (has(key)) v = at(key).num();
  }
  void opt(const char* key, int& v) const {
    if (has(key)) v = static_cast<int>(at(key).integer());
  }
  void opt(const char* key, bool& v) const {
    if (has(key)) v = at(key).boolean();
  }
  void opt(const char* key, std::string& v) const {
    if (has(key)) v = at(key).str();
  }

 private:
  const json& j_;
  std::string ptr_;
};

Side parse_side(const Node& n) {
  const std::string s = n.str();
  if (s == "xmin") return Side::XMin;
  if (s == "xmax") return Side::XMax;
  if (s == "ymin") return Side::YMin;
  if (s == "ymax") return Side::YMax;
  throw ValidationError(n.ptr(), "expected xmin, xmax, ymin or ymax");
}

std::string side_name(Side s) {
  switch (s) {
    case Side::XMin: return "xmin";
    case Side::XMax: return "xmax";
    case Side::YMin: return "ymin";
    case Side::YMax: return "ymax";
  }
  return "?";
}

std::string role_name(SpeciesRole r) {
  switch (r) {
    case SpeciesRole::Electron: return "electron";
    case SpeciesRole::Hole: return "hole";
    case SpeciesRole::Vacancy: return "vacancy";
  }
  return "?";
}

std::string statistics_key(const StatisticsKind& k) {
  switch (k.family()) {
    case StatisticsFamily::Boltzmann: return "boltzmann";
    case StatisticsFamily::FermiDiracHalf: return "fermi_dirac_half";
    case StatisticsFamily::Blakemore: return "blakemore";
  }
  return "?";
}

ScenarioKind parse_kind(const Node& n) {
  const std::string s = n.str();
  static const std::pair<const char*, ScenarioKind> table[] = {
      {"equilibrium_decay", ScenarioKind::EquilibriumDecay}, {"transient", ScenarioKind::Transient},
      {"stationary_sweep", ScenarioKind::StationarySweep},   {"uniqueness_probe", ScenarioKind::UniquenessProbe},
      {"convergence_study", ScenarioKind::ConvergenceStudy}, {"axiom_check", ScenarioKind::AxiomCheck},
  };
  for (const auto& [name, k] : table)
    if (s == name) return k;
  throw ValidationError(n.ptr(), "unknown scenario kind '" + s + "'");
}

json read_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // translate the byte offset into line / column
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto colon = msg.find("]");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigParseError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg, line,
                           col);
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError(p.string(), "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DeviceConfig parse_device(const Node& n) {
  n.require_object();
  DeviceConfig d;
  if (n.has("geometry")) {
    const Node g = n.at("geometry");
    g.require_object();
    g.opt("dimension", d.dimension);
    g.opt("width", d.width);
  }
  if (n.has("mesh")) n.at("mesh").opt("cells_across", d.cells_across);

  if (!n.has("layers")) throw ValidationError(n.ptr() + "/layers", "required");
  d.layers = n.at("layers").list<LayerConfig>([](const Node& l) {
    l.require_object();
    LayerConfig L;
    L.name = l.at("name").str();
    L.thickness = l.at("thickness").num();
    L.cells = static_cast<int>(l.at("cells").integer());
    if (l.has("region")) {
      const std::string r = l.at("region").str();
      if (r == "perovskite") L.region = Region::Perovskite;
      else if (r == "bulk") L.region = Region::Bulk;
      else throw ValidationError(l.ptr() + "/region", "expected bulk or perovskite");
    }
    l.opt("permittivity", L.permittivity);
    l.opt("doping", L.doping);
    return L;
  });

  if (n.has("species")) {
    d.species = n.at("species").list<SpeciesConfig>([](const Node& s) {
      s.require_object();
      SpeciesConfig S;
      S.id = s.at("id").str();
      const std::string role = s.has("role") ? s.at("role").str() : S.id;
      if (role == "electron" || role == "n") {
        S.role = SpeciesRole::Electron;
        S.charge = -1;
      } else if (role == "hole" || role == "p") {
        S.role = SpeciesRole::Hole;
        S.charge = 1;
      } else if (role == "vacancy") {
        S.role = SpeciesRole::Vacancy;
        S.charge = 1;
        S.statistics = StatisticsKind::blakemore(1.0);
      } else {
        throw ValidationError(s.ptr() + "/role", "expected electron, hole or vacancy");
      }
      if (s.has("charge")) S.charge = static_cast<int>(s.at("charge").integer());
      if (s.has("mobility")) {
        const Node m = s.at("mobility");
        if (m.raw().is_number()) {
          S.mobility_bulk = S.mobility_perovskite = m.num();
        } else {
          m.opt("bulk", S.mobility_bulk);
          m.opt("perovskite", S.mobility_perovskite);
        }
      }
      if (s.has("statistics")) {
        const Node st = s.at("statistics");
        const std::string kind = st.at("kind").str();
        if (kind == "boltzmann") {
          S.statistics = StatisticsKind::boltzmann();
        } else if (kind == "fermi_dirac_half") {
          S.statistics = StatisticsKind::fermi_dirac_half();
        } else if (kind == "blakemore") {
          double g = 1.0;
          st.opt("gamma", g);
          try {
            S.statistics = StatisticsKind::blakemore(g);
          } catch (const ValidationError&) {
            throw ValidationError(st.ptr() + "/gamma", "Blakemore gamma must be positive");
          }
        } else {
          throw ValidationError(st.ptr() + "/kind", "expected boltzmann, fermi_dirac_half or blakemore");
        }
        if (kind != "blakemore" && st.has("gamma"))
          throw ValidationError(st.ptr() + "/gamma", "gamma applies to Blakemore statistics only");
      }
      s.opt("zeta", S.zeta);
      s.opt("density_of_states", S.n_states);
      if (s.has("initial")) {
        const Node in = s.at("initial");
        in.opt("value", S.initial.value);
        if (in.has("layers")) {
          const Node ls = in.at("layers");
          ls.require_object();
          for (auto it = ls.raw().begin(); it != ls.raw().end(); ++it)
            S.initial.per_layer[it.key()] = Node(it.value(), ls.ptr() + "/" + it.key()).num();
        }
        if (in.has("perturbation")) {
          const Node p = in.at("perturbation");
          p.opt("amplitude", S.initial.perturbation_amplitude);
          p.opt("modes", S.initial.perturbation_modes);
        }
      }
      return S;
    });
  }

  if (n.has("contacts")) {
    d.contacts = n.at("contacts").list<ContactConfig>([](const Node& c) {
      c.require_object();
      ContactConfig C;
      C.name = c.at("name").str();
      C.side = parse_side(c.at("side"));
      if (c.has("from")) C.from = c.at("from").num();
      if (c.has("to")) C.to = c.at("to").num();
      c.opt("psi", C.psi);
      c.opt("phi", C.phi);
      c.opt("bias_weight", C.bias_weight);
      c.opt("ramp", C.ramp);
      return C;
    });
  }

  if (n.has("generation")) {
    const Node g = n.at("generation");
    g.opt("photon_flux", d.generation.photon_flux);
    g.opt("absorption", d.generation.absorption);
    d.generation.axis = d.dimension == 1 ? 0 : 1;
    if (g.has("axis")) {
      const std::string a = g.at("axis").str();
      if (a == "x") d.generation.axis = 0;
      else if (a == "y") d.generation.axis = 1;
      else throw ValidationError(g.ptr() + "/axis", "expected x or y");
    }
    if (g.has("surface")) {
      const std::string s = g.at("surface").str();
      if (s == "min") d.generation.from_max = false;
      else if (s == "max") d.generation.from_max = true;
      else throw ValidationError(g.ptr() + "/surface", "expected min or max");
    }
  } else {
    d.generation.axis = d.dimension == 1 ? 0 : 1;
  }

  if (n.has("recombination")) {
    const Node r = n.at("recombination");
    if (r.has("model")) {
      const std::string m = r.at("model").str();
      if (m == "constant") d.recombination.model = RecombinationSpec::Model::Constant;
      else if (m == "srh_like") d.recombination.model = RecombinationSpec::Model::SrhLike;
      else throw ValidationError(r.ptr() + "/model", "expected constant or srh_like");
    }
    r.opt("r0", d.recombination.r0);
    r.opt("r_bar", d.recombination.r_bar);
    r.opt("n_ref", d.recombination.n_ref);
    r.opt("p_ref", d.recombination.p_ref);
  }

  if (n.has("units")) {
    const Node u = n.at("units");
    if (u.has("thermal_voltage")) d.units.thermal_voltage = u.at("thermal_voltage").num();
    if (u.has("thermal_energy")) d.units.thermal_energy = u.at("thermal_energy").num();
    if (u.has("length")) d.units.length = u.at("length").num();
  }
  return d;
}

SolverConfig parse_solver(const Node& n) {
  n.require_object();
  SolverConfig c;
  n.opt("newton_tol", c.newton_tol);
  n.opt("step_tol", c.step_tol);
  n.opt("max_newton_iters", c.max_newton_iters);
  n.opt("max_halvings", c.max_halvings);
  n.opt("density_safeguard", c.density_safeguard);
  n.opt("damping_cap", c.damping_cap);
  n.opt("damped_iterations", c.damped_iterations);
  n.opt("dt_initial", c.dt_initial);
  n.opt("dt_min", c.dt_min);
  n.opt("dt_max", c.dt_max);
  n.opt("dt_grow", c.dt_grow);
  n.opt("dt_shrink", c.dt_shrink);
  n.opt("grow_after", c.grow_after);
  n.opt("adaptive", c.adaptive);
  n.opt("gummel", c.gummel);
  n.opt("gummel_tol", c.gummel_tol);
  n.opt("gummel_max_iters", c.gummel_max_iters);
  n.opt("keep_states", c.keep_states);
  if (n.has("gummel_order")) c.gummel_order = n.at("gummel_order").list<std::string>([](const Node& x) { return x.str(); });
  if (n.has("scheme")) {
    const std::string s = n.at("scheme").str();
    if (s == "excess_chemical_potential") c.scheme = FluxScheme::ExcessChemicalPotential;
    else if (s == "classical_sg") c.scheme = FluxScheme::ClassicalSG;
    else throw ValidationError(n.ptr() + "/scheme", "expected excess_chemical_potential or classical_sg");
  }
  if (n.has("tolerances")) {
    const Node t = n.at("tolerances");
    t.opt("energy_increase", c.tolerances.energy_increase);
    t.opt("mass_drift", c.tolerances.mass_drift);
    t.opt("balance", c.tolerances.balance);
  }
  return c;
}

void parse_scenario(const Node& n, ScenarioSpec& s) {
  n.require_object();
  n.opt("name", s.name);
  if (n.has("kind")) s.kind = parse_kind(n.at("kind"));
  n.opt("T", s.T);
  auto nums = [](const Node& x) { return x.num(); };
  auto ints = [](const Node& x) { return static_cast<int>(x.integer()); };
  if (n.has("dt_sweep")) s.dt_sweep = n.at("dt_sweep").list<double>(nums);
  if (n.has("biases")) s.biases = n.at("biases").list<double>(nums);
  n.opt("perturbations", s.perturbations);
  n.opt("vary_paths", s.vary_paths);
  if (n.has("seed")) {
    const long long v = n.at("seed").integer();
    if (v < 0) throw ValidationError(n.ptr() + "/seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(v);
  }
  if (n.has("studies")) s.studies = n.at("studies").list<std::string>([](const Node& x) { return x.str(); });
  n.opt("levels", s.levels);
  if (n.has("poisson_cells")) s.poisson_cells = n.at("poisson_cells").list<int>(ints);
  if (n.has("refinement_factors")) s.refinement_factors = n.at("refinement_factors").list<int>(ints);
  if (n.has("gradient_q")) s.gradient_q = n.at("gradient_q").list<double>(nums);
  n.opt("study_dt", s.study_dt);
  n.opt("study_T", s.study_T);
  if (n.has("axiom_grid")) {
    const Node g = n.at("axiom_grid");
    g.opt("from", s.axiom_from);
    g.opt("to", s.axiom_to);
    g.opt("points", s.axiom_points);
  }
  n.opt("output", s.output);
}

void validate_scenario(const ScenarioSpec& s) {
  if (s.name.empty()) throw ValidationError("/scenario/name", "must not be empty");
  if (!(s.T > 0) || !std::isfinite(s.T)) throw ValidationError("/scenario/T", "must be positive");
  for (double dt : s.dt_sweep)
    if (!(dt > 0)) throw ValidationError("/scenario/dt_sweep", "time steps must be positive");
  if (s.kind == ScenarioKind::StationarySweep && s.biases.empty())
    throw ValidationError("/scenario/biases", "a sweep needs at least one bias");
  if (s.perturbations < 2) throw ValidationError("/scenario/perturbations", "the probe needs >= 2 runs");
  if (s.levels < 3) throw ValidationError("/scenario/levels", "a convergence study needs >= 3 levels");
  for (const auto& st : s.studies)
    if (st != "poisson" && st != "temporal" && st != "regularity")
      throw ValidationError("/scenario/studies", "unknown study '" + st + "'");
  for (int c : s.poisson_cells)
    if (c < 4 || c % 2) throw ValidationError("/scenario/poisson_cells", "cell counts must be even and >= 4");
  for (int f : s.refinement_factors)
    if (f < 1) throw ValidationError("/scenario/refinement_factors", "factors must be >= 1");
  for (double q : s.gradient_q)
    if (!(q >= 1)) throw ValidationError("/scenario/gradient_q", "exponents must be >= 1");
  if (!(s.study_dt > 0)) throw ValidationError("/scenario/study_dt", "must be positive");
  if (s.study_T < 0) throw ValidationError("/scenario/study_T", "must be >= 0");
  if (s.axiom_points < 1 || !(s.axiom_to >= s.axiom_from))
    throw ValidationError("/scenario/axiom_grid", "need points >= 1 and to >= from");
  if (s.output.find("..") != std::string::npos) throw ValidationError("/scenario/output", "must stay below the output root");
}

json device_json(const DeviceConfig& d) {
  json j;
  j["geometry"] = {{"dimension", d.dimension}, {"width", d.width}};
  j["mesh"] = {{"cells_across", d.cells_across}};
  j["layers"] = json::array();
  for (const auto& l : d.layers)
    j["layers"].push_back({{"name", l.name},
                           {"thickness", l.thickness},
                           {"cells", l.cells},
                           {"region", l.region == Region::Perovskite ? "perovskite" : "bulk"},
                           {"permittivity", l.permittivity},
                           {"doping", l.doping}});
  j["species"] = json::array();
  for (const auto& s : d.species) {
    json st = {{"kind", statistics_key(s.statistics)}};
    if (s.statistics.bounded()) st["gamma"] = s.statistics.gamma();
    json init = {{"value", s.initial.value},
                 {"perturbation",
                  {{"amplitude", s.initial.perturbation_amplitude}, {"modes", s.initial.perturbation_modes}}}};
    if (!s.initial.per_layer.empty()) init["layers"] = s.initial.per_layer;
    j["species"].push_back({{"id", s.id},
                            {"role", role_name(s.role)},
                            {"charge", s.charge},
                            {"mobility", {{"bulk", s.mobility_bulk}, {"perovskite", s.mobility_perovskite}}},
                            {"statistics", st},
                            {"zeta", s.zeta},
                            {"density_of_states", s.n_states},
                            {"initial", init}});
  }
  j["contacts"] = json::array();
  for (const auto& c : d.contacts) {
    json cj = {{"name", c.name},   {"side", side_name(c.side)}, {"psi", c.psi},
               {"phi", c.phi},     {"bias_weight", c.bias_weight}, {"ramp", c.ramp}};
    if (c.from) cj["from"] = *c.from;
    if (c.to) cj["to"] = *c.to;
    j["contacts"].push_back(cj);
  }
  j["generation"] = {{"photon_flux", d.generation.photon_flux},
                     {"absorption", d.generation.absorption},
                     {"axis", d.generation.axis == 0 ? "x" : "y"},
                     {"surface", d.generation.from_max ? "max" : "min"}};
  j["recombination"] = {
      {"model", d.recombination.model == RecombinationSpec::Model::Constant ? "constant" : "srh_like"},
      {"r0", d.recombination.r0},
      {"r_bar", d.recombination.r_bar},
      {"n_ref", d.recombination.n_ref},
      {"p_ref", d.recombination.p_ref}};
  json u = json::object();
  if (d.units.thermal_voltage) u["thermal_voltage"] = *d.units.thermal_voltage;
  if (d.units.thermal_energy) u["thermal_energy"] = *d.units.thermal_energy;
  if (d.units.length) u["length"] = *d.units.length;
  j["units"] = u;
  return j;
}

}  // namespace

std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::EquilibriumDecay: return "equilibrium_decay";
    case ScenarioKind::Transient: return "transient";
    case ScenarioKind::StationarySweep: return "stationary_sweep";
    case ScenarioKind::UniquenessProbe: return "uniqueness_probe";
    case ScenarioKind::ConvergenceStudy: return "convergence_study";
    case ScenarioKind::AxiomCheck: return "axiom_check";
  }
  return "?";
}

const std::vector<SchemaEntry>& config_schema() { return kSchema; }

ScenarioSpec parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j = read_json(text);
  if (!j.is_object()) throw ValidationError("", "top level must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "scenario" && it.key() != "solver" && it.key() != "device")
      throw ValidationError("/" + escape(it.key()), "unknown key");

  // a string device entry names a separate file
  if (j.contains("device") && j["device"].is_string()) {
    const std::filesystem::path p = base_dir / j["device"].get<std::string>();
    try {
      j["device"] = read_json(slurp(p));
    } catch (const ConfigParseError& e) {
      throw ConfigParseError(p.string() + ": " + e.what(), e.line(), e.column());
    }
  }
  check_keys(j, "", "");

  ScenarioSpec s;
  if (j.contains("scenario")) parse_scenario(Node(j["scenario"], "/scenario"), s);
  if (j.contains("solver")) s.solver = parse_solver(Node(j["solver"], "/solver"));
  if (!j.contains("device")) throw ValidationError("/device", "required");
  s.device = parse_device(Node(j["device"], "/device"));
  if (s.output.empty()) s.output = s.name;
  validate_scenario(s);
  s.solver.validate();
  if (s.kind != ScenarioKind::AxiomCheck || !s.device.contacts.empty()) s.device.validate();
  return s;
}

ScenarioSpec parse_config(const std::filesystem::path& path) {
  ScenarioSpec s = parse_config_text(slurp(path), path.parent_path());
  s.source = path;
  return s;
}

nlohmann::json resolved_config(const ScenarioSpec& s) {
  json j;
  json sc = {{"name", s.name},
             {"kind", to_string(s.kind)},
             {"T", s.T},
             {"dt_sweep", s.dt_sweep},
             {"biases", s.biases},
             {"perturbations", s.perturbations},
             {"vary_paths", s.vary_paths},
             {"seed", s.seed},
             {"studies", s.studies},
             {"levels", s.levels},
             {"poisson_cells", s.poisson_cells},
             {"refinement_factors", s.refinement_factors},
             {"gradient_q", s.gradient_q},
             {"study_dt", s.study_dt},
             {"study_T", s.study_T > 0 ? s.study_T : s.T},
             {"axiom_grid", {{"from", s.axiom_from}, {"to", s.axiom_to}, {"points", s.axiom_points}}},
             {"output", s.output}};
  j["scenario"] = sc;
  const auto& c = s.solver;
  j["solver"] = {{"newton_tol", c.newton_tol},
                 {"step_tol", c.step_tol},
                 {"max_newton_iters", c.max_newton_iters},
                 {"max_halvings", c.max_halvings},
                 {"density_safeguard", c.density_safeguard},
                 {"damping_cap", c.damping_cap},
                 {"damped_iterations", c.damped_iterations},
                 {"dt_initial", c.dt_initial},
                 {"dt_min", c.dt_min},
                 {"dt_max", c.dt_max},
                 {"dt_grow", c.dt_grow},
                 {"dt_shrink", c.dt_shrink},
                 {"grow_after", c.grow_after},
                 {"adaptive", c.adaptive},
                 {"gummel", c.gummel},
                 {"gummel_tol", c.gummel_tol},
                 {"gummel_max_iters", c.gummel_max_iters},
                 {"gummel_order", c.gummel_order},
                 {"scheme", c.scheme == FluxScheme::ClassicalSG ? "classical_sg" : "excess_chemical_potential"},
                 {"keep_states", c.keep_states},
                 {"tolerances",
                  {{"energy_increase", c.tolerances.energy_increase},
                   {"mass_drift", c.tolerances.mass_drift},
                   {"balance", c.tolerances.balance}}}};
  j["device"] = device_json(s.device);

  // physical-units echo (reporting only)
  const auto& u = s.device.units;
  if (u.thermal_voltage || u.length || u.thermal_energy) {
    json ph = json::object();
    if (u.thermal_voltage) {
      json contacts = json::array();
      for (const auto& k : s.device.contacts)
        contacts.push_back({{"name", k.name},
                            {"psi_volts", k.psi * *u.thermal_voltage},
                            {"phi_volts", k.phi * *u.thermal_voltage}});
      ph["contacts"] = contacts;
      ph["thermal_voltage"] = *u.thermal_voltage;
    }
    if (u.thermal_energy) {
      json zs = json::array();
      for (const auto& sp : s.device.species) zs.push_back({{"id", sp.id}, {"zeta_eV", sp.zeta * *u.thermal_energy}});
      ph["band_edge_shifts"] = zs;
      ph["thermal_energy"] = *u.thermal_energy;
    }
    if (u.length) {
      json ls = json::array();
      for (const auto& l : s.device.layers) ls.push_back({{"name", l.name}, {"thickness_m", l.thickness * *u.length}});
      ph["layers"] = ls;
      ph["length"] = *u.length;
    }
    j["physical"] = ph;
  }
  return j;
}

}  // namespace perosim
