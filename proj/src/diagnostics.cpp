#include "perosim/diagnostics.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "perosim/errors.hpp"
#include "perosim/solver.hpp"

namespace perosim {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Face measure of a mesh edge restricted to a species region.
double region_face(const Device& d, int species, const MeshEdge& E) {
  const bool perov = d.species()[species].on_perovskite_only();
  double f = 0;
  for (int q = 0; q < E.part_count; ++q)
    if (!perov || d.region()[E.parts[q].cell] == Region::Perovskite) f += E.parts[q].measure;
  return f;
}

double order_between(double e0, double e1, double s0, double s1) {
  if (!(e0 > 0) || !(e1 > 0) || !(s0 > 0) || !(s1 > 0) || s0 == s1) return kNaN;
  return std::log(e0 / e1) / std::log(s0 / s1);
}

ConvergenceResult finish_orders(std::vector<StudyRow> rows) {
  ConvergenceResult r;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k == 0) {
      rows[k].order = kNaN;
      continue;
    }
    const bool by_h = rows[k].h != rows[k - 1].h;
    const double s0 = by_h ? rows[k - 1].h : rows[k - 1].dt;
    const double s1 = by_h ? rows[k].h : rows[k].dt;
    const double p = order_between(rows[k - 1].error, rows[k].error, s0, s1);
    rows[k].order = p;
    rows[k].order_defined = std::isfinite(p);
    r.orders.push_back(p);
    if (!std::isfinite(p)) r.undefined = true;
  }
  r.rows = std::move(rows);
  return r;
}

}  // namespace

double chemical_energy_density(const ShiftedStatistics& st, double u, double v_ref) {
  const double v = chemical_potential(st, u);
  const double a = statistics::antiderivative(st.kind, v + st.zeta);
  const double a_ref = statistics::antiderivative(st.kind, v_ref + st.zeta);
  return u * (v - v_ref) - st.n_states * (a - a_ref);
}

double free_energy(const Device& d, const State& s) {
  check_dimensions(d, s);
  const auto psi_d = d.psi_extension(s.t);
  const auto phi_d = d.phi_extension(s.t);
  const auto& m = d.mesh();
  double e = 0;
  for (std::size_t k = 0; k < m.edges().size(); ++k) {
    const auto& E = m.edges()[k];
    const double diff = (s.psi[E.a] - psi_d[E.a]) - (s.psi[E.b] - psi_d[E.b]);
    e += 0.5 * d.edge_permittivity()[k] * diff * diff;
  }
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    const auto& R = d.species_region(static_cast<int>(i));
    const auto& st = d.species()[i].statistics;
    for (int l = 0; l < R.size(); ++l) {
      const int k = R.nodes[l];
      const double v_ref = d.dirichlet_chemical(static_cast<int>(i), psi_d[k], phi_d[k]);
      e += R.volume[l] * chemical_energy_density(st, s.u[i][l], v_ref);
    }
  }
  return e;
}

double species_mass(const Device& d, const State& s, int i) {
  const auto& R = d.species_region(i);
  double m = 0;
  for (int l = 0; l < R.size(); ++l) m += R.volume[l] * s.u[i][l];
  return m;
}

std::vector<BoundsEntry> bounds_report(const Device& d, const State& s) {
  std::vector<BoundsEntry> out;
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    BoundsEntry b;
    b.id = d.species()[i].id;
    const double lim = d.species()[i].statistics.density_limit();
    const auto& u = s.u[i];
    if (u.empty()) {
      out.push_back(b);
      continue;
    }
    b.min = *std::min_element(u.begin(), u.end());
    b.max = *std::max_element(u.begin(), u.end());
    b.margin = std::min(b.min, std::isfinite(lim) ? lim - b.max : std::numeric_limits<double>::infinity());
    b.breach = !(b.min > 0) || !(b.max < lim) || !std::isfinite(b.max);
    out.push_back(b);
  }
  return out;
}

double gradient_norm(const Device& d, const State& s, int i, double q) {
  if (!(q >= 1)) throw std::invalid_argument("gradient norm needs q >= 1");
  const auto& R = d.species_region(i);
  const auto& m = d.mesh();
  const double dim = m.dimension();
  double acc = 0;
  for (const auto& E : R.edges) {
    const auto& ME = m.edges()[E.mesh_edge];
    const double w = region_face(d, i, ME) * ME.length / dim;
    const double g = std::abs(s.u[i][E.b] - s.u[i][E.a]) / ME.length;
    acc += w * std::pow(g, q);
  }
  return std::pow(acc, 1.0 / q);
}

double max_quasi_fermi_gap(const Device& d, const State& s) {
  if (d.electron() < 0 || d.hole() < 0) return 0.0;
  const auto fn = quasi_fermi(d, d.electron(), s);
  const auto fp = quasi_fermi(d, d.hole(), s);
  double m = 0;
  for (std::size_t k = 0; k < fn.size(); ++k) m = std::max(m, std::abs(fn[k] - fp[k]));
  return m;
}

bool equilibrium_conditions(const Device& d) {
  if (d.generation().enabled()) return false;
  if (d.time_dependent_dirichlet()) return false;
  const auto& c = d.contacts();
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (d.contact_psi(static_cast<int>(k), 0) != d.contact_psi(0, 0)) return false;
    if (d.contact_phi(static_cast<int>(k), 0) != d.contact_phi(0, 0)) return false;
  }
  return true;
}

DiagnosticsReport make_report(const Device& d, const State& s, const State* old, const DiagnosticsReport* prev,
                              const std::vector<double>& initial_masses, double dt, double residual,
                              int newton_iterations, FluxScheme scheme, const DiagnosticsTolerances& tol) {
  DiagnosticsReport r;
  r.t = s.t;
  r.dt = dt;
  r.residual = residual;
  r.newton_iterations = newton_iterations;
  const auto bounds = bounds_report(d, s);
  for (const auto& b : bounds) r.bounds_breach = r.bounds_breach || b.breach;
  // energy and chemical potentials need admissible densities
  r.free_energy = r.bounds_breach ? kNaN : free_energy(d, s);
  r.max_phi_gap = r.bounds_breach ? kNaN : max_quasi_fermi_gap(d, s);
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    SpeciesDiagnostics sd;
    sd.id = bounds[i].id;
    sd.min = bounds[i].min;
    sd.max = bounds[i].max;
    sd.margin = bounds[i].margin;
    sd.mass = species_mass(d, s, static_cast<int>(i));
    const auto& sp = d.species()[i];
    if (sp.role == SpeciesRole::Vacancy && i < initial_masses.size()) {
      const double m0 = initial_masses[i];
      if (std::abs(sd.mass - m0) > tol.mass_drift * std::abs(m0)) r.mass_drift = true;
    }
    if (old && !r.bounds_breach && dt > 0) {
      sd.balance_defect = species_balance(static_cast<int>(i), d, s, *old, dt, scheme).defect();
    }
    r.species.push_back(sd);
  }
  if (prev && equilibrium_conditions(d) && std::isfinite(prev->free_energy)) {
    const double inc = r.free_energy - prev->free_energy;
    r.energy_increase = inc > tol.energy_increase * std::max(1.0, std::abs(prev->free_energy));
  }
  return r;
}

EnergyDecayResult energy_decay_check(const std::vector<DiagnosticsReport>& reports, bool equilibrium_mode,
                                     double tolerance) {
  EnergyDecayResult res;
  res.equilibrium_mode = equilibrium_mode;
  res.worst_increase = -std::numeric_limits<double>::infinity();
  res.worst_relative = -std::numeric_limits<double>::infinity();
  if (reports.size() < 2) {
    res.worst_increase = 0;
    res.worst_relative = 0;
  }
  for (std::size_t k = 1; k < reports.size(); ++k) {
    const double a = reports[k - 1].free_energy, b = reports[k].free_energy;
    const double inc = b - a;
    const double rel = inc / std::max(1.0, std::abs(a));
    res.worst_increase = std::max(res.worst_increase, inc);
    res.worst_relative = std::max(res.worst_relative, rel);
    if (!std::isfinite(inc)) res.worst_relative = std::numeric_limits<double>::infinity();
  }
  if (equilibrium_mode) {
    res.pass = !(res.worst_relative > tolerance);
    return res;
  }
  // general mode: smallest c >= 0 with Psi(t) <= (Psi(0) + c) e^{ct}
  res.pass = true;
  if (reports.empty()) return res;
  const double psi0 = reports.front().free_energy;
  const double t0 = reports.front().t;
  auto ok = [&](double c) {
    for (const auto& r : reports)
      if (r.free_energy > (psi0 + c) * std::exp(c * (r.t - t0)) * (1 + 1e-12) + 1e-300) return false;
    return true;
  };
  double hi = 1.0;
  while (!ok(hi) && hi < 1e12) hi *= 2;
  if (ok(0.0)) {
    res.growth_constant = 0;
  } else {
    double lo = 0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (ok(mid) ? hi : lo) = mid;
    }
    res.growth_constant = hi;
  }
  return res;
}

double psi_lower_bound_constant(const Device& d, const State& s) {
  double lhs = 0;
  for (std::size_t i = 0; i < d.species().size(); ++i) lhs += species_mass(d, s, static_cast<int>(i));
  const auto& m = d.mesh();
  for (int k = 0; k < m.node_count(); ++k) lhs += m.node_volumes()[k] * s.psi[k] * s.psi[k];
  for (const auto& E : m.edges()) {
    const double g = (s.psi[E.b] - s.psi[E.a]) / E.length;
    lhs += E.face() * E.length * g * g;
  }
  const double psi = free_energy(d, s);
  return lhs / (1.0 + std::max(psi, 0.0));
}

ConvergenceResult orders_from_errors(const std::vector<double>& h, const std::vector<double>& dt,
                                     const std::vector<double>& errors) {
  std::vector<StudyRow> rows;
  for (std::size_t k = 0; k < errors.size(); ++k)
    rows.push_back({static_cast<int>(k), h.at(k), dt.at(k), errors[k], kNaN, false});
  return finish_orders(std::move(rows));
}

ConvergenceResult orders_from_differences(const std::vector<double>& h, const std::vector<double>& dt,
                                          const std::vector<double>& differences) {
  // differences[k] compares level k+1 with level k
  std::vector<StudyRow> rows;
  for (std::size_t k = 0; k < differences.size(); ++k)
    rows.push_back({static_cast<int>(k + 1), h.at(k + 1), dt.at(k + 1), differences[k], kNaN, false});
  return finish_orders(std::move(rows));
}

ConvergenceResult poisson_manufactured_study(const std::vector<int>& cells) {
  if (cells.size() < 3) throw std::invalid_argument("convergence study needs >= 3 levels");
  std::vector<double> hs, dts, errors;
  for (int n : cells) {
    if (n < 4 || n % 2) throw std::invalid_argument("manufactured study needs an even cell count >= 4");
    // layers of two cells carry the exact layer average of C = pi^2 sin(pi x)
    DeviceConfig cfg;
    cfg.dimension = 1;
    const int nl = n / 2;
    const double w = 1.0 / nl;
    for (int l = 0; l < nl; ++l) {
      LayerConfig L;
      L.name = "l" + std::to_string(l);
      L.thickness = w;
      L.cells = 2;
      L.permittivity = 1;
      const double a = l * w, b = (l + 1) * w;
      L.doping = std::numbers::pi * (std::cos(std::numbers::pi * a) - std::cos(std::numbers::pi * b)) / w;
      cfg.layers.push_back(L);
    }
    cfg.contacts.push_back({"left", Side::XMin, std::nullopt, std::nullopt, 0, 0, 0, 0});
    cfg.contacts.push_back({"right", Side::XMax, std::nullopt, std::nullopt, 0, 0, 0, 0});
    const Device d = build_device(cfg);
    State s;
    s.psi.assign(d.mesh().node_count(), 0.0);
    const Residual r = assemble_poisson(d, s);
    Eigen::SparseMatrix<double> A = r.J;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    const Eigen::VectorXd x = lu.solve(-r.r);
    double err = 0;
    for (int k = 0; k < d.mesh().node_count(); ++k)
      err = std::max(err, std::abs(x[k] - std::sin(std::numbers::pi * d.mesh().x()[k])));
    hs.push_back(1.0 / n);
    dts.push_back(0.0);
    errors.push_back(err);
  }
  return orders_from_errors(hs, dts, errors);
}

ConvergenceResult temporal_study(const Device& device, double T, const std::vector<double>& dts,
                                 const SolverConfig& config) {
  if (dts.size() < 3) throw std::invalid_argument("convergence study needs >= 3 levels");
  std::vector<State> finals;
  for (std::size_t k = 0; k < dts.size(); ++k) {
    SolverConfig c = config;
    c.adaptive = false;
    c.dt_initial = dts[k];
    c.dt_min = std::min(c.dt_min, dts[k]);
    c.dt_max = std::max(c.dt_max, dts[k]);
    c.keep_states = false;
    try {
      finals.push_back(run_transient(device, T, c).states.back());
    } catch (const std::exception& e) {
      throw std::runtime_error("temporal study level " + std::to_string(k) + ": " + e.what());
    }
  }
  std::vector<double> diffs, h(dts.size(), device.mesh().max_spacing());
  for (std::size_t k = 1; k < finals.size(); ++k) diffs.push_back(state_distance(finals[k], finals[k - 1]));
  return orders_from_differences(h, dts, diffs);
}

ConvergenceResult spatial_study(const std::function<double(int, double&)>& solve, int levels) {
  if (levels < 3) throw std::invalid_argument("convergence study needs >= 3 levels");
  std::vector<double> q, hs;
  for (int l = 0; l < levels; ++l) {
    double h = 0;
    try {
      q.push_back(solve(l, h));
    } catch (const std::exception& e) {
      throw std::runtime_error("spatial study level " + std::to_string(l) + ": " + e.what());
    }
    hs.push_back(h);
  }
  std::vector<double> diffs, dts(levels, 0.0);
  for (int l = 1; l < levels; ++l) diffs.push_back(std::abs(q[l] - q[l - 1]));
  return orders_from_differences(hs, dts, diffs);
}

RegularityResult regularity_probe(const Device& base, const SolverConfig& config, const std::vector<int>& factors,
                                  const std::vector<double>& qs) {
  RegularityResult res;
  for (int f : factors) {
    const Device d = refine(base, f);
    const State s = solve_stationary(d, config, base.bias());
    RegularityLevel lv;
    lv.factor = f;
    lv.h = d.mesh().max_spacing();
    for (std::size_t i = 0; i < d.species().size(); ++i)
      for (double q : qs) lv.norms[d.species()[i].id][q] = gradient_norm(d, s, static_cast<int>(i), q);
    res.levels.push_back(std::move(lv));
  }
  res.pass = true;
  for (std::size_t k = 1; k < res.levels.size(); ++k) {
    for (const auto& [id, byq] : res.levels[k].norms) {
      for (const auto& [q, v] : byq) {
        const double prev = res.levels[k - 1].norms.at(id).at(q);
        const double ratio = prev > 0 ? v / prev : (v > 0 ? std::numeric_limits<double>::infinity() : 1.0);
        res.max_ratio = std::max(res.max_ratio, ratio);
        if (!(ratio <= 2.0)) res.pass = false;
        if (k >= 2) {
          const double pp = res.levels[k - 2].norms.at(id).at(q);
          const double c_now = std::abs(v - prev), c_before = std::abs(prev - pp);
          if (c_now > c_before) res.changes_decreasing = false;
        }
      }
    }
  }
  return res;
}

}  // namespace perosim
