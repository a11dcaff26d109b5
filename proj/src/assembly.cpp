#include "perosim/assembly.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <limits>

#include "perosim/errors.hpp"
#include "perosim/kernels.hpp"

namespace perosim {
namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

struct NodeData {
  std::vector<double> log_gamma, dlog_gamma;
};

NodeData node_data(const SpeciesSpec& s, const std::vector<double>& u) {
  NodeData nd;
  nd.log_gamma.resize(u.size());
  nd.dlog_gamma.resize(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const DensityPoint p = density_point(s.statistics, u[k]);
    nd.log_gamma[k] = p.log_gamma;
    nd.dlog_gamma[k] = p.dlog_gamma_du;
  }
  return nd;
}

void require_scheme(const SpeciesSpec& s, FluxScheme scheme) {
  if (scheme == FluxScheme::ClassicalSG && s.statistics.kind.family() != StatisticsFamily::Boltzmann)
    throw SchemeError("classical Scharfetter-Gummel flux requires Boltzmann statistics (species '" + s.id + "')");
}

bool is_dirichlet(const SpeciesRegion& R, int local) { return R.contact[local] >= 0; }

// Batched fluxes of one species on all its edges.
struct SpeciesFluxes {
  std::vector<double> flux, d_up, d_down, d_drive;
  NodeData nd;
};

SpeciesFluxes species_fluxes(const Device& d, int i, const State& s, FluxScheme scheme) {
  const auto& sp = d.species()[i];
  const auto& R = d.species_region(i);
  require_scheme(sp, scheme);
  SpeciesFluxes out;
  out.nd = node_data(sp, s.u[i]);
  const std::size_t ne = R.edges.size();
  std::vector<double> drive(ne), up(ne), down(ne), coeff(ne);
  const double z = sp.charge;
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& E = R.edges[e];
    const double dpsi = s.psi[R.nodes[E.b]] - s.psi[R.nodes[E.a]];
    drive[e] = z * dpsi;
    if (scheme == FluxScheme::ExcessChemicalPotential) drive[e] -= out.nd.log_gamma[E.b] - out.nd.log_gamma[E.a];
    up[e] = s.u[i][E.a];
    down[e] = s.u[i][E.b];
    coeff[e] = E.coeff;
  }
  out.flux.resize(ne);
  out.d_up.resize(ne);
  out.d_down.resize(ne);
  out.d_drive.resize(ne);
  kernels::sg_flux({drive, up, down, coeff}, {out.flux, out.d_up, out.d_down, out.d_drive});
  return out;
}

bool has_reactions(const Device& d) { return d.electron() >= 0 && d.hole() >= 0; }

// Recombination at every node, shared by the electron and hole rows.
std::vector<Recombination> node_recombination(const Device& d, const State& s) {
  std::vector<Recombination> out;
  if (!has_reactions(d)) return out;
  const auto& un = s.u[d.electron()];
  const auto& up = s.u[d.hole()];
  out.reserve(un.size());
  for (std::size_t k = 0; k < un.size(); ++k) out.push_back(recombination(d, un[k], up[k]));
  return out;
}

void poisson_rows(const Device& d, const State& s, const DirichletData& dd, int row0, Eigen::VectorXd& r,
                  Triplets* t, const Layout& L) {
  const auto& m = d.mesh();
  const int nn = m.node_count();
  const auto& contact = d.node_contact();
  for (int k = 0; k < nn; ++k) r[row0 + k] = -d.node_doping()[k];
  // species charge
  for (int i = 0; i < L.species_count(); ++i) {
    const auto& R = d.species_region(i);
    const double z = d.species()[i].charge;
    for (int l = 0; l < R.size(); ++l) {
      const int k = R.nodes[l];
      if (contact[k] >= 0) continue;
      r[row0 + k] -= z * R.volume[l] * s.u[i][l];
      if (t) t->emplace_back(row0 + k, L.species(i, l), -z * R.volume[l]);
    }
  }
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    const auto& E = m.edges()[e];
    const double w = d.edge_permittivity()[e];
    const double f = w * (s.psi[E.a] - s.psi[E.b]);
    if (contact[E.a] < 0) {
      r[row0 + E.a] += f;
      if (t) {
        t->emplace_back(row0 + E.a, L.psi(E.a), w);
        t->emplace_back(row0 + E.a, L.psi(E.b), -w);
      }
    }
    if (contact[E.b] < 0) {
      r[row0 + E.b] -= f;
      if (t) {
        t->emplace_back(row0 + E.b, L.psi(E.b), w);
        t->emplace_back(row0 + E.b, L.psi(E.a), -w);
      }
    }
  }
  for (int k = 0; k < nn; ++k) {
    if (contact[k] < 0) continue;
    r[row0 + k] = s.psi[k] - dd.psi[k];
    if (t) t->emplace_back(row0 + k, L.psi(k), 1.0);
  }
}

void continuity_rows(int i, const Device& d, const State& s, const State& old, double dt, const DirichletData& dd,
                     const std::vector<Recombination>& rec, const AssemblyOptions& opt, int row0, Eigen::VectorXd& r,
                     Triplets* t, const Layout& L) {
  const auto& sp = d.species()[i];
  const auto& R = d.species_region(i);
  const int n = R.size();
  const bool carrier = sp.role != SpeciesRole::Vacancy;
  const bool stationary = opt.stationary || std::isinf(dt);
  const bool frozen_row = stationary && sp.frozen();

  for (int l = 0; l < n; ++l) {
    r[row0 + l] = 0.0;
    if (!stationary) {
      r[row0 + l] = R.volume[l] * (s.u[i][l] - old.u[i][l]) / dt;
      if (t) t->emplace_back(row0 + l, L.species(i, l), R.volume[l] / dt);
    }
  }

  if (!frozen_row) {
    const SpeciesFluxes F = species_fluxes(d, i, s, opt.scheme);
    const double z = sp.charge;
    for (std::size_t e = 0; e < R.edges.size(); ++e) {
      const auto& E = R.edges[e];
      const double f = F.flux[e];
      // derivatives of the flux out of a into b
      const double D = F.d_drive[e];
      double dua = F.d_up[e], dub = F.d_down[e];
      if (opt.scheme == FluxScheme::ExcessChemicalPotential) {
        dua += D * F.nd.dlog_gamma[E.a];
        dub -= D * F.nd.dlog_gamma[E.b];
      }
      const double dpa = -z * D, dpb = z * D;
      const int ga = R.nodes[E.a], gb = R.nodes[E.b];
      r[row0 + E.a] += f;
      r[row0 + E.b] -= f;
      if (t) {
        t->emplace_back(row0 + E.a, L.species(i, E.a), dua);
        t->emplace_back(row0 + E.a, L.species(i, E.b), dub);
        t->emplace_back(row0 + E.a, L.psi(ga), dpa);
        t->emplace_back(row0 + E.a, L.psi(gb), dpb);
        t->emplace_back(row0 + E.b, L.species(i, E.a), -dua);
        t->emplace_back(row0 + E.b, L.species(i, E.b), -dub);
        t->emplace_back(row0 + E.b, L.psi(ga), -dpa);
        t->emplace_back(row0 + E.b, L.psi(gb), -dpb);
      }
    }

    if (carrier && has_reactions(d)) {
      const int ni = d.electron(), pi = d.hole();
      for (int l = 0; l < n; ++l) {
        const Recombination& Rk = rec[l];
        r[row0 + l] -= d.node_generation()[R.nodes[l]] - R.volume[l] * Rk.R;
        if (t) {
          t->emplace_back(row0 + l, L.species(ni, l), R.volume[l] * Rk.dR_dun);
          t->emplace_back(row0 + l, L.species(pi, l), R.volume[l] * Rk.dR_dup);
        }
      }
    } else if (carrier) {
      // a lone carrier species still receives the generation source
      for (int l = 0; l < n; ++l) r[row0 + l] -= d.node_generation()[R.nodes[l]];
    }
  } else {
    for (int l = 0; l < n; ++l) {
      r[row0 + l] = s.u[i][l] - old.u[i][l];
      if (t) t->emplace_back(row0 + l, L.species(i, l), 1.0);
    }
  }

  // Dirichlet rows replace the balance at contact nodes
  for (int l = 0; l < n; ++l) {
    if (!is_dirichlet(R, l)) continue;
    r[row0 + l] = s.u[i][l] - dd.u[i][l];
  }

  // stationary vacancy blocks: the last row becomes the mass constraint
  if (stationary && !carrier && !frozen_row && n > 0) {
    double mass = 0;
    for (int l = 0; l < n; ++l) mass += R.volume[l] * (s.u[i][l] - old.u[i][l]);
    r[row0 + n - 1] = mass;
  }

  if (t) {
    // drop the balance entries of rows that were replaced above
    const int last = row0 + n - 1;
    const bool mass_row = stationary && !carrier && !frozen_row && n > 0;
    auto replaced = [&](int row) {
      const int l = row - row0;
      return is_dirichlet(R, l) || (mass_row && row == last);
    };
    std::erase_if(*t, [&](const Eigen::Triplet<double>& e) {
      return e.row() >= row0 && e.row() < row0 + n && replaced(e.row());
    });
    for (int l = 0; l < n; ++l)
      if (is_dirichlet(R, l)) t->emplace_back(row0 + l, L.species(i, l), 1.0);
    if (mass_row)
      for (int l = 0; l < n; ++l) t->emplace_back(last, L.species(i, l), R.volume[l]);
  }
}

}  // namespace

// ----------------------------------------------------------------------------

Layout::Layout(const Device& d) {
  offset_.push_back(d.mesh().node_count());
  for (std::size_t i = 0; i < d.species().size(); ++i)
    offset_.push_back(offset_.back() + d.species_region(static_cast<int>(i)).size());
  size_ = offset_.back();
}

Eigen::VectorXd Layout::pack(const State& s) const {
  Eigen::VectorXd x(size_);
  for (int k = 0; k < offset_[0]; ++k) x[k] = s.psi[k];
  for (int i = 0; i < species_count(); ++i)
    for (int l = 0; l < block_size(i); ++l) x[offset_[i] + l] = s.u[i][l];
  return x;
}

State Layout::unpack(const Eigen::VectorXd& x, double t) const {
  State s;
  s.t = t;
  s.psi.assign(x.data(), x.data() + offset_[0]);
  s.u.resize(species_count());
  for (int i = 0; i < species_count(); ++i) s.u[i].assign(x.data() + offset_[i], x.data() + offset_[i + 1]);
  return s;
}

double bernoulli(double x) { return kernels::scalar::bernoulli(x); }

EdgeFlux edge_flux_full(const SpeciesSpec& sp, double coeff, double psiK, double psiL, double uK, double uL,
                        FluxScheme scheme) {
  require_scheme(sp, scheme);
  const double z = sp.charge;
  double s = z * (psiL - psiK);
  double gK = 0, gL = 0;
  if (scheme == FluxScheme::ExcessChemicalPotential) {
    const DensityPoint pK = density_point(sp.statistics, uK);
    const DensityPoint pL = density_point(sp.statistics, uL);
    s -= pL.log_gamma - pK.log_gamma;
    gK = pK.dlog_gamma_du;
    gL = pL.dlog_gamma_du;
  } else {
    density_point(sp.statistics, uK);
    density_point(sp.statistics, uL);
  }
  const double bp = kernels::scalar::bernoulli(s);
  const double bm = kernels::scalar::bernoulli(-s);
  const double D =
      coeff * (kernels::scalar::bernoulli_derivative(s) * uK + kernels::scalar::bernoulli_derivative(-s) * uL);
  EdgeFlux f;
  f.flux = coeff * (bp * uK - bm * uL);
  f.d_uK = coeff * bp + D * gK;
  f.d_uL = -(coeff * bm) - D * gL;
  f.d_psiK = -z * D;
  f.d_psiL = z * D;
  return f;
}

double edge_flux(const SpeciesSpec& sp, double coeff, double psiK, double psiL, double uK, double uL,
                 FluxScheme scheme) {
  return edge_flux_full(sp, coeff, psiK, psiL, uK, uL, scheme).flux;
}

double edge_flux(const Device& d, int i, int e, const State& s, FluxScheme scheme) {
  const auto& R = d.species_region(i);
  const auto& E = R.edges.at(e);
  return edge_flux(d.species()[i], E.coeff, s.psi[R.nodes[E.a]], s.psi[R.nodes[E.b]], s.u[i][E.a], s.u[i][E.b],
                   scheme);
}

Recombination recombination(const Device& d, double un, double up) {
  const auto& sn = d.species()[d.electron()].statistics;
  const auto& sp = d.species()[d.hole()].statistics;
  const auto& rs = d.recombination();
  const double r0 = rs.rate(un, up);
  const auto [dr_n, dr_p] = rs.rate_partials(un, up);
  const DensityPoint pn = density_point(sn, un);
  const DensityPoint pp = density_point(sp, up);
  const double eq = sn.n_states * sp.n_states * std::exp(sn.zeta + sp.zeta + pn.log_gamma + pp.log_gamma);
  const double bracket = un * up - eq;
  Recombination out;
  out.R = r0 * bracket;
  out.dR_dun = r0 * (up - eq * pn.dlog_gamma_du) + dr_n * bracket;
  out.dR_dup = r0 * (un - eq * pp.dlog_gamma_du) + dr_p * bracket;
  return out;
}

double reaction_Q(const Device& d, double un, double up, double G) {
  if (!has_reactions(d)) return -G;
  return recombination(d, un, up).R - G;
}

DirichletData dirichlet_data(const Device& d, double t) {
  DirichletData dd;
  dd.psi = d.psi_extension(t);
  const auto phi = d.phi_extension(t);
  dd.u.resize(d.species().size());
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    const auto& R = d.species_region(static_cast<int>(i));
    dd.u[i].resize(R.size());
    for (int l = 0; l < R.size(); ++l) {
      const int k = R.nodes[l];
      const double v = d.dirichlet_chemical(static_cast<int>(i), dd.psi[k], phi[k]);
      dd.u[i][l] = carrier_density(d.species()[i].statistics, v);
    }
  }
  return dd;
}

void check_dimensions(const Device& d, const State& s) {
  if (static_cast<int>(s.psi.size()) != d.mesh().node_count())
    throw DimensionError("state psi has " + std::to_string(s.psi.size()) + " entries, device has " +
                         std::to_string(d.mesh().node_count()) + " nodes");
  if (s.u.size() != d.species().size()) throw DimensionError("state species count does not match device");
  for (std::size_t i = 0; i < s.u.size(); ++i)
    if (static_cast<int>(s.u[i].size()) != d.species_region(static_cast<int>(i)).size())
      throw DimensionError("state density array of species '" + d.species()[i].id + "' has wrong length");
}

void check_bounds(const Device& d, const State& s) {
  for (std::size_t i = 0; i < s.u.size(); ++i) {
    const double lim = d.species()[i].statistics.density_limit() * (1.0 - statistics::kRangeGuard);
    for (double u : s.u[i])
      if (!(u > 0) || !(u < lim) || !std::isfinite(u))
        throw BoundsBreach("density of species '" + d.species()[i].id + "' left its admissible range");
  }
}

Residual assemble_poisson(const Device& d, const State& s) {
  check_dimensions(d, s);
  const Layout L(d);
  const int nn = d.mesh().node_count();
  Residual res;
  res.r.resize(nn);
  Triplets t;
  poisson_rows(d, s, dirichlet_data(d, s.t), 0, res.r, &t, L);
  res.J.resize(nn, L.size());
  res.J.setFromTriplets(t.begin(), t.end());
  res.block_offset = {0};
  return res;
}

Residual assemble_continuity(int i, const Device& d, const State& s, const State& old, double dt,
                             const AssemblyOptions& opt) {
  check_dimensions(d, s);
  check_dimensions(d, old);
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  const Layout L(d);
  const int n = L.block_size(i);
  Residual res;
  res.r.resize(n);
  Triplets t;
  continuity_rows(i, d, s, old, dt, dirichlet_data(d, s.t), node_recombination(d, s), opt, 0, res.r,
                  opt.jacobian ? &t : nullptr, L);
  // local rows start at 0; shift only the row index space
  if (opt.jacobian) {
    res.J.resize(n, L.size());
    res.J.setFromTriplets(t.begin(), t.end());
  }
  res.block_offset = {0};
  return res;
}

Residual assemble_system(const Device& d, const State& s, const State& old, double dt, const AssemblyOptions& opt) {
  check_dimensions(d, s);
  check_dimensions(d, old);
  if (!(dt > 0)) throw std::invalid_argument("time step must be positive");
  const Layout L(d);
  const DirichletData dd = dirichlet_data(d, s.t);
  Residual res;
  res.r.resize(L.size());
  Triplets t;
  Triplets* tp = opt.jacobian ? &t : nullptr;
  if (tp) t.reserve(static_cast<std::size_t>(L.size()) * 12);
  poisson_rows(d, s, dd, 0, res.r, tp, L);
  res.block_offset.push_back(0);
  const std::vector<Recombination> rec = node_recombination(d, s);
  for (int i = 0; i < L.species_count(); ++i) {
    res.block_offset.push_back(L.offset(i));
    continuity_rows(i, d, s, old, dt, dd, rec, opt, L.offset(i), res.r, tp, L);
  }
  if (tp) {
    res.J.resize(L.size(), L.size());
    res.J.setFromTriplets(t.begin(), t.end());
  }
  return res;
}

State initial_state(const Device& d) {
  const DirichletData dd = dirichlet_data(d, 0.0);
  State s;
  s.t = 0;
  s.psi = dd.psi;
  s.u.resize(d.species().size());
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    const auto& R = d.species_region(static_cast<int>(i));
    s.u[i] = R.initial;
    for (int l = 0; l < R.size(); ++l)
      if (R.contact[l] >= 0) s.u[i][l] = dd.u[i][l];
  }
  // psi is linear in itself for frozen densities: one Newton step is exact
  const Residual p = assemble_poisson(d, s);
  const int nn = d.mesh().node_count();
  Eigen::SparseMatrix<double> A = p.J.leftCols(nn);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("initial Poisson factorization failed");
  const Eigen::VectorXd dpsi = lu.solve(-p.r);
  for (int k = 0; k < nn; ++k) s.psi[k] += dpsi[k];
  return s;
}

SpeciesBalance species_balance(int i, const Device& d, const State& s, const State& old, double dt,
                               FluxScheme scheme) {
  const auto& R = d.species_region(i);
  const auto& sp = d.species()[i];
  SpeciesBalance b;
  for (int l = 0; l < R.size(); ++l) {
    const double dm = R.volume[l] * (s.u[i][l] - old.u[i][l]);
    b.mass_change += dm;
    if (R.contact[l] >= 0) {
      b.dirichlet_change += dm;
    } else if (sp.role != SpeciesRole::Vacancy) {
      double src = d.node_generation()[R.nodes[l]];
      if (has_reactions(d)) src -= R.volume[l] * recombination(d, s.u[d.electron()][l], s.u[d.hole()][l]).R;
      b.reaction += dt * src;
    }
  }
  if (sp.frozen()) return b;
  const SpeciesFluxes F = species_fluxes(d, i, s, scheme);
  for (std::size_t e = 0; e < R.edges.size(); ++e) {
    const auto& E = R.edges[e];
    const bool da = R.contact[E.a] >= 0, db = R.contact[E.b] >= 0;
    if (da && !db) b.dirichlet_inflow += dt * F.flux[e];
    if (db && !da) b.dirichlet_inflow -= dt * F.flux[e];
  }
  return b;
}

std::vector<double> terminal_currents(const Device& d, const State& s, const State& old, double dt,
                                      FluxScheme scheme) {
  std::vector<double> I(d.contacts().size(), 0.0);
  const bool stationary = std::isinf(dt);
  for (std::size_t i = 0; i < d.species().size(); ++i) {
    const auto& sp = d.species()[i];
    if (sp.role == SpeciesRole::Vacancy || sp.frozen()) continue;
    const auto& R = d.species_region(static_cast<int>(i));
    const SpeciesFluxes F = species_fluxes(d, static_cast<int>(i), s, scheme);
    // balance defect at contact nodes = flux leaving through the contact
    std::vector<double> out(R.size(), 0.0);
    for (std::size_t e = 0; e < R.edges.size(); ++e) {
      out[R.edges[e].a] -= F.flux[e];
      out[R.edges[e].b] += F.flux[e];
    }
    for (int l = 0; l < R.size(); ++l) {
      const int c = R.contact[l];
      if (c < 0) continue;
      double src = d.node_generation()[R.nodes[l]];
      if (has_reactions(d)) src -= R.volume[l] * recombination(d, s.u[d.electron()][l], s.u[d.hole()][l]).R;
      double leave = out[l] + src;
      if (!stationary) leave -= R.volume[l] * (s.u[i][l] - old.u[i][l]) / dt;
      I[c] += sp.charge * leave;
    }
  }
  return I;
}

std::vector<double> quasi_fermi(const Device& d, int i, const State& s) {
  const auto& sp = d.species()[i];
  const auto& R = d.species_region(i);
  std::vector<double> phi(R.size());
  for (int l = 0; l < R.size(); ++l) {
    const double v = chemical_potential(sp.statistics, s.u[i][l]);
    phi[l] = s.psi[R.nodes[l]] + v / sp.charge;
  }
  return phi;
}

}  // namespace perosim
