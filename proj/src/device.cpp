#include "perosim/device.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <set>

#include "perosim/errors.hpp"

namespace perosim {
namespace {

std::string species_field(std::size_t i, const std::string& key) {
  return "/device/species/" + std::to_string(i) + "/" + key;
}

std::string contact_field(std::size_t i, const std::string& key) {
  return "/device/contacts/" + std::to_string(i) + "/" + key;
}

class Fnv {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= c[i];
      h_ *= 1099511628211ull;
    }
  }
  void num(double v) { bytes(&v, sizeof v); }
  void num(int v) { bytes(&v, sizeof v); }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 1469598103934665603ull;
};

// Integral of the Beer-Lambert profile over a box.
double generation_integral(const GenerationSpec& g, const Box& b, double lo, double hi) {
  if (!g.enabled()) return 0.0;
  const double a0 = g.axis == 0 ? b.x0 : b.y0;
  const double a1 = g.axis == 0 ? b.x1 : b.y1;
  const double across = g.axis == 0 ? (b.y1 - b.y0) : (b.x1 - b.x0);
  double d0 = g.from_max ? hi - a1 : a0 - lo;
  double d1 = g.from_max ? hi - a0 : a1 - lo;
  // F (e^{-a d0} - e^{-a d1}) written to avoid cancellation
  const double e0 = std::exp(-g.absorption * d0);
  return across * g.photon_flux * e0 * -std::expm1(-g.absorption * (d1 - d0));
}

}  // namespace

double GenerationSpec::at_depth(double d) const {
  if (!enabled()) return 0.0;
  return photon_flux * absorption * std::exp(-absorption * d);
}

double RecombinationSpec::rate(double un, double up) const {
  if (model == Model::Constant) return r0;
  return r_bar / (1.0 + un / n_ref + up / p_ref);
}

std::pair<double, double> RecombinationSpec::rate_partials(double un, double up) const {
  if (model == Model::Constant) return {0.0, 0.0};
  const double d = 1.0 + un / n_ref + up / p_ref;
  const double f = -r_bar / (d * d);
  return {f / n_ref, f / p_ref};
}

void DeviceConfig::validate() const {
  if (dimension != 1 && dimension != 2) throw ValidationError("/device/geometry/dimension", "must be 1 or 2");
  if (dimension == 2) {
    if (!(width > 0) || !std::isfinite(width)) throw ValidationError("/device/geometry/width", "must be positive");
    if (cells_across < 2) throw ValidationError("/device/mesh/cells_across", "each direction needs >= 2 cells");
  }
  if (layers.empty()) throw ValidationError("/device/layers", "at least one layer required");
  int first_perov = -1, last_perov = -1;
  std::set<std::string> layer_names;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    const std::string f = "/device/layers/" + std::to_string(i);
    if (!layer_names.insert(l.name).second) throw ValidationError(f + "/name", "duplicate layer name '" + l.name + "'");
    if (!(l.thickness > 0) || !std::isfinite(l.thickness)) throw ValidationError(f + "/thickness", "must be positive");
    if (l.cells < 2) throw ValidationError(f + "/cells", "each layer must be resolved by >= 2 cells");
    if (!(l.permittivity > 0) || !std::isfinite(l.permittivity))
      throw ValidationError(f + "/permittivity", "(A2) requires permittivity bounded below by a positive constant");
    if (!std::isfinite(l.doping)) throw ValidationError(f + "/doping", "must be finite");
    if (l.region == Region::Perovskite) {
      if (first_perov >= 0 && last_perov != static_cast<int>(i) - 1)
        throw ValidationError(f + "/region", "perovskite layers must be contiguous");
      if (first_perov < 0) first_perov = static_cast<int>(i);
      last_perov = static_cast<int>(i);
    }
  }

  std::set<std::string> ids;
  int n_electron = 0, n_hole = 0;
  for (std::size_t i = 0; i < species.size(); ++i) {
    const auto& s = species[i];
    if (s.id.empty()) throw ValidationError(species_field(i, "id"), "must not be empty");
    if (!ids.insert(s.id).second) throw ValidationError(species_field(i, "id"), "duplicate species id '" + s.id + "'");
    if (s.role == SpeciesRole::Electron) {
      ++n_electron;
      if (s.charge != -1) throw ValidationError(species_field(i, "charge"), "(A2) electrons carry z_n = -1");
    } else if (s.role == SpeciesRole::Hole) {
      ++n_hole;
      if (s.charge != 1) throw ValidationError(species_field(i, "charge"), "(A2) holes carry z_p = +1");
    } else {
      if (s.charge == 0) throw ValidationError(species_field(i, "charge"), "vacancy charge number must be nonzero");
      if (!s.statistics.bounded())
        throw ValidationError(species_field(i, "statistics"), "vacancies require Blakemore statistics");
      if (first_perov < 0)
        throw ValidationError(species_field(i, "id"), "vacancy species need a perovskite layer");
    }
    if (s.role != SpeciesRole::Vacancy && s.statistics.bounded())
      throw ValidationError(species_field(i, "statistics"), "electrons and holes need unbounded statistics");
    if (!(s.mobility_bulk >= 0) || !(s.mobility_perovskite >= 0) || !std::isfinite(s.mobility_bulk) ||
        !std::isfinite(s.mobility_perovskite))
      throw ValidationError(species_field(i, "mobility"), "mobilities must be finite and >= 0");
    if (!(s.n_states > 0) || !std::isfinite(s.n_states))
      throw ValidationError(species_field(i, "density_of_states"), "must be positive");
    if (!std::isfinite(s.zeta)) throw ValidationError(species_field(i, "zeta"), "must be finite");

    // (A4): u_lower <= u0 <= u_upper < N / gamma
    const double a = std::abs(s.initial.perturbation_amplitude);
    if (!(a < 1)) throw ValidationError(species_field(i, "initial/perturbation/amplitude"), "must lie in [0, 1)");
    if (s.initial.perturbation_modes < 1)
      throw ValidationError(species_field(i, "initial/perturbation/modes"), "must be >= 1");
    std::vector<std::pair<std::string, double>> values{{"initial/value", s.initial.value}};
    for (const auto& [name, v] : s.initial.per_layer) {
      if (!layer_names.count(name))
        throw ValidationError(species_field(i, "initial/layers/" + name), "unknown layer");
      values.emplace_back("initial/layers/" + name, v);
    }
    const double limit = s.n_states * s.statistics.upper_limit();
    for (const auto& [key, v] : values) {
      if (!(v > 0) || !std::isfinite(v))
        throw ValidationError(species_field(i, key), "(A4) initial densities must be positive");
      if (v * (1 + a) >= limit * (1 - statistics::kRangeGuard))
        throw ValidationError(species_field(i, key),
                              "(A4) initial vacancy density must stay below N/gamma = " + std::to_string(limit));
    }
  }
  if (n_electron > 1 || n_hole > 1) throw ValidationError("/device/species", "at most one electron and one hole species");

  if (contacts.empty()) throw ValidationError("/device/contacts", "(A1) Dirichlet boundary must have positive measure");
  std::set<std::string> names;
  for (std::size_t i = 0; i < contacts.size(); ++i) {
    const auto& c = contacts[i];
    if (!names.insert(c.name).second) throw ValidationError(contact_field(i, "name"), "duplicate contact name");
    if (dimension == 1 && (c.side == Side::YMin || c.side == Side::YMax))
      throw ValidationError(contact_field(i, "side"), "1D devices only have sides xmin and xmax");
    if (dimension == 1 && (c.from || c.to))
      throw ValidationError(contact_field(i, "from"), "contact extents apply to 2D devices only");
    if (c.from && c.to && !(*c.to > *c.from)) throw ValidationError(contact_field(i, "to"), "must exceed 'from'");
    for (double v : {c.psi, c.phi, c.bias_weight, c.ramp})
      if (!std::isfinite(v)) throw ValidationError(contact_field(i, "psi"), "contact data must be finite");
  }

  if (!(generation.photon_flux >= 0) || !std::isfinite(generation.photon_flux))
    throw ValidationError("/device/generation/photon_flux", "F_ph must be >= 0");
  if (!(generation.absorption >= 0) || !std::isfinite(generation.absorption))
    throw ValidationError("/device/generation/absorption", "alpha_G must be >= 0");
  if (generation.axis < 0 || generation.axis >= dimension)
    throw ValidationError("/device/generation/axis", "axis outside the device dimension");

  const auto& r = recombination;
  if (r.model == RecombinationSpec::Model::Constant) {
    if (!(r.r0 >= 0) || !std::isfinite(r.r0)) throw ValidationError("/device/recombination/r0", "(A3) needs r0 >= 0");
    if (r.r_bar > 0 && r.r0 > r.r_bar) throw ValidationError("/device/recombination/r0", "(A3) needs r0 <= r_bar");
  } else {
    if (!(r.r_bar >= 0) || !std::isfinite(r.r_bar))
      throw ValidationError("/device/recombination/r_bar", "(A3) needs r_bar >= 0");
    if (!(r.n_ref > 0) || !(r.p_ref > 0))
      throw ValidationError("/device/recombination/n_ref", "reference densities must be positive");
  }
}

// ----------------------------------------------------------------------------

int Device::species_index(const std::string& id) const {
  for (std::size_t i = 0; i < species_.size(); ++i)
    if (species_[i].id == id) return static_cast<int>(i);
  return -1;
}

double Device::dirichlet_measure() const {
  double m = 0;
  for (const auto& c : contacts_) m += c.measure;
  return m;
}

Device Device::with_bias(double bias) const {
  Device d = *this;
  d.bias_ = bias;
  return d;
}

double Device::contact_psi(int c, double t) const {
  const auto& k = contacts_[c];
  return k.psi + k.bias_weight * (bias_ + k.ramp * t);
}

double Device::contact_phi(int c, double t) const {
  const auto& k = contacts_[c];
  return k.phi + k.bias_weight * (bias_ + k.ramp * t);
}

std::vector<double> Device::psi_extension(double t) const {
  const std::size_t nc = contacts_.size();
  std::vector<double> val(nc);
  for (std::size_t c = 0; c < nc; ++c) val[c] = contact_psi(static_cast<int>(c), t);
  std::vector<double> out(mesh_.node_count(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t c = 0; c < nc; ++c) out[k] += ext_weights_[k * nc + c] * val[c];
  return out;
}

std::vector<double> Device::phi_extension(double t) const {
  const std::size_t nc = contacts_.size();
  std::vector<double> val(nc);
  for (std::size_t c = 0; c < nc; ++c) val[c] = contact_phi(static_cast<int>(c), t);
  std::vector<double> out(mesh_.node_count(), 0.0);
  for (std::size_t k = 0; k < out.size(); ++k)
    for (std::size_t c = 0; c < nc; ++c) out[k] += ext_weights_[k * nc + c] * val[c];
  return out;
}

bool Device::time_dependent_dirichlet() const {
  return std::any_of(contacts_.begin(), contacts_.end(),
                     [](const Contact& c) { return c.bias_weight != 0 && c.ramp != 0; });
}

double Device::dirichlet_chemical(int species, double psi_d, double phi_d) const {
  const auto& s = species_[species];
  if (s.role == SpeciesRole::Vacancy) return 0.0;
  return s.charge * (phi_d - psi_d);
}

std::uint64_t Device::hash() const {
  Fnv h;
  h.num(mesh_.dimension());
  for (double v : mesh_.x()) h.num(v);
  for (double v : mesh_.y()) h.num(v);
  for (auto r : region_) h.num(static_cast<int>(r));
  for (double v : eps_) h.num(v);
  for (double v : doping_) h.num(v);
  for (const auto& s : species_) {
    h.str(s.id);
    h.num(s.charge);
    h.num(s.mobility_bulk);
    h.num(s.mobility_perovskite);
    h.num(static_cast<int>(s.statistics.kind.family()));
    h.num(s.statistics.kind.gamma());
    h.num(s.statistics.zeta);
    h.num(s.statistics.n_states);
  }
  for (const auto& c : contacts_) {
    h.str(c.name);
    h.num(c.psi);
    h.num(c.phi);
    h.num(c.bias_weight);
    h.num(c.ramp);
    for (int n : c.nodes) h.num(n);
  }
  const auto& g = config_.generation;
  h.num(g.photon_flux);
  h.num(g.absorption);
  h.num(g.axis);
  h.num(static_cast<int>(g.from_max));
  const auto& r = config_.recombination;
  h.num(static_cast<int>(r.model));
  h.num(r.r0);
  h.num(r.r_bar);
  h.num(r.n_ref);
  h.num(r.p_ref);
  h.num(bias_);
  return h.value();
}

// ----------------------------------------------------------------------------

Device build_device(const DeviceConfig& spec) {
  spec.validate();
  Device d;
  d.config_ = spec;
  const int dim = spec.dimension;

  // stack coordinates and layer of each stack interval
  std::vector<double> stack{0.0};
  std::vector<int> interval_layer;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const double s0 = stack.back();
    const auto& L = spec.layers[l];
    for (int k = 1; k <= L.cells; ++k) {
      stack.push_back(k == L.cells ? s0 + L.thickness : s0 + L.thickness * k / L.cells);
      interval_layer.push_back(static_cast<int>(l));
    }
  }
  const double depth = stack.back();
  if (dim == 1) {
    d.mesh_ = FVMesh::interval(stack);
  } else {
    std::vector<double> x(spec.cells_across + 1);
    for (int i = 0; i <= spec.cells_across; ++i) x[i] = spec.width * i / spec.cells_across;
    x.back() = spec.width;
    d.mesh_ = FVMesh::rectangle(x, stack);
  }
  const FVMesh& m = d.mesh_;
  const int nc = m.cell_count();
  const int nn = m.node_count();

  d.region_.resize(nc);
  d.eps_.resize(nc);
  d.doping_.resize(nc);
  d.cell_layer_.resize(nc);
  for (int c = 0; c < nc; ++c) {
    const auto ij = m.cell_ij(c);
    const int l = interval_layer[dim == 1 ? ij[0] : ij[1]];
    const auto& L = spec.layers[l];
    d.cell_layer_[c] = l;
    d.region_[c] = L.region;
    d.eps_[c] = L.permittivity;
    d.doping_[c] = L.doping;
  }

  // node integrals
  const double gen_lo = 0.0;
  const double gen_hi = spec.generation.axis == 0 ? m.x().back() : m.y().back();
  d.vol_perov_.assign(nn, 0.0);
  d.node_doping_.assign(nn, 0.0);
  d.node_generation_.assign(nn, 0.0);
  d.node_generation_point_.assign(nn, 0.0);
  for (const auto& part : m.parts()) {
    const double a = part.box.area();
    if (d.region_[part.cell] == Region::Perovskite) d.vol_perov_[part.node] += a;
    d.node_doping_[part.node] += d.doping_[part.cell] * a;
    d.node_generation_[part.node] += generation_integral(spec.generation, part.box, gen_lo, gen_hi);
  }
  for (int k = 0; k < nn; ++k) {
    const auto p = m.position(k);
    const double a = p[spec.generation.axis];
    d.node_generation_point_[k] = spec.generation.at_depth(spec.generation.from_max ? gen_hi - a : a - gen_lo);
  }

  d.eps_T_.resize(m.edges().size());
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    const auto& E = m.edges()[e];
    double s = 0;
    for (int q = 0; q < E.part_count; ++q) s += d.eps_[E.parts[q].cell] * E.parts[q].measure;
    d.eps_T_[e] = s / E.length;
  }

  // contacts
  d.face_marker_.assign(m.boundary_faces().size(), -1);
  d.node_contact_.assign(nn, -1);
  for (std::size_t ci = 0; ci < spec.contacts.size(); ++ci) {
    const auto& cc = spec.contacts[ci];
    Contact c;
    c.name = cc.name;
    c.psi = cc.psi;
    c.phi = cc.phi;
    c.bias_weight = cc.bias_weight;
    c.ramp = cc.ramp;
    std::set<int> nodes;
    for (std::size_t f = 0; f < m.boundary_faces().size(); ++f) {
      const auto& F = m.boundary_faces()[f];
      if (F.side != cc.side) continue;
      if (dim == 2) {
        const double mid = 0.5 * (F.lo + F.hi);
        if (cc.from && mid < *cc.from) continue;
        if (cc.to && mid > *cc.to) continue;
      }
      if (d.face_marker_[f] >= 0)
        throw ValidationError(contact_field(ci, "side"), "overlaps contact '" + d.contacts_[d.face_marker_[f]].name + "'");
      d.face_marker_[f] = static_cast<int>(ci);
      c.faces.push_back(static_cast<int>(f));
      c.measure += F.measure;
      for (int q = 0; q < F.node_count; ++q) nodes.insert(F.nodes[q]);
    }
    if (c.faces.empty() || !(c.measure > 0))
      throw ValidationError(contact_field(ci, "from"), "(A1) contact covers no boundary face");
    for (int k : nodes) {
      if (d.node_contact_[k] >= 0)
        throw ValidationError(contact_field(ci, "side"), "touches contact '" + d.contacts_[d.node_contact_[k]].name + "'");
      d.node_contact_[k] = static_cast<int>(ci);
    }
    c.nodes.assign(nodes.begin(), nodes.end());
    d.contacts_.push_back(std::move(c));
  }

  // extension weights: w_c proportional to the product of the distances to
  // all other contacts, so w_c = 1 on contact c and the 1D two-contact case
  // is linear interpolation
  const std::size_t ncon = d.contacts_.size();
  d.ext_weights_.assign(static_cast<std::size_t>(nn) * ncon, 0.0);
  for (int k = 0; k < nn; ++k) {
    if (d.node_contact_[k] >= 0) {
      d.ext_weights_[k * ncon + d.node_contact_[k]] = 1.0;
      continue;
    }
    const auto p = m.position(k);
    std::vector<double> dist(ncon, std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < ncon; ++c) {
      for (int q : d.contacts_[c].nodes) {
        const auto r = m.position(q);
        dist[c] = std::min(dist[c], std::hypot(p[0] - r[0], p[1] - r[1]));
      }
    }
    double total = 0;
    for (std::size_t c = 0; c < ncon; ++c) {
      double w = 1;
      for (std::size_t o = 0; o < ncon; ++o)
        if (o != c) w *= dist[o];
      d.ext_weights_[k * ncon + c] = w;
      total += w;
    }
    for (std::size_t c = 0; c < ncon; ++c) d.ext_weights_[k * ncon + c] /= total;
  }

  // species
  const double lateral = dim == 2 ? spec.width : 1.0;
  for (std::size_t si = 0; si < spec.species.size(); ++si) {
    const auto& sc = spec.species[si];
    SpeciesSpec s;
    s.id = sc.id;
    s.role = sc.role;
    s.charge = sc.charge;
    s.mobility_bulk = sc.mobility_bulk;
    s.mobility_perovskite = sc.mobility_perovskite;
    s.statistics = ShiftedStatistics(sc.statistics, sc.zeta, sc.n_states);
    if (s.role == SpeciesRole::Electron) d.electron_ = static_cast<int>(si);
    if (s.role == SpeciesRole::Hole) d.hole_ = static_cast<int>(si);

    const bool perov_only = s.on_perovskite_only();
    SpeciesRegion R;
    R.local.assign(nn, -1);
    for (int k = 0; k < nn; ++k) {
      const double v = perov_only ? d.vol_perov_[k] : m.node_volumes()[k];
      if (v > 0) {
        R.local[k] = static_cast<int>(R.nodes.size());
        R.nodes.push_back(k);
        R.volume.push_back(v);
        R.contact.push_back(perov_only ? -1 : d.node_contact_[k]);
      }
    }
    for (std::size_t e = 0; e < m.edges().size(); ++e) {
      const auto& E = m.edges()[e];
      if (R.local[E.a] < 0 || R.local[E.b] < 0) continue;
      double face = 0, coeff = 0;
      for (int q = 0; q < E.part_count; ++q) {
        const Region r = d.region_[E.parts[q].cell];
        if (perov_only && r != Region::Perovskite) continue;
        face += E.parts[q].measure;
        coeff += s.mobility(r) * E.parts[q].measure;
      }
      if (face > 0) R.edges.push_back({R.local[E.a], R.local[E.b], static_cast<int>(e), coeff / E.length});
    }

    // initial data: control-volume average of the layer values, times a
    // smooth perturbation vanishing at the stack ends
    R.initial.assign(R.nodes.size(), 0.0);
    const auto& init = sc.initial;
    for (int l = 0; l < R.size(); ++l) {
      const int k = R.nodes[l];
      double acc = 0, vol = 0;
      for (const auto& part : m.parts_of_node(k)) {
        if (perov_only && d.region_[part.cell] != Region::Perovskite) continue;
        const auto& lname = spec.layers[d.cell_layer_[part.cell]].name;
        const auto it = init.per_layer.find(lname);
        const double val = it == init.per_layer.end() ? init.value : it->second;
        acc += val * part.box.area();
        vol += part.box.area();
      }
      double u = acc / vol;
      if (init.perturbation_amplitude != 0) {
        const auto p = m.position(k);
        const double sn = p[dim == 1 ? 0 : 1] / depth;
        double mode = std::sin(std::numbers::pi * init.perturbation_modes * sn);
        if (dim == 2) mode *= std::cos(std::numbers::pi * p[0] / lateral);
        u *= 1.0 + init.perturbation_amplitude * mode;
      }
      R.initial[l] = u;
    }
    d.species_.push_back(s);
    d.regions_.push_back(std::move(R));
  }
  return d;
}

Device refine(const Device& device, int factor) {
  if (factor < 1) throw ValidationError("refine", "factor must be >= 1");
  DeviceConfig cfg = device.config();
  for (auto& l : cfg.layers) l.cells *= factor;
  cfg.cells_across *= factor;
  return build_device(cfg).with_bias(device.bias());
}

std::vector<double> generation_profile(const Device& device) {
  const auto& m = device.mesh();
  const auto& g = device.generation();
  const double hi = g.axis == 0 ? m.x().back() : m.y().back();
  std::vector<double> out(m.cell_count(), 0.0);
  if (!g.enabled()) return out;
  for (int c = 0; c < m.cell_count(); ++c) {
    const Box b = m.cell_box(c);
    out[c] = generation_integral(g, b, 0.0, hi) / b.area();
  }
  return out;
}

}  // namespace perosim
