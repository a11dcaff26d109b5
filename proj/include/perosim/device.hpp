#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perosim/mesh.hpp"
#include "perosim/statistics.hpp"

namespace perosim {

enum class Region : std::uint8_t { Bulk, Perovskite };
enum class SpeciesRole { Electron, Hole, Vacancy };

// ---------------------------------------------------------------- config ---

struct LayerConfig {
  std::string name;
  double thickness = 0;
  int cells = 0;
  Region region = Region::Bulk;
  double permittivity = 1;
  double doping = 0;
};

struct InitialConfig {
  double value = 1;
  std::map<std::string, double> per_layer;  ///< overrides by layer name
  double perturbation_amplitude = 0;        ///< relative, multiplies a sine mode
  int perturbation_modes = 1;
};

struct SpeciesConfig {
  std::string id;
  SpeciesRole role = SpeciesRole::Electron;
  int charge = -1;
  double mobility_bulk = 1;
  double mobility_perovskite = 1;
  StatisticsKind statistics = StatisticsKind::boltzmann();
  double zeta = 0;
  double n_states = 1;
  InitialConfig initial;
};

struct ContactConfig {
  std::string name;
  Side side = Side::XMin;
  std::optional<double> from, to;  ///< 2D only: extent along the side
  double psi = 0;
  double phi = 0;
  double bias_weight = 0;  ///< psi^D and phi^D shift by weight * (bias + ramp t)
  double ramp = 0;
};

struct GenerationSpec {
  double photon_flux = 0;  ///< F_ph
  double absorption = 0;   ///< alpha_G
  int axis = 0;            ///< 0 = x, 1 = y
  bool from_max = false;   ///< light enters at the upper end of the axis
  bool enabled() const { return photon_flux > 0 && absorption > 0; }
  /// G at depth d below the illuminated surface.
  double at_depth(double d) const;
};

struct RecombinationSpec {
  enum class Model { Constant, SrhLike };
  Model model = Model::Constant;
  double r0 = 0;
  double r_bar = 0;
  double n_ref = 1;
  double p_ref = 1;
  double rate(double un, double up) const;
  /// d rate / d un, d rate / d up
  std::pair<double, double> rate_partials(double un, double up) const;
};

struct UnitsConfig {
  std::optional<double> thermal_voltage;  ///< U_T in volts
  std::optional<double> thermal_energy;   ///< k_B T in eV
  std::optional<double> length;           ///< length scale in metres
};

struct DeviceConfig {
  int dimension = 1;
  double width = 1;   ///< lateral extent (2D)
  int cells_across = 1;  ///< lateral cells (2D)
  std::vector<LayerConfig> layers;  ///< stacked along x (1D) or y (2D)
  std::vector<SpeciesConfig> species;
  std::vector<ContactConfig> contacts;
  GenerationSpec generation;
  RecombinationSpec recombination;
  UnitsConfig units;

  /// Semantic checks; throws ValidationError naming the field.
  void validate() const;
};

// ---------------------------------------------------------------- device ---

struct SpeciesSpec {
  std::string id;
  SpeciesRole role = SpeciesRole::Electron;
  int charge = -1;
  double mobility_bulk = 1;
  double mobility_perovskite = 1;
  ShiftedStatistics statistics;

  bool on_perovskite_only() const { return role == SpeciesRole::Vacancy; }
  double mobility(Region r) const { return r == Region::Perovskite ? mobility_perovskite : mobility_bulk; }
  bool frozen() const { return mobility_bulk == 0 && mobility_perovskite == 0; }
};

/// Discretization data of one species on its region: local node numbering,
/// control volumes restricted to the region, and edge coefficients mu * T.
struct SpeciesRegion {
  struct Edge {
    int a = 0, b = 0;  ///< local node ids
    int mesh_edge = 0;
    double coeff = 0;
  };
  std::vector<int> nodes;          ///< local -> global node
  std::vector<int> local;          ///< global -> local, -1 outside
  std::vector<double> volume;      ///< per local node
  std::vector<Edge> edges;
  std::vector<int> contact;        ///< per local node: contact id or -1
  std::vector<double> initial;     ///< u^0 per local node
  int size() const { return static_cast<int>(nodes.size()); }
};

struct Contact {
  std::string name;
  double psi = 0, phi = 0, bias_weight = 0, ramp = 0;
  std::vector<int> faces;  ///< boundary face ids
  std::vector<int> nodes;
  double measure = 0;
};

class Device {
 public:
  const FVMesh& mesh() const { return mesh_; }
  const DeviceConfig& config() const { return config_; }
  int dimension() const { return mesh_.dimension(); }
  int stack_axis() const { return mesh_.dimension() == 1 ? 0 : 1; }

  const std::vector<Region>& region() const { return region_; }
  const std::vector<double>& permittivity() const { return eps_; }
  const std::vector<double>& doping() const { return doping_; }
  const std::vector<int>& cell_layer() const { return cell_layer_; }

  const std::vector<SpeciesSpec>& species() const { return species_; }
  const SpeciesRegion& species_region(int i) const { return regions_[i]; }
  int species_index(const std::string& id) const;  ///< -1 if absent
  int electron() const { return electron_; }
  int hole() const { return hole_; }

  const std::vector<Contact>& contacts() const { return contacts_; }
  const std::vector<int>& node_contact() const { return node_contact_; }
  /// Marker per boundary face: contact id (Dirichlet) or -1 (Neumann).
  const std::vector<int>& face_marker() const { return face_marker_; }
  double dirichlet_measure() const;

  const GenerationSpec& generation() const { return config_.generation; }
  const RecombinationSpec& recombination() const { return config_.recombination; }

  /// Per node: full control volume, perovskite part, integral of C, integral
  /// of G over the control volume.
  const std::vector<double>& node_volume() const { return mesh_.node_volumes(); }
  const std::vector<double>& node_volume_perovskite() const { return vol_perov_; }
  const std::vector<double>& node_doping() const { return node_doping_; }
  const std::vector<double>& node_generation() const { return node_generation_; }
  /// G evaluated at node positions.
  const std::vector<double>& node_generation_point() const { return node_generation_point_; }
  /// eps * T per mesh edge.
  const std::vector<double>& edge_permittivity() const { return eps_T_; }

  double bias() const { return bias_; }
  Device with_bias(double bias) const;

  double contact_psi(int c, double t) const;
  double contact_phi(int c, double t) const;
  /// Extension of psi^D / phi^D to every node (interpolation of contact
  /// values by inverse distance products; exact on contacts).
  std::vector<double> psi_extension(double t) const;
  std::vector<double> phi_extension(double t) const;
  /// Whether contact data vary in time.
  bool time_dependent_dirichlet() const;
  /// Chemical potential v^D of a species at a node (0 for vacancies).
  double dirichlet_chemical(int species, double psi_d, double phi_d) const;

  std::uint64_t hash() const;

 private:
  friend Device build_device(const DeviceConfig& spec);
  DeviceConfig config_;
  FVMesh mesh_;
  std::vector<Region> region_;
  std::vector<double> eps_, doping_;
  std::vector<int> cell_layer_;
  std::vector<SpeciesSpec> species_;
  std::vector<SpeciesRegion> regions_;
  int electron_ = -1, hole_ = -1;
  std::vector<Contact> contacts_;
  std::vector<int> node_contact_, face_marker_;
  std::vector<double> ext_weights_;  ///< node-major, contacts_.size() per node
  std::vector<double> vol_perov_, node_doping_, node_generation_, node_generation_point_, eps_T_;
  double bias_ = 0;
};

Device build_device(const DeviceConfig& spec);
Device refine(const Device& device, int factor);
/// Cell averages of the Beer-Lambert profile (exact integrals / |cell|).
std::vector<double> generation_profile(const Device& device);

}  // namespace perosim
