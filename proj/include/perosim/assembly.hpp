#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "perosim/device.hpp"

namespace perosim {

/// Discrete fields at one time. psi lives on every mesh node; u[i] lives on
/// the nodes of species i's region (local numbering of SpeciesRegion).
struct State {
  double t = 0;
  std::vector<double> psi;
  std::vector<std::vector<double>> u;
};

enum class FluxScheme { ClassicalSG, ExcessChemicalPotential };

/// Position of every unknown in the global vector: psi first, then the
/// species blocks in roster order.
class Layout {
 public:
  explicit Layout(const Device& d);
  int size() const { return size_; }
  int psi(int node) const { return node; }
  int species(int i, int local) const { return offset_[i] + local; }
  int offset(int i) const { return offset_[i]; }
  int block_size(int i) const { return offset_[i + 1] - offset_[i]; }
  int species_count() const { return static_cast<int>(offset_.size()) - 1; }

  Eigen::VectorXd pack(const State& s) const;
  State unpack(const Eigen::VectorXd& x, double t) const;

 private:
  int size_ = 0;
  std::vector<int> offset_;
};

struct Residual {
  Eigen::VectorXd r;
  Eigen::SparseMatrix<double> J;  ///< column-major, fixed pattern per device
  std::vector<int> block_offset;  ///< Poisson block, then one per species
};

struct AssemblyOptions {
  FluxScheme scheme = FluxScheme::ExcessChemicalPotential;
  bool jacobian = true;
  /// dt = infinity: drop the time term; the last row of each vacancy block is
  /// replaced by its mass constraint, frozen species keep u = u_old.
  bool stationary = false;
};

double bernoulli(double x);

/// Flux across one edge, out of K into L, with derivatives.
struct EdgeFlux {
  double flux = 0;
  double d_uK = 0, d_uL = 0;
  double d_psiK = 0, d_psiL = 0;
};

/// `coeff` is mobility times transmissibility. Throws SchemeError for
/// ClassicalSG with non-Boltzmann statistics.
EdgeFlux edge_flux_full(const SpeciesSpec& species, double coeff, double psiK, double psiL, double uK, double uL,
                        FluxScheme scheme);
double edge_flux(const SpeciesSpec& species, double coeff, double psiK, double psiL, double uK, double uL,
                 FluxScheme scheme);
/// Flux across edge `e` of species i's region in `state`.
double edge_flux(const Device& d, int species, int e, const State& state, FluxScheme scheme);

/// Net recombination minus generation R - G, with
///   R = r0(un, up) (un up - Nn Np e^{zeta_n + zeta_p} gamma_n gamma_p),
/// gamma the degeneracy factors u / (N e^{v + zeta}).
double reaction_Q(const Device& d, double un, double up, double G);
/// R and its partial derivatives in un, up.
struct Recombination {
  double R = 0, dR_dun = 0, dR_dup = 0;
};
Recombination recombination(const Device& d, double un, double up);

/// Dirichlet values at time t: psi^D per node (extension) and u^D per local
/// node of each species (meaningful on contact nodes).
struct DirichletData {
  std::vector<double> psi;
  std::vector<std::vector<double>> u;
};
DirichletData dirichlet_data(const Device& d, double t);

/// Poisson rows only (r has node_count entries; J has node_count rows).
Residual assemble_poisson(const Device& d, const State& state);
/// Continuity rows of species i (r has the block size; J has block-size rows
/// and full-width columns).
Residual assemble_continuity(int species, const Device& d, const State& state, const State& old, double dt,
                             const AssemblyOptions& opt = {});
Residual assemble_system(const Device& d, const State& state, const State& old, double dt,
                         const AssemblyOptions& opt = {});

/// Initial state: u^0 from the device with Dirichlet values on contacts and
/// psi from the (linear) Poisson problem for those densities.
State initial_state(const Device& d);
/// Throws DimensionError when array sizes do not match the device.
void check_dimensions(const Device& d, const State& s);
/// Throws BoundsBreach if any density leaves its open range.
void check_bounds(const Device& d, const State& s);

/// Boundary outflow of species i through each contact during a step, plus the
/// balance pieces used by the bookkeeping identity.
struct SpeciesBalance {
  double mass_change = 0;        ///< sum vol (u - u_old), all nodes
  double reaction = 0;           ///< dt sum vol (G - R), non-Dirichlet nodes
  double dirichlet_inflow = 0;   ///< dt sum of fluxes from Dirichlet into interior nodes
  double dirichlet_change = 0;   ///< sum vol (u - u_old) on Dirichlet nodes
  double defect() const { return mass_change - reaction - dirichlet_inflow - dirichlet_change; }
};
SpeciesBalance species_balance(int species, const Device& d, const State& state, const State& old, double dt,
                               FluxScheme scheme = FluxScheme::ExcessChemicalPotential);

/// Electric current into each contact (sum of z_i times species outflow).
std::vector<double> terminal_currents(const Device& d, const State& state, const State& old, double dt,
                                      FluxScheme scheme = FluxScheme::ExcessChemicalPotential);

/// Quasi Fermi potential phi_i = psi + v_i / z_i per local node.
std::vector<double> quasi_fermi(const Device& d, int species, const State& s);

}  // namespace perosim
