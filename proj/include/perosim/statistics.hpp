#pragma once

#include <span>
#include <string>
#include <vector>

namespace perosim {

enum class StatisticsFamily { Boltzmann, FermiDiracHalf, Blakemore };

/// A carrier statistics function F: R -> (0, sup F), strictly increasing.
///   Boltzmann        F(z) = e^z
///   FermiDiracHalf   F(z) = F_{1/2}(z)
///   Blakemore(g)     F(z) = 1 / (e^{-z} + g),  values in (0, 1/g)
class StatisticsKind {
 public:
  static StatisticsKind boltzmann() { return StatisticsKind(StatisticsFamily::Boltzmann, 0.0); }
  static StatisticsKind fermi_dirac_half() {
    return StatisticsKind(StatisticsFamily::FermiDiracHalf, 0.0);
  }
  /// Throws ValidationError unless gamma > 0.
  static StatisticsKind blakemore(double gamma);

  StatisticsFamily family() const noexcept { return family_; }
  double gamma() const noexcept { return gamma_; }
  bool bounded() const noexcept { return family_ == StatisticsFamily::Blakemore; }
  /// Supremum of F: +inf, or 1/gamma for Blakemore.
  double upper_limit() const noexcept;
  std::string name() const;

  friend bool operator==(const StatisticsKind&, const StatisticsKind&) = default;

 private:
  StatisticsKind(StatisticsFamily family, double gamma) : family_(family), gamma_(gamma) {}
  StatisticsFamily family_;
  double gamma_;
};

namespace statistics {

/// Relative distance to an open-range endpoint inside which inverses refuse
/// to evaluate.
inline constexpr double kRangeGuard = 1e-14;

double eval(const StatisticsKind& kind, double z);
double deriv(const StatisticsKind& kind, double z);
/// Closed form for Boltzmann and Blakemore; central difference of deriv()
/// for Fermi-Dirac.
double second_deriv(const StatisticsKind& kind, double z);
/// Antiderivative A with A' = F and A(-inf) = 0.
double antiderivative(const StatisticsKind& kind, double z);

/// F^{-1}(u). Closed forms for Boltzmann and Blakemore; Newton on ln F for
/// Fermi-Dirac. Throws RangeError outside the guarded open range.
double inverse(const StatisticsKind& kind, double u);
/// Newton on ln F - ln u from above ln u, usable for every family (ln F is
/// concave, so the iterates settle on the right of the root and decrease).
double inverse_numeric(const StatisticsKind& kind, double u);

}  // namespace statistics

/// e(y) = F(y + zeta) scaled by the density of states: u = N e(v).
struct ShiftedStatistics {
  StatisticsKind kind = StatisticsKind::boltzmann();
  double zeta = 0.0;
  double n_states = 1.0;

  ShiftedStatistics() = default;
  /// Throws ValidationError unless n_states > 0 and zeta is finite.
  ShiftedStatistics(StatisticsKind k, double zeta_shift, double density_of_states);

  /// Largest admissible density N sup F (infinite unless Blakemore).
  double density_limit() const noexcept { return n_states * kind.upper_limit(); }
};

double carrier_density(const ShiftedStatistics& s, double v);
double chemical_potential(const ShiftedStatistics& s, double u);
/// g(u) = (u/N) (e^{-1})'(u/N): 1 for Boltzmann, 1/(1 - gamma u/N) for
/// Blakemore.
double diffusion_enhancement(const ShiftedStatistics& s, double u);

/// Quantities the flux and reaction terms need at one node.
///   eta       = v + zeta = F^{-1}(u/N)
///   log_gamma = ln(u/N) - eta, the degeneracy correction (0 for Boltzmann)
///   dlog_gamma_du = (1 - g) / u
struct DensityPoint {
  double eta;
  double log_gamma;
  double enhancement;
  double dlog_gamma_du;
};

DensityPoint density_point(const ShiftedStatistics& s, double u);

struct AxiomCheck {
  std::string axiom;  ///< e.g. "F12(iii) 0<F'<=F<=e^z"
  double z;
  bool pass;
  double value;  ///< quantity tested (ratio or difference)
};

struct AxiomReport {
  StatisticsKind kind = StatisticsKind::boltzmann();
  std::vector<AxiomCheck> checks;
  /// Smallest c satisfying the existential bound on the grid:
  /// z <= c(1+F(z)) for electron/hole kinds, (e^z F'(z))^{-1} < c for
  /// bounded kinds.
  double empirical_c = 0.0;
  bool all_pass() const;
};

/// Checks the axiom set that applies to the family: the unbounded set
/// (C^1, growth, 0 < F' <= F <= e^z) for Boltzmann / Fermi-Dirac, the
/// bounded set (limits, F' < F < e^z, concavity, (e^z F')^{-1} bounds) for
/// Blakemore. Failures are report entries; the call never throws.
AxiomReport verify_axioms(const StatisticsKind& kind, std::span<const double> grid);

}  // namespace perosim
