#pragma once

// Complete Fermi-Dirac integrals
//
//   F_j(z) = 1/Gamma(j+1) * int_0^inf xi^j / (exp(xi - z) + 1) dxi
//
// for the half-integer orders the simulator needs. With this normalization
// dF_j/dz = F_{j-1}, so F_{-1/2} is the slope of F_{1/2} and F_{3/2} its
// antiderivative.
//
// Three branches:
//   z <= -0.5       alternating series  sum (-1)^(k+1) e^(kz) / k^(j+1)
//   -0.5 < z <= 40  composite 16-point Gauss-Legendre in t = sqrt(xi), panel
//                   width tied to the distance of the integrand's nearest
//                   complex pole
//   z > 40          Sommerfeld expansion (exponentially small remainder)
// Each branch targets 1e-13 relative accuracy. `reference` evaluates these
// branches directly; `integral` replaces the quadrature range by piecewise
// Chebyshev interpolants built from it once (series below z = -8).

namespace perosim::fermi_dirac {

enum class Order { MinusHalf, Half, ThreeHalves };

double integral(Order order, double z);
double reference(Order order, double z);

struct HalfPair {
  double value;  ///< F_{1/2}(z)
  double slope;  ///< F_{-1/2}(z) = F_{1/2}'(z)
};

/// F_{1/2} and its derivative from one pass over the quadrature nodes.
HalfPair half_with_slope(double z);

}  // namespace perosim::fermi_dirac
