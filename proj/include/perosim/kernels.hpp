#pragma once

#include <span>
#include <string_view>

// Data-parallel inner loops of the flux assembly.
//
// Every kernel has a scalar reference implementation (namespace `scalar`)
// and, on x86-64 builds, an AVX2+FMA variant (namespace `avx2`). The
// top-level functions dispatch to the best variant the running CPU supports;
// the choice is made once per process and can be pinned with force_isa() or
// the PEROSIM_ISA environment variable ("scalar" / "avx2").

namespace perosim::kernels {

enum class Isa { Scalar, Avx2 };

bool isa_available(Isa isa);
Isa active_isa();
/// Pins the dispatch target. Throws std::invalid_argument if unavailable.
void force_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// Inputs of a batch of Scharfetter-Gummel edge fluxes
///   flux = coeff * (B(drive) * up - B(-drive) * down)
struct FluxInputs {
  std::span<const double> drive;  ///< effective potential jump s on each edge
  std::span<const double> up;     ///< density at the edge's first node
  std::span<const double> down;   ///< density at the edge's second node
  std::span<const double> coeff;  ///< mobility * transmissibility
};

struct FluxOutputs {
  std::span<double> flux;
  std::span<double> d_up;     ///< d flux / d up   = coeff B(s)
  std::span<double> d_down;   ///< d flux / d down = -coeff B(-s)
  std::span<double> d_drive;  ///< d flux / d s    = coeff (B'(s) up + B'(-s) down)
};

/// B(x) = x / (e^x - 1) and B'(x) elementwise.
void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db);
void sg_flux(const FluxInputs& in, const FluxOutputs& out);

namespace scalar {
double bernoulli(double x);
double bernoulli_derivative(double x);
void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db);
void sg_flux(const FluxInputs& in, const FluxOutputs& out);
}  // namespace scalar

namespace avx2 {
void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db);
void sg_flux(const FluxInputs& in, const FluxOutputs& out);
}  // namespace avx2

}  // namespace perosim::kernels
