#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "perosim/kernels.hpp"

namespace perosim::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(PEROSIM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa detect() {
  if (const char* env = std::getenv("PEROSIM_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && cpu_has_avx2()) return Isa::Avx2;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("kernel ISA not available on this CPU");
  active().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db) {
#if defined(PEROSIM_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::bernoulli(x, b, db);
#endif
  scalar::bernoulli(x, b, db);
}

void sg_flux(const FluxInputs& in, const FluxOutputs& out) {
#if defined(PEROSIM_HAVE_AVX2)
  if (active_isa() == Isa::Avx2) return avx2::sg_flux(in, out);
#endif
  scalar::sg_flux(in, out);
}

#if !defined(PEROSIM_HAVE_AVX2)
namespace avx2 {
void bernoulli(std::span<const double> x, std::span<double> b, std::span<double> db) {
  scalar::bernoulli(x, b, db);
}
void sg_flux(const FluxInputs& in, const FluxOutputs& out) { scalar::sg_flux(in, out); }
}  // namespace avx2
#endif

}  // namespace perosim::kernels
