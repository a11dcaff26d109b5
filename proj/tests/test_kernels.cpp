#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "perosim/kernels.hpp"

using namespace perosim::kernels;

namespace {

// Long-double closed form x / (e^x - 1).
double bernoulli_oracle(double x) {
  if (x == 0) return 1.0;
  const long double X = x;
  return static_cast<double>(X / std::expm1l(X));
}

struct Batch {
  std::vector<double> drive, up, down, coeff, flux, d_up, d_down, d_drive;
  explicit Batch(std::size_t n) : drive(n), up(n), down(n), coeff(n), flux(n), d_up(n), d_down(n), d_drive(n) {}
  FluxInputs in() const { return {drive, up, down, coeff}; }
  FluxOutputs out() { return {flux, d_up, d_down, d_drive}; }
};

Batch random_batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> s(-60, 60), small(-1e-3, 1e-3), u(1e-8, 10), c(0.1, 5);
  Batch b(n);
  for (std::size_t k = 0; k < n; ++k) {
    b.drive[k] = k % 7 == 0 ? small(rng) : k % 11 == 0 ? 0.0 : s(rng);
    b.up[k] = u(rng);
    b.down[k] = u(rng);
    b.coeff[k] = c(rng);
  }
  return b;
}

}  // namespace

TEST_CASE("scalar Bernoulli function against the closed form") {
  for (double x = -700; x <= 700; x += 0.731) CHECK(scalar::bernoulli(x) == doctest::Approx(bernoulli_oracle(x)).epsilon(1e-14));
  for (double x : {-1e-12, 1e-9, -3e-5, 0.049, 0.11})
    CHECK(scalar::bernoulli(x) == doctest::Approx(bernoulli_oracle(x)).epsilon(1e-15));
  CHECK(scalar::bernoulli(0.0) == 1.0);
}

TEST_CASE("Bernoulli identities") {
  for (double x : {-20.0, -1.0, -1e-4, 0.0, 2e-3, 0.5, 9.0, 35.0}) {
    CAPTURE(x);
    // B(-x) - B(x) = x
    CHECK(scalar::bernoulli(-x) - scalar::bernoulli(x) == doctest::Approx(x).scale(1.0).epsilon(1e-14));
    const double h = 1e-6;
    const double d = (scalar::bernoulli(x + h) - scalar::bernoulli(x - h)) / (2 * h);
    CHECK(scalar::bernoulli_derivative(x) == doctest::Approx(d).epsilon(1e-7));
  }
}

TEST_CASE("AVX2 flux kernel matches the scalar reference") {
  if (!isa_available(Isa::Avx2)) {
    MESSAGE("AVX2 unavailable on this CPU; equivalence not exercised");
    return;
  }
  const Isa before = active_isa();
  for (std::size_t n : {1u, 3u, 4u, 5u, 17u, 1000u, 1023u}) {
    Batch ref = random_batch(n, n), vec = random_batch(n, n);
    scalar::sg_flux(ref.in(), ref.out());
    force_isa(Isa::Avx2);
    sg_flux(vec.in(), vec.out());
    double worst_flux = 0, worst_deriv = 0;
    for (std::size_t k = 0; k < n; ++k) {
      // flux is a difference of two terms: measure against their magnitudes
      const double s = ref.drive[k];
      const double terms = ref.coeff[k] * (bernoulli_oracle(s) * ref.up[k] + bernoulli_oracle(-s) * ref.down[k]);
      worst_flux = std::max(worst_flux, std::fabs(vec.flux[k] - ref.flux[k]) / terms);
      for (auto [a, b] : {std::pair{vec.d_up[k], ref.d_up[k]}, std::pair{vec.d_down[k], ref.d_down[k]}})
        worst_deriv = std::max(worst_deriv, std::fabs(a - b) / std::max(std::fabs(b), 1e-300));
      worst_deriv = std::max(worst_deriv, std::fabs(vec.d_drive[k] - ref.d_drive[k]) / terms);
    }
    CAPTURE(n);
    CHECK(worst_flux <= 4e-15);
    CHECK(worst_deriv <= 4e-14);
  }
  force_isa(before);
}

TEST_CASE("AVX2 Bernoulli matches the scalar reference") {
  if (!isa_available(Isa::Avx2)) return;
  const Isa before = active_isa();
  std::vector<double> x;
  for (double v = -80; v <= 80; v += 0.0173) x.push_back(v);
  for (double v : {0.0, 1e-14, -1e-14, 0.0999, 0.1, 0.1001, -0.1, 39.99, 40.0, 40.01, -40.0}) x.push_back(v);
  std::vector<double> b1(x.size()), d1(x.size()), b2(x.size()), d2(x.size());
  scalar::bernoulli(x, b1, d1);
  force_isa(Isa::Avx2);
  bernoulli(x, b2, d2);
  force_isa(before);
  for (std::size_t k = 0; k < x.size(); ++k) {
    CAPTURE(x[k]);
    CHECK(b2[k] == doctest::Approx(b1[k]).epsilon(1e-14).scale(1e-300));
    CHECK(d2[k] == doctest::Approx(d1[k]).epsilon(1e-13).scale(1e-300));
  }
}

TEST_CASE("dispatch can be pinned to the scalar path") {
  const Isa before = active_isa();
  force_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(isa_name(Isa::Scalar) == "scalar");
  force_isa(before);
}
