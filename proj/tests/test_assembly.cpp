#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "perosim/assembly.hpp"
#include "perosim/errors.hpp"
#include "perosim/solver.hpp"
#include "support.hpp"

using namespace perosim;

namespace {

// Bernoulli function in long double, series near zero.
long double bern_ld(long double x) {
  if (std::fabs(x) < 1e-6L) return 1.0L - x / 2.0L + x * x / 12.0L;
  return x / std::expm1(x);
}

// Classical SG flux K -> L written out directly.
double sg_oracle(int z, double coeff, double psiK, double psiL, double uK, double uL) {
  const long double s = static_cast<long double>(z) * (psiL - psiK);
  return static_cast<double>(coeff * (bern_ld(s) * uK - bern_ld(-s) * uL));
}

SpeciesSpec boltzmann_species(int z) {
  SpeciesSpec s;
  s.id = z < 0 ? "n" : "p";
  s.charge = z;
  s.role = z < 0 ? SpeciesRole::Electron : SpeciesRole::Hole;
  return s;
}

// Perturbed state strictly inside the admissible ranges.
State perturbed(const Device& d, std::uint64_t seed, double amp) {
  State s = initial_state(d);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : s.psi) v += amp * U(rng);
  for (auto& block : s.u)
    for (double& v : block) v *= 1.0 + 0.5 * amp * U(rng);
  return s;
}

}  // namespace

TEST_CASE("flux of Boltzmann species: ECP and SG agree with the direct SG formula") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dpsi(-30.0, 30.0), lu(-8.0, 3.0), lc(-2.0, 2.0);
  double worst_ecp = 0, worst_sg = 0;
  for (int z : {-1, 1}) {
    const auto sp = boltzmann_species(z);
    for (int k = 0; k < 500; ++k) {
      const double coeff = std::pow(10.0, lc(rng));
      const double psiK = dpsi(rng) / 2, psiL = dpsi(rng) / 2;
      const double uK = std::exp(lu(rng)), uL = std::exp(lu(rng));
      const double ref = sg_oracle(z, coeff, psiK, psiL, uK, uL);
      const double scale = coeff * (uK + uL) * (1 + std::fabs(psiL - psiK));
      const double ecp = edge_flux(sp, coeff, psiK, psiL, uK, uL, FluxScheme::ExcessChemicalPotential);
      const double sg = edge_flux(sp, coeff, psiK, psiL, uK, uL, FluxScheme::ClassicalSG);
      worst_ecp = std::max(worst_ecp, std::fabs(ecp - ref) / scale);
      worst_sg = std::max(worst_sg, std::fabs(sg - ref) / scale);
    }
  }
  CHECK(worst_ecp <= 1e-12);
  CHECK(worst_sg <= 1e-12);
}

TEST_CASE("flux is antisymmetric under swapping the endpoints") {
  auto c = testing::pin_small(6);
  const Device d = build_device(c);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.05, 0.9), P(-3, 3);
  for (int i = 0; i < 3; ++i) {
    const auto& sp = d.species()[i];
    for (int k = 0; k < 50; ++k) {
      const double a = U(rng), b = U(rng), pa = P(rng), pb = P(rng);
      const double f = edge_flux(sp, 0.7, pa, pb, a, b, FluxScheme::ExcessChemicalPotential);
      const double g = edge_flux(sp, 0.7, pb, pa, b, a, FluxScheme::ExcessChemicalPotential);
      CHECK(std::fabs(f + g) <= 1e-14 * (1 + std::fabs(f)));
    }
  }
}

TEST_CASE("constant electrochemical potential carries no flux for every statistics") {
  auto c = testing::pin_small(6);
  const Device d = build_device(c);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> P(-4, 4), Phi(-1, 1);
  for (int i = 0; i < 3; ++i) {
    const auto& sp = d.species()[i];
    double worst = 0;
    for (int k = 0; k < 200; ++k) {
      const double phi = Phi(rng);
      double psiK = P(rng), psiL = P(rng);
      // u = N F(v + zeta) with v = z (phi - psi); keep vacancies below saturation
      const double vK = sp.charge * (phi - psiK), vL = sp.charge * (phi - psiL);
      const double uK = carrier_density(sp.statistics, vK), uL = carrier_density(sp.statistics, vL);
      if (!(uK > 1e-12 && uL > 1e-12) || uK > 0.999 * sp.statistics.density_limit() ||
          uL > 0.999 * sp.statistics.density_limit())
        continue;
      const double f = edge_flux(sp, 1.0, psiK, psiL, uK, uL, FluxScheme::ExcessChemicalPotential);
      worst = std::max(worst, std::fabs(f) / (uK + uL));
    }
    CAPTURE(sp.id);
    CHECK(worst <= 1e-13);
  }
}

TEST_CASE("classical SG refuses non-Boltzmann statistics") {
  const Device d = build_device(testing::pin_small(6, true));
  CHECK_THROWS_AS(edge_flux(d.species()[0], 1.0, 0, 0.1, 0.5, 0.4, FluxScheme::ClassicalSG), SchemeError);
  CHECK_THROWS_AS(edge_flux(d.species()[2], 1.0, 0, 0.1, 0.5, 0.4, FluxScheme::ClassicalSG), SchemeError);
}

TEST_CASE("Poisson rows reproduce the three-point stencil") {
  const int cells = 10;
  const Device d = build_device(testing::bulk_np(cells));
  const double h = 1.0 / cells;
  State s = initial_state(d);
  const double un = 0.7, up = 1.9;
  for (int k = 0; k <= cells; ++k) {
    const double x = k * h;
    s.psi[k] = x * x;
  }
  std::fill(s.u[0].begin(), s.u[0].end(), un);
  std::fill(s.u[1].begin(), s.u[1].end(), up);
  const auto res = assemble_poisson(d, s);
  // -(psi'') h - h (up - un) with psi'' = 2
  for (int k = 1; k < cells; ++k) CHECK(res.r[k] == doctest::Approx(-2 * h - h * (up - un)).epsilon(1e-13));
  CHECK(res.r[0] == doctest::Approx(0.0));
  CHECK(res.r[cells] == doctest::Approx(1.0));
}

TEST_CASE("analytic Jacobian matches central differences") {
  const Device d = build_device(testing::pin_small(6, true));
  const Layout L(d);
  const State old = perturbed(d, 1, 0.1);
  const State s = perturbed(d, 2, 0.1);
  for (bool stationary : {false, true}) {
    AssemblyOptions opt;
    opt.stationary = stationary;
    const double dt = stationary ? std::numeric_limits<double>::infinity() : 0.05;
    const auto base = assemble_system(d, s, old, dt, opt);
    const Eigen::MatrixXd J(base.J);
    Eigen::VectorXd x = L.pack(s);
    double worst = 0;
    for (int j = 0; j < L.size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::fabs(x[j]));
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      AssemblyOptions o = opt;
      o.jacobian = false;
      const auto rp = assemble_system(d, L.unpack(xp, s.t), old, dt, o).r;
      const auto rm = assemble_system(d, L.unpack(xm, s.t), old, dt, o).r;
      const Eigen::VectorXd fd = (rp - rm) / (2 * h);
      for (int i = 0; i < L.size(); ++i)
        worst = std::max(worst, std::fabs(fd[i] - J(i, j)) / std::max(1.0, std::fabs(J(i, j))));
    }
    CAPTURE(stationary);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("wrongly sized states raise DimensionError") {
  const Device d = build_device(testing::pin_small(6));
  State s = initial_state(d);
  State bad = s;
  bad.psi.pop_back();
  CHECK_THROWS_AS(assemble_poisson(d, bad), DimensionError);
  bad = s;
  bad.u[2].push_back(0.5);
  CHECK_THROWS_AS(assemble_system(d, bad, s, 0.1), DimensionError);
  bad = s;
  bad.u.pop_back();
  CHECK_THROWS_AS(check_dimensions(d, bad), DimensionError);
}

TEST_CASE("one backward Euler step closes the species balance") {
  auto c = testing::pin_small(8, true);
  c.generation.photon_flux = 1.0;
  c.generation.absorption = 2.0;
  const Device d = build_device(c);
  const State s0 = initial_state(d);
  SolverConfig cfg;
  const State s1 = solve_step(d, s0, 0.05, cfg);
  for (int i = 0; i < 3; ++i) {
    const auto b = species_balance(i, d, s1, s0, 0.05);
    CAPTURE(d.species()[i].id);
    CHECK(std::fabs(b.defect()) <= 1e-10);
  }
  // vacancies: no boundary flux, no reactions
  const auto a = species_balance(2, d, s1, s0, 0.05);
  CHECK(std::fabs(a.mass_change) <= 1e-12);
}

TEST_CASE("initial state obeys the Dirichlet data and the bounds") {
  const Device d = build_device(testing::pin_small(8));
  const State s = initial_state(d);
  const auto dd = dirichlet_data(d, 0);
  for (int k = 0; k < d.mesh().node_count(); ++k)
    if (d.node_contact()[k] >= 0) CHECK(s.psi[k] == doctest::Approx(dd.psi[k]));
  CHECK_NOTHROW(check_bounds(d, s));
  State bad = s;
  bad.u[2][1] = 1.5;
  CHECK_THROWS_AS(check_bounds(d, bad), BoundsBreach);
}
