#include <doctest.h>

#include <cmath>
#include <limits>

#include "perosim/diagnostics.hpp"
#include "perosim/solver.hpp"
#include "support.hpp"

using namespace perosim;

TEST_CASE("chemical energy density is a convex potential of v - v_ref") {
  for (const auto& st : {ShiftedStatistics(StatisticsKind::boltzmann(), 0.3, 2.0),
                         ShiftedStatistics(StatisticsKind::fermi_dirac_half(), -0.5, 1.0),
                         ShiftedStatistics(StatisticsKind::blakemore(1.0), 0.0, 1.0)}) {
    const double v_ref = 0.2;
    const double u_ref = carrier_density(st, v_ref);
    CHECK(std::fabs(chemical_energy_density(st, u_ref, v_ref)) <= 1e-14);
    for (double frac : {0.05, 0.3, 0.7, 0.9}) {
      const double u = st.kind.upper_limit() < 1e300 ? frac * st.density_limit() : 4 * frac;
      const double h = 1e-6 * u;
      const double dphi =
          (chemical_energy_density(st, u + h, v_ref) - chemical_energy_density(st, u - h, v_ref)) / (2 * h);
      CHECK(dphi == doctest::Approx(chemical_potential(st, u) - v_ref).epsilon(1e-7));
      CHECK(chemical_energy_density(st, u, v_ref) >= -1e-15);
    }
  }
}

TEST_CASE("free energy vanishes in thermodynamic equilibrium") {
  const Device d = build_device(testing::bulk_np(16));
  REQUIRE(equilibrium_conditions(d));
  SolverConfig cfg;
  const State eq = solve_stationary(d, cfg, 0.0);
  CHECK(std::fabs(free_energy(d, eq)) <= 1e-12);
  CHECK(free_energy(d, initial_state(d)) > 0);
  CHECK(max_quasi_fermi_gap(d, eq) <= 1e-9);
}

TEST_CASE("illumination breaks the equilibrium conditions") {
  auto c = testing::bulk_np(8);
  c.generation.photon_flux = 1;
  c.generation.absorption = 1;
  CHECK(!equilibrium_conditions(build_device(c)));
}

TEST_CASE("mass and gradient norm of a linear profile") {
  const Device d = build_device(testing::bulk_np(10));
  State s = initial_state(d);
  const auto& R = d.species_region(0);
  for (int l = 0; l < R.size(); ++l) s.u[0][l] = 1.0 + d.mesh().position(R.nodes[l])[0];
  CHECK(species_mass(d, s, 0) == doctest::Approx(1.5));
  for (double q : {1.0, 2.0, 4.0, 8.0}) CHECK(gradient_norm(d, s, 0, q) == doctest::Approx(1.0));
}

TEST_CASE("orders from exact power laws") {
  std::vector<double> h, dt, e;
  for (int k = 0; k < 5; ++k) {
    h.push_back(std::ldexp(1.0, -k));
    dt.push_back(0);
    e.push_back(3.0 * std::pow(h.back(), 2));
  }
  const auto r = orders_from_errors(h, dt, e);
  REQUIRE(r.orders.size() == 4);
  for (double p : r.orders) CHECK(p == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(!r.rows.front().order_defined);

  std::fill(e.begin(), e.end(), 0.0);
  CHECK(orders_from_errors(h, dt, e).undefined);
}

TEST_CASE("Poisson discretization converges with second order") {
  const auto r = poisson_manufactured_study({8, 16, 32, 64});
  REQUIRE(r.orders.size() == 3);
  for (double p : r.orders) CHECK(p == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("backward Euler converges with first order") {
  const Device d = build_device(testing::bulk_np(20));
  SolverConfig cfg;
  const auto r = temporal_study(d, 0.5, {0.1, 0.05, 0.025, 0.0125}, cfg);
  REQUIRE(!r.orders.empty());
  CHECK(r.orders.back() == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("energy decay check flags increases") {
  std::vector<DiagnosticsReport> reps(3);
  reps[0].free_energy = 1.0;
  reps[1].free_energy = 0.5;
  reps[2].free_energy = 0.25;
  CHECK(energy_decay_check(reps, true).pass);
  reps[2].free_energy = 0.5 + 1e-6;
  const auto bad = energy_decay_check(reps, true);
  CHECK(!bad.pass);
  CHECK(bad.worst_increase == doctest::Approx(1e-6));
}

TEST_CASE("bounds report gives margins to both limits") {
  const Device d = build_device(testing::pin_small(6));
  State s = initial_state(d);
  const auto rep = bounds_report(d, s);
  REQUIRE(rep.size() == 3);
  for (const auto& b : rep) CHECK(!b.breach);
  std::fill(s.u[2].begin(), s.u[2].end(), 0.8);
  const auto vac = bounds_report(d, s)[2];
  CHECK(vac.margin == doctest::Approx(0.2));
}
