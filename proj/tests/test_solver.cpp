#include <doctest.h>

#include <cmath>
#include <limits>

#include "perosim/errors.hpp"
#include "perosim/solver.hpp"
#include "support.hpp"

using namespace perosim;

namespace {
double max_abs_diff(const std::vector<double>& a, double v) {
  double m = 0;
  for (double x : a) m = std::max(m, std::fabs(x - v));
  return m;
}
}  // namespace

TEST_CASE("stationary state of an undoped grounded bulk is flat") {
  const Device d = build_device(testing::bulk_np(20));
  SolverConfig cfg;
  const State s = solve_stationary(d, cfg, 0.0);
  // psi^D = phi^D = 0 and N = 1: u = 1, psi = 0 everywhere
  CHECK(max_abs_diff(s.psi, 0.0) <= 1e-9);
  CHECK(max_abs_diff(s.u[0], 1.0) <= 1e-9);
  CHECK(max_abs_diff(s.u[1], 1.0) <= 1e-9);
}

TEST_CASE("transient relaxes towards the stationary state") {
  const Device d = build_device(testing::bulk_np(20));
  SolverConfig cfg;
  cfg.dt_initial = 0.01;
  const auto traj = run_transient(d, 20.0, cfg);
  REQUIRE(!traj.aborted);
  const State& last = traj.states.back();
  CHECK(last.t == doctest::Approx(20.0));
  CHECK(max_abs_diff(last.u[0], 1.0) <= 1e-6);
  CHECK(max_abs_diff(last.psi, 0.0) <= 1e-6);
  for (std::size_t k = 1; k < traj.reports.size(); ++k)
    CHECK(traj.reports[k].free_energy <= traj.reports[k - 1].free_energy + 1e-12);
}

TEST_CASE("fixed step mode keeps the requested step") {
  const Device d = build_device(testing::bulk_np(10));
  SolverConfig cfg;
  cfg.adaptive = false;
  cfg.dt_initial = 0.1;
  const auto traj = run_transient(d, 1.0, cfg);
  REQUIRE(traj.dts.size() == 11);  // leading entry belongs to the initial state
  for (std::size_t k = 1; k < traj.dts.size(); ++k) CHECK(traj.dts[k] == doctest::Approx(0.1));
}

TEST_CASE("Gummel and Newton agree on one step") {
  const Device d = build_device(testing::pin_small(8, true));
  const State s0 = initial_state(d);
  SolverConfig newton, gummel;
  gummel.gummel = true;
  gummel.gummel_tol = 1e-12;
  gummel.gummel_max_iters = 2000;
  const State a = solve_step(d, s0, 0.02, newton);
  const State b = solve_step(d, s0, 0.02, gummel);
  CHECK(state_distance(a, b) <= 1e-8);
}

TEST_CASE("identical solver paths give identical trajectories") {
  const Device d = build_device(testing::pin_small(6, true));
  SolverConfig cfg;
  const auto r = uniqueness_probe(d, 0.5, cfg, 3, 42, false);
  CHECK(!r.failed);
  CHECK(r.max_discrepancy == 0.0);
}

TEST_CASE("different solver paths reach the same trajectory") {
  const Device d = build_device(testing::pin_small(6, true));
  SolverConfig cfg;
  const auto r = uniqueness_probe(d, 0.5, cfg, 4, 42, true);
  CHECK(r.runs.size() == 4);
  CHECK(r.threshold == doctest::Approx(10 * cfg.newton_tol));
  CHECK(r.pass());
  CHECK(!r.reference.times.empty());
}

TEST_CASE("a step size floor above the feasible step aborts with the partial trajectory") {
  auto c = testing::pin_small(6, true);
  c.contacts[1].psi = 40.0;  // violent switch-on
  const Device d = build_device(c);
  SolverConfig cfg;
  cfg.max_newton_iters = 2;
  cfg.dt_initial = 1.0;
  cfg.dt_min = 0.5;
  bool thrown = false;
  try {
    run_transient(d, 5.0, cfg);
  } catch (const TransientAbort& e) {
    thrown = true;
    CHECK(!e.partial().states.empty());
    CHECK(e.partial().states.front().t == 0.0);
    CHECK(e.last_attempt().psi.size() == d.mesh().node_count());
  }
  CHECK(thrown);
}

TEST_CASE("solver settings are validated by field") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.newton_tol = -1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.dt_min = 2;
  cfg.dt_max = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
