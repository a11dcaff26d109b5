#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "perosim/errors.hpp"
#include "perosim/statistics.hpp"

using namespace perosim;

namespace {
std::vector<double> grid(double a, double b, int n) {
  std::vector<double> g;
  for (int k = 0; k < n; ++k) g.push_back(a + (b - a) * k / (n - 1));
  return g;
}
const StatisticsKind kKinds[] = {StatisticsKind::boltzmann(), StatisticsKind::fermi_dirac_half(),
                                 StatisticsKind::blakemore(1.0), StatisticsKind::blakemore(0.27)};
}  // namespace

TEST_CASE("axioms hold for the unbounded statistics on [-30, 30]") {
  for (const auto& k : {StatisticsKind::boltzmann(), StatisticsKind::fermi_dirac_half()}) {
    const auto g = grid(-30, 30, 601);
    const auto r = verify_axioms(k, g);
    CAPTURE(k.name());
    CHECK(r.all_pass());
    CHECK(r.empirical_c > 0);
    CHECK(std::isfinite(r.empirical_c));
  }
}

TEST_CASE("Blakemore axioms hold on [0, 30]") {
  const auto r = verify_axioms(StatisticsKind::blakemore(1.0), grid(0, 30, 301));
  CHECK(r.all_pass());
  CHECK(r.empirical_c == doctest::Approx(4.0));  // 1 / (e^z F'(z)) = (1 + e^{-z})^2 peaks at z = 0
}

TEST_CASE("inverse undoes eval") {
  // rounding u moves z by about eps u / F'(z); near the Blakemore ceiling that dominates
  const double eps = std::numeric_limits<double>::epsilon();
  for (const auto& k : kKinds)
    for (double z = -25; z <= 25; z += 0.37) {
      CAPTURE(k.name());
      CAPTURE(z);
      const double u = statistics::eval(k, z);
      const double tol = 1e-12 * std::max(1.0, std::fabs(z)) + 4 * eps * u / statistics::deriv(k, z);
      CHECK(std::fabs(statistics::inverse(k, u) - z) <= tol);
      CHECK(std::fabs(statistics::inverse_numeric(k, u) - z) <= tol);
    }
}

TEST_CASE("inverse rejects densities outside the range") {
  CHECK_THROWS_AS(statistics::inverse(StatisticsKind::boltzmann(), 0.0), RangeError);
  CHECK_THROWS_AS(statistics::inverse(StatisticsKind::fermi_dirac_half(), -1.0), RangeError);
  CHECK_THROWS_AS(statistics::inverse(StatisticsKind::blakemore(1.0), 1.0), RangeError);
  CHECK_THROWS_AS(statistics::inverse(StatisticsKind::blakemore(2.0), 0.6), RangeError);
}

TEST_CASE("deriv and antiderivative are consistent with eval") {
  const double h = 1e-5;
  for (const auto& k : kKinds)
    for (double z : {-12.0, -2.0, -0.1, 0.8, 4.0, 11.0}) {
      CAPTURE(k.name());
      CAPTURE(z);
      const double f = statistics::eval(k, z);
      const double dF = (statistics::eval(k, z + h) - statistics::eval(k, z - h)) / (2 * h);
      const double dA = (statistics::antiderivative(k, z + h) - statistics::antiderivative(k, z - h)) / (2 * h);
      CHECK(statistics::deriv(k, z) == doctest::Approx(dF).epsilon(1e-8));
      CHECK(dA == doctest::Approx(f).epsilon(1e-8));
    }
}

TEST_CASE("Blakemore closed forms") {
  const auto k = StatisticsKind::blakemore(0.5);
  for (double z : {-3.0, 0.0, 2.5}) {
    CHECK(statistics::eval(k, z) == doctest::Approx(1.0 / (std::exp(-z) + 0.5)));
    CHECK(statistics::antiderivative(k, z) == doctest::Approx(2.0 * std::log1p(0.5 * std::exp(z))));
  }
  CHECK(k.upper_limit() == doctest::Approx(2.0));
  CHECK_THROWS_AS(StatisticsKind::blakemore(0.0), ValidationError);
}

TEST_CASE("density_point fields") {
  const ShiftedStatistics s(StatisticsKind::fermi_dirac_half(), 0.3, 2.0);
  for (double u : {1e-6, 0.1, 1.0, 5.0, 40.0}) {
    CAPTURE(u);
    const auto p = density_point(s, u);
    CHECK(p.eta == doctest::Approx(statistics::inverse(s.kind, u / 2.0)));
    CHECK(p.log_gamma == doctest::Approx(std::log(u / 2.0) - p.eta));
    // d/du [ln(u/N) - eta] with d eta/du = 1 / (N F'(eta))
    const double d = 1.0 / u - 1.0 / (2.0 * statistics::deriv(s.kind, p.eta));
    CHECK(p.dlog_gamma_du == doctest::Approx(d).epsilon(1e-8));
    CHECK(p.enhancement >= 1.0 - 1e-12);
  }
  CHECK(chemical_potential(s, carrier_density(s, 0.7)) == doctest::Approx(0.7));
  CHECK(diffusion_enhancement(ShiftedStatistics(StatisticsKind::boltzmann(), 0, 1), 3.0) == doctest::Approx(1.0));
}
