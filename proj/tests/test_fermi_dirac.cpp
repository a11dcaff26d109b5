#include <doctest.h>

#include <cmath>
#include <numbers>

#include "perosim/errors.hpp"
#include "perosim/fermi_dirac.hpp"
#include "perosim/statistics.hpp"
#include "fd_oracle.hpp"

using perosim::fermi_dirac::Order;

using testing::fd_oracle;

TEST_CASE("F_1/2 agrees with an adaptive quadrature oracle at 50 points") {
  const auto fd = perosim::StatisticsKind::fermi_dirac_half();
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    const double z = -30.0 + 75.0 * k / 49.0;  // [-30, 45]: series, table and asymptotic ranges
    const double got = perosim::statistics::eval(fd, z);
    const double want = fd_oracle(0.5, z);
    worst = std::max(worst, std::abs(got - want) / want);
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("F_-1/2 and F_3/2 agree with the oracle") {
  for (double z : {-12.0, -3.0, -0.4, 0.0, 1.7, 6.0, 15.0, 39.5, 41.0, 60.0}) {
    CAPTURE(z);
    CHECK(perosim::fermi_dirac::integral(Order::MinusHalf, z) == doctest::Approx(fd_oracle(-0.5, z)).epsilon(1e-10));
    CHECK(perosim::fermi_dirac::integral(Order::ThreeHalves, z) == doctest::Approx(fd_oracle(1.5, z)).epsilon(1e-10));
  }
}

TEST_CASE("tabulated values reproduce the direct branches") {
  double worst = 0;
  for (double z = -8.5; z <= 40.5; z += 0.0137)
    for (Order o : {Order::MinusHalf, Order::Half, Order::ThreeHalves}) {
      const double a = perosim::fermi_dirac::integral(o, z), b = perosim::fermi_dirac::reference(o, z);
      worst = std::max(worst, std::abs(a - b) / b);
    }
  CHECK(worst < 1e-13);
}

TEST_CASE("half_with_slope returns F_1/2 and its derivative") {
  for (double z : {-10.0, -1.0, 0.3, 5.0, 50.0}) {
    const auto p = perosim::fermi_dirac::half_with_slope(z);
    const double h = 1e-5;
    const double fd = (perosim::fermi_dirac::integral(Order::Half, z + h) -
                       perosim::fermi_dirac::integral(Order::Half, z - h)) / (2 * h);
    CHECK(p.value == doctest::Approx(perosim::fermi_dirac::integral(Order::Half, z)).epsilon(1e-15));
    CHECK(p.slope == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("non-finite arguments are rejected") {
  CHECK_THROWS_AS(perosim::fermi_dirac::integral(Order::Half, std::nan("")), perosim::DomainError);
  CHECK_THROWS_AS(perosim::fermi_dirac::integral(Order::Half, INFINITY), perosim::DomainError);
}
