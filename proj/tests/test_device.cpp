#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>

#include "perosim/errors.hpp"
#include "support.hpp"

using namespace perosim;

namespace {
std::string validation_message(const DeviceConfig& c) {
  try {
    c.validate();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}
}  // namespace

TEST_CASE("devices without contacts are rejected citing (A1)") {
  auto c = testing::pin_small();
  c.contacts.clear();
  CHECK(validation_message(c).find("(A1)") != std::string::npos);
}

TEST_CASE("duplicate species ids are rejected") {
  auto c = testing::pin_small();
  c.species[1].id = "n";
  CHECK(validation_message(c).find("duplicate") != std::string::npos);
}

TEST_CASE("vacancy initial data must respect the Blakemore bound (A4)") {
  auto c = testing::pin_small();
  c.species[2].initial.value = 0.9;  // 0.9 * (1 + 0.4) > 1
  const std::string msg = validation_message(c);
  CHECK(msg.find("(A4)") != std::string::npos);
  CHECK(msg.find("/device/species/2/initial") != std::string::npos);
}

TEST_CASE("vacancies need a perovskite layer and bounded statistics") {
  auto c = testing::pin_small();
  c.species[2].statistics = StatisticsKind::boltzmann();
  CHECK_FALSE(validation_message(c).empty());
  auto d = testing::pin_small();
  d.layers[1].region = Region::Bulk;
  CHECK_FALSE(validation_message(d).empty());
}

TEST_CASE("vacancy unknowns live on perovskite nodes only") {
  const Device d = build_device(testing::pin_small(8));
  const auto& R = d.species_region(2);
  CHECK(R.size() == 9);  // 8 perovskite cells
  double v = 0;
  for (double x : R.volume) v += x;
  CHECK(v == doctest::Approx(0.4));
  for (int c : R.contact) CHECK(c == -1);
  CHECK(d.species_region(0).size() == d.mesh().node_count());
}

TEST_CASE("generation follows Beer-Lambert exactly") {
  auto c = testing::pin_small(8);
  c.generation = {2.0, 3.0, 0, false};
  const Device d = build_device(c);
  const auto avg = generation_profile(d);
  const auto& x = d.mesh().x();
  for (int k = 0; k < d.mesh().cell_count(); ++k) {
    const double want = 2.0 * (std::exp(-3.0 * x[k]) - std::exp(-3.0 * x[k + 1])) / (x[k + 1] - x[k]);
    CHECK(avg[k] == doctest::Approx(want).epsilon(1e-13));
  }
  const double total = std::accumulate(d.node_generation().begin(), d.node_generation().end(), 0.0);
  CHECK(total == doctest::Approx(2.0 * (1.0 - std::exp(-3.0))).epsilon(1e-13));
  for (int k = 0; k < d.mesh().node_count(); ++k)
    CHECK(d.node_generation_point()[k] == doctest::Approx(6.0 * std::exp(-3.0 * x[k])).epsilon(1e-14));
}

TEST_CASE("generation from the upper surface in 2D") {
  auto c = testing::pin_small(4);
  c.dimension = 2;
  c.cells_across = 3;
  c.contacts[0].side = Side::YMin;
  c.contacts[1].side = Side::YMax;
  c.generation = {1.0, 2.0, 1, true};
  const Device d = build_device(c);
  for (int k = 0; k < d.mesh().node_count(); ++k) {
    const double y = d.mesh().position(k)[1];
    CHECK(d.node_generation_point()[k] == doctest::Approx(2.0 * std::exp(-2.0 * (1.0 - y))).epsilon(1e-14));
  }
}

TEST_CASE("Dirichlet extension is linear between two 1D contacts") {
  auto c = testing::pin_small(8);
  c.contacts[0].psi = 0.5;
  c.contacts[1].psi = -0.3;
  c.contacts[1].bias_weight = 1.0;
  const Device d = build_device(c).with_bias(0.2);
  const auto ext = d.psi_extension(0.0);
  for (int k = 0; k < d.mesh().node_count(); ++k) {
    const double x = d.mesh().position(k)[0];
    CHECK(ext[k] == doctest::Approx(0.5 + (-0.1 - 0.5) * x).epsilon(1e-13));
  }
  CHECK(d.contact_phi(1, 0.0) == doctest::Approx(0.2));
}

TEST_CASE("ramped contacts are time dependent") {
  auto c = testing::pin_small(8);
  c.contacts[1].bias_weight = 1.0;
  c.contacts[1].ramp = 0.5;
  const Device d = build_device(c);
  CHECK(d.time_dependent_dirichlet());
  CHECK(d.contact_psi(1, 2.0) == doctest::Approx(1.0));
  CHECK_FALSE(build_device(testing::pin_small(8)).time_dependent_dirichlet());
}

TEST_CASE("refinement keeps the geometry and changes the hash") {
  const Device d = build_device(testing::pin_small(4));
  const Device r = refine(d, 2);
  CHECK(r.mesh().cell_count() == 2 * d.mesh().cell_count());
  CHECK(r.mesh().x().back() == doctest::Approx(d.mesh().x().back()));
  CHECK(r.hash() != d.hash());
  CHECK(build_device(testing::pin_small(4)).hash() == d.hash());
}

TEST_CASE("initial data are control-volume averages of the layer values") {
  auto c = testing::pin_small(4);
  for (auto& s : c.species) s.initial.perturbation_amplitude = 0;
  const Device d = build_device(c);
  const auto& R = d.species_region(0);
  // node 4 sits on the etl/perovskite interface: half an etl cell (0.075)
  // at 1.0 and half a perovskite cell (0.1) at 0.5
  const int k = 4;
  CHECK(d.mesh().position(k)[0] == doctest::Approx(0.3));
  CHECK(R.initial[k] == doctest::Approx((0.0375 * 1.0 + 0.05 * 0.5) / 0.0875));
  CHECK(R.initial[1] == doctest::Approx(1.0));
}
