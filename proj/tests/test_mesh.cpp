#include <doctest.h>

#include <numeric>

#include "perosim/errors.hpp"
#include "perosim/mesh.hpp"

using namespace perosim;

namespace {
double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }
}  // namespace

TEST_CASE("1D control volumes tile the interval") {
  const auto m = FVMesh::interval({0.0, 0.1, 0.35, 0.6, 1.0});
  CHECK(m.node_count() == 5);
  CHECK(m.edges().size() == 4);
  CHECK(sum(m.node_volumes()) == doctest::Approx(1.0));
  CHECK(m.node_volumes()[0] == doctest::Approx(0.05));
  CHECK(m.node_volumes()[1] == doctest::Approx(0.175));
  CHECK(m.boundary_faces().size() == 2);
  CHECK(m.min_spacing() == doctest::Approx(0.1));
  CHECK(m.max_spacing() == doctest::Approx(0.4));
}

TEST_CASE("2D control volumes and dual faces") {
  const auto m = FVMesh::rectangle({0.0, 0.5, 1.5, 2.0}, {0.0, 0.25, 1.0});
  CHECK(m.node_count() == 12);
  CHECK(m.cell_count() == 6);
  CHECK(sum(m.node_volumes()) == doctest::Approx(2.0));
  // on a tensor-product mesh sum_e |face_e| * |e| = dim * |Omega|
  double fl = 0;
  for (const auto& e : m.edges()) fl += e.face() * e.length;
  CHECK(fl == doctest::Approx(2 * 2.0));
  // boundary faces cover the perimeter
  double perim = 0;
  for (const auto& f : m.boundary_faces()) perim += f.measure;
  CHECK(perim == doctest::Approx(6.0));
  // row-major numbering
  CHECK(m.node_index(2, 1) == 6);
  CHECK(m.node_ij(6) == std::array<int, 2>{2, 1});
  CHECK(m.position(6)[0] == doctest::Approx(1.5));
  CHECK(m.position(6)[1] == doctest::Approx(0.25));
}

TEST_CASE("each node's parts add up to its volume") {
  const auto m = FVMesh::rectangle({0.0, 0.3, 1.0}, {0.0, 0.6, 0.8, 1.0});
  for (int k = 0; k < m.node_count(); ++k) {
    double v = 0;
    for (const auto& p : m.parts_of_node(k)) v += p.box.area();
    CHECK(v == doctest::Approx(m.node_volumes()[k]));
  }
}

TEST_CASE("refinement splits every cell") {
  const auto m = FVMesh::rectangle({0.0, 0.5, 1.0}, {0.0, 1.0});
  const auto r = m.refined(3);
  CHECK(r.nx() == 6);
  CHECK(r.ny() == 3);
  CHECK(r.x()[3] == doctest::Approx(0.5));
  CHECK(sum(r.node_volumes()) == doctest::Approx(1.0));
}

TEST_CASE("invalid axes are rejected") {
  CHECK_THROWS_AS(FVMesh::interval({0.0}), ValidationError);
  CHECK_THROWS_AS(FVMesh::interval({0.0, 0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(FVMesh::interval({0.0, 1.0, 0.5}), ValidationError);
}
