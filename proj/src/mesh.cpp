#include "perosim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "perosim/errors.hpp"

namespace perosim {
namespace {

void check_axis(const std::vector<double>& v, const char* name) {
  if (v.size() < 2) throw ValidationError(name, "axis needs at least one cell");
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !std::isfinite(v[i + 1]) || !(v[i + 1] > v[i]))
      throw ValidationError(name, "node coordinates must be finite and strictly increasing");
  }
}

std::vector<double> subdivide(const std::vector<double>& v, int factor) {
  std::vector<double> out;
  out.reserve((v.size() - 1) * factor + 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    for (int k = 0; k < factor; ++k) out.push_back(v[i] + (v[i + 1] - v[i]) * k / factor);
  }
  out.push_back(v.back());
  return out;
}

}  // namespace

double MeshEdge::face() const {
  double s = 0;
  for (int k = 0; k < part_count; ++k) s += parts[k].measure;
  return s;
}

FVMesh FVMesh::interval(std::vector<double> x) {
  check_axis(x, "mesh.x");
  FVMesh m;
  m.dim_ = 1;
  m.x_ = std::move(x);
  m.y_ = {0.0, 1.0};
  m.build();
  return m;
}

FVMesh FVMesh::rectangle(std::vector<double> x, std::vector<double> y) {
  check_axis(x, "mesh.x");
  check_axis(y, "mesh.y");
  FVMesh m;
  m.dim_ = 2;
  m.x_ = std::move(x);
  m.y_ = std::move(y);
  m.build();
  return m;
}

int FVMesh::node_count() const {
  return dim_ == 1 ? nx() + 1 : (nx() + 1) * (ny() + 1);
}

std::array<int, 2> FVMesh::node_ij(int node) const { return {node % (nx() + 1), node / (nx() + 1)}; }
std::array<int, 2> FVMesh::cell_ij(int cell) const { return {cell % nx(), cell / nx()}; }

std::array<double, 2> FVMesh::position(int node) const {
  const auto [i, j] = node_ij(node);
  return {x_[i], dim_ == 1 ? 0.0 : y_[j]};
}

Box FVMesh::cell_box(int cell) const {
  const auto [i, j] = cell_ij(cell);
  if (dim_ == 1) return {x_[i], x_[i + 1], 0.0, 1.0};
  return {x_[i], x_[i + 1], y_[j], y_[j + 1]};
}

std::span<const NodeCellPart> FVMesh::parts_of_node(int node) const {
  return std::span<const NodeCellPart>(parts_).subspan(part_offset_[node],
                                                       part_offset_[node + 1] - part_offset_[node]);
}

double FVMesh::measure() const {
  double m = x_.back() - x_.front();
  if (dim_ == 2) m *= y_.back() - y_.front();
  return m;
}

double FVMesh::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) h = std::min(h, x_[i + 1] - x_[i]);
  if (dim_ == 2)
    for (std::size_t j = 0; j + 1 < y_.size(); ++j) h = std::min(h, y_[j + 1] - y_[j]);
  return h;
}

double FVMesh::max_spacing() const {
  double h = 0;
  for (std::size_t i = 0; i + 1 < x_.size(); ++i) h = std::max(h, x_[i + 1] - x_[i]);
  if (dim_ == 2)
    for (std::size_t j = 0; j + 1 < y_.size(); ++j) h = std::max(h, y_[j + 1] - y_[j]);
  return h;
}

FVMesh FVMesh::refined(int factor) const {
  if (factor < 1) throw ValidationError("refine", "factor must be >= 1");
  if (dim_ == 1) return interval(subdivide(x_, factor));
  return rectangle(subdivide(x_, factor), subdivide(y_, factor));
}

void FVMesh::build() {
  const int NX = nx();
  const int NY = ny();
  const int nn = node_count();
  edges_.clear();
  faces_.clear();
  parts_.clear();

  // control-volume parts, grouped by node
  part_offset_.assign(nn + 1, 0);
  volume_.assign(nn, 0.0);
  const int jmax = dim_ == 1 ? 0 : NY;
  for (int j = 0; j <= jmax; ++j) {
    for (int i = 0; i <= NX; ++i) {
      const int k = node_index(i, j);
      part_offset_[k] = static_cast<int>(parts_.size());
      const int cj_lo = dim_ == 1 ? 0 : std::max(j - 1, 0);
      const int cj_hi = dim_ == 1 ? 0 : std::min(j, NY - 1);
      for (int cj = cj_lo; cj <= cj_hi; ++cj) {
        for (int ci = std::max(i - 1, 0); ci <= std::min(i, NX - 1); ++ci) {
          const int c = cell_index(ci, cj);
          const Box cb = cell_box(c);
          const double xm = 0.5 * (cb.x0 + cb.x1);
          Box b;
          b.x0 = ci == i ? x_[i] : xm;
          b.x1 = ci == i ? xm : x_[i];
          if (dim_ == 2) {
            const double ym = 0.5 * (cb.y0 + cb.y1);
            b.y0 = cj == j ? y_[j] : ym;
            b.y1 = cj == j ? ym : y_[j];
          }
          parts_.push_back({k, c, b});
          volume_[k] += b.area();
        }
      }
    }
  }
  part_offset_[nn] = static_cast<int>(parts_.size());

  // edges along x
  for (int j = 0; j <= jmax; ++j) {
    for (int i = 0; i < NX; ++i) {
      MeshEdge e;
      e.a = node_index(i, j);
      e.b = node_index(i + 1, j);
      e.axis = 0;
      e.length = x_[i + 1] - x_[i];
      if (dim_ == 1) {
        e.parts[e.part_count++] = {cell_index(i), 1.0};
      } else {
        if (j > 0) e.parts[e.part_count++] = {cell_index(i, j - 1), 0.5 * (y_[j] - y_[j - 1])};
        if (j < NY) e.parts[e.part_count++] = {cell_index(i, j), 0.5 * (y_[j + 1] - y_[j])};
      }
      edges_.push_back(e);
    }
  }
  // edges along y
  if (dim_ == 2) {
    for (int j = 0; j < NY; ++j) {
      for (int i = 0; i <= NX; ++i) {
        MeshEdge e;
        e.a = node_index(i, j);
        e.b = node_index(i, j + 1);
        e.axis = 1;
        e.length = y_[j + 1] - y_[j];
        if (i > 0) e.parts[e.part_count++] = {cell_index(i - 1, j), 0.5 * (x_[i] - x_[i - 1])};
        if (i < NX) e.parts[e.part_count++] = {cell_index(i, j), 0.5 * (x_[i + 1] - x_[i])};
        edges_.push_back(e);
      }
    }
  }

  // boundary faces
  if (dim_ == 1) {
    BoundaryFace lo;
    lo.side = Side::XMin;
    lo.nodes = {0, 0};
    faces_.push_back(lo);
    BoundaryFace hi;
    hi.side = Side::XMax;
    hi.nodes = {NX, NX};
    faces_.push_back(hi);
    return;
  }
  for (int i = 0; i < NX; ++i) {
    faces_.push_back({Side::YMin, {node_index(i, 0), node_index(i + 1, 0)}, 2, x_[i], x_[i + 1], x_[i + 1] - x_[i]});
    faces_.push_back(
        {Side::YMax, {node_index(i, NY), node_index(i + 1, NY)}, 2, x_[i], x_[i + 1], x_[i + 1] - x_[i]});
  }
  for (int j = 0; j < NY; ++j) {
    faces_.push_back({Side::XMin, {node_index(0, j), node_index(0, j + 1)}, 2, y_[j], y_[j + 1], y_[j + 1] - y_[j]});
    faces_.push_back(
        {Side::XMax, {node_index(NX, j), node_index(NX, j + 1)}, 2, y_[j], y_[j + 1], y_[j + 1] - y_[j]});
  }
}

}  // namespace perosim
