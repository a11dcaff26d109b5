#pragma once

#include <array>
#include <span>
#include <vector>

// Tensor-product boundary-conforming meshes for the vertex-centred finite
// volume scheme. Unknowns live at nodes; each node's control volume is the
// union of the quarter (2D) or half (1D) boxes it owns inside the adjacent
// cells, so material data that is constant per cell integrates exactly.

namespace perosim {

enum class Side { XMin, XMax, YMin, YMax };

struct Box {
  double x0 = 0, x1 = 0, y0 = 0, y1 = 1;
  double area() const { return (x1 - x0) * (y1 - y0); }
};

/// Part of a node's control volume lying inside one cell.
struct NodeCellPart {
  int node = 0;
  int cell = 0;
  Box box;
};

/// Contribution of one cell to an edge's dual face.
struct FacePart {
  int cell = 0;
  double measure = 0;
};

struct MeshEdge {
  int a = 0, b = 0;  ///< a < b
  int axis = 0;
  double length = 0;
  std::array<FacePart, 2> parts{};
  int part_count = 0;
  double face() const;
};

struct BoundaryFace {
  Side side = Side::XMin;
  std::array<int, 2> nodes{};
  int node_count = 1;
  double lo = 0, hi = 0;  ///< extent along the side (0,0 in 1D)
  double measure = 1;
};

class FVMesh {
 public:
  static FVMesh interval(std::vector<double> x);
  static FVMesh rectangle(std::vector<double> x, std::vector<double> y);

  int dimension() const { return dim_; }
  int nx() const { return static_cast<int>(x_.size()) - 1; }  ///< cells along x
  int ny() const { return dim_ == 1 ? 1 : static_cast<int>(y_.size()) - 1; }
  int node_count() const;
  int cell_count() const { return nx() * ny(); }
  int node_index(int i, int j = 0) const { return i + (nx() + 1) * j; }
  int cell_index(int i, int j = 0) const { return i + nx() * j; }
  std::array<int, 2> node_ij(int node) const;
  std::array<int, 2> cell_ij(int cell) const;

  std::array<double, 2> position(int node) const;
  Box cell_box(int cell) const;
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& y() const { return y_; }

  const std::vector<MeshEdge>& edges() const { return edges_; }
  const std::vector<BoundaryFace>& boundary_faces() const { return faces_; }
  const std::vector<NodeCellPart>& parts() const { return parts_; }
  std::span<const NodeCellPart> parts_of_node(int node) const;
  const std::vector<double>& node_volumes() const { return volume_; }
  double measure() const;
  double min_spacing() const;
  double max_spacing() const;

  /// Uniform subdivision of every cell into `factor` pieces per axis.
  FVMesh refined(int factor) const;

 private:
  void build();
  int dim_ = 1;
  std::vector<double> x_, y_;
  std::vector<MeshEdge> edges_;
  std::vector<BoundaryFace> faces_;
  std::vector<NodeCellPart> parts_;
  std::vector<int> part_offset_;
  std::vector<double> volume_;
};

}  // namespace perosim
