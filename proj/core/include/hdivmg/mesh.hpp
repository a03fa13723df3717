#ifndef HDIVMG_MESH_HPP
#define HDIVMG_MESH_HPP

#include <vector>

#include "hdivmg/types.hpp"

namespace hdivmg
{

/// Axis-aligned box [origin, origin + extent].
struct Box
{
  Point origin{0.0, 0.0, 0.0};
  Point extent{1.0, 1.0, 1.0};

  static Box unit() { return {}; }
};

/// One uniform Cartesian level. Cells, faces and vertices are numbered
/// lexicographically with x running fastest.
///
/// Faces are grouped by the axis of their normal: first all faces normal
/// to x, then y, then z. Within a group the faces normal to axis a live on
/// a grid of size cells + e_a and are numbered lexicographically on it.
class CartesianLevel
{
public:
  CartesianLevel() = default;
  CartesianLevel(int dim, MultiIndex cells, const Box &box);

  int dim() const { return dim_; }
  const MultiIndex &cells() const { return cells_; }
  const Point &spacing() const { return spacing_; }
  const Box &box() const { return box_; }

  /// Mesh size: the largest cell edge.
  double h() const { return h_; }
  double cell_volume() const { return cell_volume_; }
  /// Area (length in 2D) of a face normal to the given axis.
  double face_measure(int axis) const;

  Index num_cells() const { return num_cells_; }
  Index cell_index(const MultiIndex &c) const;
  MultiIndex cell_coords(Index cell) const;
  Point cell_origin(Index cell) const;
  Point cell_center(Index cell) const;

  MultiIndex face_grid(int axis) const;
  Index num_faces(int axis) const;
  Index num_faces() const;
  Index face_offset(int axis) const;
  /// Face normal to `axis` whose lower corner is the grid position `p`.
  Index face_index(int axis, const MultiIndex &p) const;
  /// Inverse of face_index: the axis and grid position of a face.
  std::pair<int, MultiIndex> face_position(Index face) const;
  bool is_boundary_face(Index face) const;

  MultiIndex vertex_grid() const;
  Index num_vertices() const;
  Index vertex_index(const MultiIndex &v) const;
  MultiIndex vertex_coords(Index vertex) const;
  bool is_interior_vertex(const MultiIndex &v) const;

private:
  int dim_ = 2;
  MultiIndex cells_{1, 1, 1};
  Box box_;
  Point spacing_{1.0, 1.0, 1.0};
  double h_ = 1.0;
  double cell_volume_ = 1.0;
  Index num_cells_ = 1;
  std::array<Index, 4> face_offsets_{0, 0, 0, 0};
};

struct InteriorFace
{
  Index cell_lo;
  Index cell_hi;
  int axis;
  Index face;
};

struct BoundaryFace
{
  Index cell;
  int axis;
  /// 0: lower side (outward normal -e_axis), 1: upper side (+e_axis).
  int side;
  Index face;
};

/// Interior faces are oriented from the lower-numbered cell to the
/// higher-numbered one, which on a Cartesian grid is always +e_axis.
struct FaceSet
{
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
};

FaceSet
build_faces(const CartesianLevel &level);

/// Cells sharing one interior vertex.
struct VertexPatch
{
  Index vertex;
  /// The 2^d cells around the vertex, lexicographic.
  std::vector<Index> cells;
  /// Faces incident to the vertex; these are shared by two patch cells.
  std::vector<Index> interior_faces;
  /// Faces on the boundary of the patch.
  std::vector<Index> boundary_faces;
};

/// Nested hierarchy T_0 < T_1 < ... < T_J of uniform Cartesian meshes.
class MeshHierarchy
{
public:
  MeshHierarchy(int dim, MultiIndex coarse_cells, int num_refinements, const Box &box = Box::unit());

  int dim() const { return dim_; }
  const Box &box() const { return box_; }
  int num_levels() const { return static_cast<int>(levels_.size()); }
  int finest_level() const { return num_levels() - 1; }

  const CartesianLevel &level(int j) const;
  const CartesianLevel &finest() const { return levels_.back(); }
  double h(int j) const { return level(j).h(); }

private:
  int dim_;
  Box box_;
  std::vector<CartesianLevel> levels_;
};

/// Builds the hierarchy; throws InvalidArgument on a coarse count below 2,
/// negative refinement count, non-positive extents, or index overflow.
MeshHierarchy
build_hierarchy(int dim, MultiIndex coarse_cells, int num_refinements, const Box &box = Box::unit());

/// One patch per interior vertex, lexicographic by vertex.
std::vector<VertexPatch>
vertex_patches(const CartesianLevel &level);

std::vector<VertexPatch>
vertex_patches(const MeshHierarchy &hierarchy, int level);

/// For every cell of `level`, its 2^d children on `level + 1` (x fastest).
std::vector<std::vector<Index>>
parent_child_map(const MeshHierarchy &hierarchy, int level);

} // namespace hdivmg

#endif
