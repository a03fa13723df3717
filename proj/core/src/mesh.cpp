#include "hdivmg/mesh.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hdivmg
{

namespace
{

Index
lexicographic(const MultiIndex &p, const MultiIndex &n)
{
  return p[0] + n[0] * (p[1] + n[1] * p[2]);
}

MultiIndex
delexicographic(Index i, const MultiIndex &n)
{
  MultiIndex p{};
  p[0] = i % n[0];
  i /= n[0];
  p[1] = i % n[1];
  p[2] = i / n[1];
  return p;
}

Index
product(const MultiIndex &n)
{
  return n[0] * n[1] * n[2];
}

} // namespace

CartesianLevel::CartesianLevel(int dim, MultiIndex cells, const Box &box)
  : dim_(dim)
  , cells_(cells)
  , box_(box)
{
  for (int a = dim; a < 3; ++a)
    cells_[a] = 1;
  h_ = 0.0;
  cell_volume_ = 1.0;
  for (int a = 0; a < 3; ++a)
  {
    spacing_[a] = a < dim ? box.extent[a] / cells_[a] : 1.0;
    if (a < dim)
    {
      h_ = std::max(h_, spacing_[a]);
      cell_volume_ *= spacing_[a];
    }
  }
  num_cells_ = product(cells_);

  face_offsets_[0] = 0;
  for (int a = 0; a < 3; ++a)
    face_offsets_[a + 1] = face_offsets_[a] + (a < dim ? product(face_grid(a)) : 0);
}

double
CartesianLevel::face_measure(int axis) const
{
  double m = 1.0;
  for (int b = 0; b < dim_; ++b)
    if (b != axis)
      m *= spacing_[b];
  return m;
}

Index
CartesianLevel::cell_index(const MultiIndex &c) const
{
  return lexicographic(c, cells_);
}

MultiIndex
CartesianLevel::cell_coords(Index cell) const
{
  return delexicographic(cell, cells_);
}

Point
CartesianLevel::cell_origin(Index cell) const
{
  const MultiIndex c = cell_coords(cell);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a)
    x[a] = box_.origin[a] + c[a] * spacing_[a];
  return x;
}

Point
CartesianLevel::cell_center(Index cell) const
{
  Point x = cell_origin(cell);
  for (int a = 0; a < dim_; ++a)
    x[a] += 0.5 * spacing_[a];
  return x;
}

MultiIndex
CartesianLevel::face_grid(int axis) const
{
  MultiIndex n = cells_;
  n[axis] += 1;
  return n;
}

Index
CartesianLevel::num_faces(int axis) const
{
  return face_offsets_[axis + 1] - face_offsets_[axis];
}

Index
CartesianLevel::num_faces() const
{
  return face_offsets_[dim_];
}

Index
CartesianLevel::face_offset(int axis) const
{
  return face_offsets_[axis];
}

Index
CartesianLevel::face_index(int axis, const MultiIndex &p) const
{
  return face_offsets_[axis] + lexicographic(p, face_grid(axis));
}

std::pair<int, MultiIndex>
CartesianLevel::face_position(Index face) const
{
  int axis = 0;
  while (face >= face_offsets_[axis + 1])
    ++axis;
  return {axis, delexicographic(face - face_offsets_[axis], face_grid(axis))};
}

bool
CartesianLevel::is_boundary_face(Index face) const
{
  const auto [axis, p] = face_position(face);
  return p[axis] == 0 || p[axis] == cells_[axis];
}

MultiIndex
CartesianLevel::vertex_grid() const
{
  MultiIndex n{1, 1, 1};
  for (int a = 0; a < dim_; ++a)
    n[a] = cells_[a] + 1;
  return n;
}

Index
CartesianLevel::num_vertices() const
{
  return product(vertex_grid());
}

Index
CartesianLevel::vertex_index(const MultiIndex &v) const
{
  return lexicographic(v, vertex_grid());
}

MultiIndex
CartesianLevel::vertex_coords(Index vertex) const
{
  return delexicographic(vertex, vertex_grid());
}

bool
CartesianLevel::is_interior_vertex(const MultiIndex &v) const
{
  for (int a = 0; a < dim_; ++a)
    if (v[a] <= 0 || v[a] >= cells_[a])
      return false;
  return true;
}

FaceSet
build_faces(const CartesianLevel &level)
{
  FaceSet faces;
  for (int axis = 0; axis < level.dim(); ++axis)
  {
    const MultiIndex grid = level.face_grid(axis);
    for (Index f = 0; f < product(grid); ++f)
    {
      const MultiIndex p = delexicographic(f, grid);
      const Index face = level.face_offset(axis) + f;
      MultiIndex below = p;
      below[axis] -= 1;
      if (p[axis] == 0)
        faces.boundary_faces.push_back({level.cell_index(p), axis, 0, face});
      else if (p[axis] == level.cells()[axis])
        faces.boundary_faces.push_back({level.cell_index(below), axis, 1, face});
      else
        faces.interior_faces.push_back({level.cell_index(below), level.cell_index(p), axis, face});
    }
  }
  return faces;
}

MeshHierarchy::MeshHierarchy(int dim, MultiIndex coarse_cells, int num_refinements, const Box &box)
  : dim_(dim)
  , box_(box)
{
  MultiIndex cells = coarse_cells;
  for (int j = 0; j <= num_refinements; ++j)
  {
    levels_.emplace_back(dim, cells, box);
    for (int a = 0; a < dim; ++a)
      cells[a] *= 2;
  }
}

const CartesianLevel &
MeshHierarchy::level(int j) const
{
  require(j >= 0 && j < num_levels(), "mesh level " + std::to_string(j) + " out of range");
  return levels_[static_cast<std::size_t>(j)];
}

MeshHierarchy
build_hierarchy(int dim, MultiIndex coarse_cells, int num_refinements, const Box &box)
{
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  require(num_refinements >= 0, "number of refinements must be non-negative");
  // The finest level must fit the index type with room for the d+1 face
  // groups and up to (k+1)^d DoFs per entity.
  const double budget = static_cast<double>(std::numeric_limits<Index>::max()) / 64.0;
  double finest_cells = 1.0;
  for (int a = 0; a < dim; ++a)
  {
    require(coarse_cells[a] >= 2, "coarse mesh needs at least 2 cells per axis");
    require(box.extent[a] > 0.0, "domain extents must be positive");
    finest_cells *= std::ldexp(static_cast<double>(coarse_cells[a]), num_refinements);
  }
  require(finest_cells <= budget, "too many refinements: finest cell count overflows the index type");
  return MeshHierarchy(dim, coarse_cells, num_refinements, box);
}

std::vector<VertexPatch>
vertex_patches(const CartesianLevel &level)
{
  const int dim = level.dim();
  const MultiIndex vgrid = level.vertex_grid();
  const int corners = 1 << dim;
  std::vector<VertexPatch> patches;
  for (Index v = 0; v < level.num_vertices(); ++v)
  {
    const MultiIndex vc = delexicographic(v, vgrid);
    if (!level.is_interior_vertex(vc))
      continue;
    VertexPatch patch;
    patch.vertex = v;
    for (int corner = 0; corner < corners; ++corner)
    {
      MultiIndex c = vc;
      for (int a = 0; a < dim; ++a)
        c[a] -= ((corner >> a) & 1) ? 0 : 1;
      patch.cells.push_back(level.cell_index(c));
    }
    // Faces normal to `axis` inside the patch sit at p[axis] = v[axis];
    // those on its boundary at v[axis] - 1 and v[axis] + 1.
    const int tangential = 1 << (dim - 1);
    for (int axis = 0; axis < dim; ++axis)
    {
      for (int offset : {0, -1, 1})
        for (int t = 0; t < tangential; ++t)
        {
          MultiIndex p = vc;
          p[axis] += offset;
          int bit = 0;
          for (int b = 0; b < dim; ++b)
          {
            if (b == axis)
              continue;
            p[b] -= ((t >> bit) & 1) ? 0 : 1;
            ++bit;
          }
          const Index face = level.face_index(axis, p);
          (offset == 0 ? patch.interior_faces : patch.boundary_faces).push_back(face);
        }
    }
    patches.push_back(std::move(patch));
  }
  return patches;
}

std::vector<VertexPatch>
vertex_patches(const MeshHierarchy &hierarchy, int level)
{
  return vertex_patches(hierarchy.level(level));
}

std::vector<std::vector<Index>>
parent_child_map(const MeshHierarchy &hierarchy, int level)
{
  require(level >= 0 && level < hierarchy.finest_level(), "parent_child_map needs level < J");
  const CartesianLevel &coarse = hierarchy.level(level);
  const CartesianLevel &fine = hierarchy.level(level + 1);
  const int dim = hierarchy.dim();
  std::vector<std::vector<Index>> children(static_cast<std::size_t>(coarse.num_cells()));
  for (Index c = 0; c < coarse.num_cells(); ++c)
  {
    const MultiIndex cc = coarse.cell_coords(c);
    auto &list = children[static_cast<std::size_t>(c)];
    for (int child = 0; child < (1 << dim); ++child)
    {
      MultiIndex fc = cc;
      for (int a = 0; a < dim; ++a)
        fc[a] = 2 * cc[a] + ((child >> a) & 1);
      list.push_back(fine.cell_index(fc));
    }
  }
  return children;
}

} // namespace hdivmg
