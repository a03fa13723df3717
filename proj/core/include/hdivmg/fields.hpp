#ifndef HDIVMG_FIELDS_HPP
#define HDIVMG_FIELDS_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hdivmg/mesh.hpp"

namespace hdivmg
{

/// Malformed or truncated field file header.
class FieldFormatError : public Error
{
public:
  using Error::Error;
};

/// Number of values does not match the field dimensions.
class FieldCountError : public Error
{
public:
  using Error::Error;
};

/// A zero, negative or non-finite coefficient.
class NonPositivePermeability : public Error
{
public:
  using Error::Error;
};

/// Cellwise scaled inverse permeability kappa, x running fastest.
struct PermeabilityField
{
  int dim = 2;
  MultiIndex dims{1, 1, 1};
  std::vector<double> values;
  /// Generator and seed, or the source file.
  std::string provenance;

  Index size() const;
  double &at(const MultiIndex &c);
  double at(const MultiIndex &c) const;

  /// Throws NonPositivePermeability or FieldCountError.
  void validate() const;
};

PermeabilityField
constant_field(int dim, const MultiIndex &dims, double value);

enum class FieldKind
{
  checkerboard,
  open_foam,
  inclusions,
  connected_inclusions
};

FieldKind
parse_field_kind(const std::string &name);
std::string
to_string(FieldKind kind);

struct FieldParams
{
  /// Checkerboard block edge in cells.
  int block_size = 1;
  /// Number of rectangular inclusions (2D) or boxes (3D).
  int inclusions = 24;
  /// Number of seed points of the foam cell structure.
  int foam_cells = 40;
  /// Number of random-walk strips joining inclusions.
  int strips = 6;
  /// Give the structures `low` and the background `high`.
  bool reversed = false;
};

/// Synthetic fields. The `high` value is assigned to the structures
/// (inclusions, strips, foam walls, even checkerboard blocks) and `low`
/// to the background, unless `params.reversed` is set.
///
/// Geometry is drawn in unit coordinates from the seed and then sampled
/// at cell centers, so the same seed gives the same structures on every
/// grid.
PermeabilityField
generate_field(FieldKind kind, int dim, const MultiIndex &dims, double high, double low, std::uint64_t seed,
               const FieldParams &params = {});

enum class FieldFormat
{
  raw_binary,
  ascii_list
};

/// Writes the "PFK1" binary format: magic, u32 dimension, u64 extents,
/// then f64 values, all little-endian.
void
write_field(const PermeabilityField &field, const std::filesystem::path &path);

/// Reads a "PFK1" file.
PermeabilityField
load_field(const std::filesystem::path &path);

/// Reads whitespace-separated values. When the file holds `components`
/// times as many values as cells (e.g. kx, ky, kz blocks one after the
/// other) block `component` is taken.
PermeabilityField
load_ascii_field(const std::filesystem::path &path, int dim, const MultiIndex &dims, int components = 1,
                 int component = 0);

PermeabilityField
load_field(const std::filesystem::path &path, FieldFormat format, int dim = 0, const MultiIndex &dims = {0, 0, 0});

/// Maps permeability K to kappa = scale / K.
PermeabilityField
invert_permeability(const PermeabilityField &field, double scale = 1.0);

/// Overlap-volume weighted average onto a grid with `dims` cells.
PermeabilityField
rescale_field(const PermeabilityField &field, const MultiIndex &dims);

/// The plane `index` normal to `axis` of a 3D field.
PermeabilityField
slice_field(const PermeabilityField &field, int axis, Index index);

/// kappa on every level of the hierarchy, finest last, each coarse cell
/// holding the arithmetic mean of its children.
std::vector<std::vector<double>>
coarsen_levels(const PermeabilityField &field, const MeshHierarchy &hierarchy);

/// max / min.
double
contrast(const PermeabilityField &field);

} // namespace hdivmg

#endif
