#include "hdivmg/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

namespace hdivmg
{

Index
PermeabilityField::size() const
{
  Index n = 1;
  for (int a = 0; a < dim; ++a)
    n *= dims[a];
  return n;
}

namespace
{

Index
linear_index(const PermeabilityField &f, const MultiIndex &c)
{
  Index i = 0;
  for (int a = f.dim - 1; a >= 0; --a)
    i = i * f.dims[a] + c[a];
  return i;
}

MultiIndex
multi_index(const PermeabilityField &f, Index i)
{
  MultiIndex c{0, 0, 0};
  for (int a = 0; a < f.dim; ++a)
  {
    c[a] = i % f.dims[a];
    i /= f.dims[a];
  }
  return c;
}

void
check_shape(int dim, const MultiIndex &dims)
{
  require(dim == 2 || dim == 3, "field dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a)
    require(dims[a] >= 1, "field extents must be positive");
}

} // namespace

double &
PermeabilityField::at(const MultiIndex &c)
{
  return values[static_cast<std::size_t>(linear_index(*this, c))];
}

double
PermeabilityField::at(const MultiIndex &c) const
{
  return values[static_cast<std::size_t>(linear_index(*this, c))];
}

void
PermeabilityField::validate() const
{
  if (static_cast<Index>(values.size()) != size())
    throw FieldCountError("field holds " + std::to_string(values.size()) + " values but its extents need " +
                          std::to_string(size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw NonPositivePermeability("non-positive permeability " + std::to_string(values[i]) + " at index " +
                                    std::to_string(i));
}

PermeabilityField
constant_field(int dim, const MultiIndex &dims, double value)
{
  check_shape(dim, dims);
  PermeabilityField f;
  f.dim = dim;
  f.dims = {dims[0], dims[1], dim == 3 ? dims[2] : 1};
  f.values.assign(static_cast<std::size_t>(f.size()), value);
  f.provenance = "constant";
  return f;
}

FieldKind
parse_field_kind(const std::string &name)
{
  if (name == "checkerboard")
    return FieldKind::checkerboard;
  if (name == "open_foam" || name == "open-foam")
    return FieldKind::open_foam;
  if (name == "inclusions")
    return FieldKind::inclusions;
  if (name == "connected_inclusions" || name == "connected-inclusions")
    return FieldKind::connected_inclusions;
  throw InvalidArgument("unknown field kind '" + name + "'");
}

std::string
to_string(FieldKind kind)
{
  switch (kind)
  {
    case FieldKind::checkerboard:
      return "checkerboard";
    case FieldKind::open_foam:
      return "open_foam";
    case FieldKind::inclusions:
      return "inclusions";
    case FieldKind::connected_inclusions:
      return "connected_inclusions";
  }
  return "unknown";
}

namespace
{

struct Rect
{
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};

  bool contains(const Point &x, int dim) const
  {
    for (int a = 0; a < dim; ++a)
      if (x[a] < lo[a] || x[a] > hi[a])
        return false;
    return true;
  }

  bool overlaps(const Rect &o, int dim, double margin) const
  {
    for (int a = 0; a < dim; ++a)
      if (hi[a] + margin < o.lo[a] || o.hi[a] + margin < lo[a])
        return false;
    return true;
  }
};

std::vector<Rect>
random_inclusions(int dim, int count, std::mt19937_64 &rng)
{
  std::uniform_real_distribution<double> size(0.04, 0.14);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Rect> rects;
  const double margin = 0.03;
  for (int attempt = 0; static_cast<int>(rects.size()) < count && attempt < 2000 * count; ++attempt)
  {
    Rect r;
    for (int a = 0; a < dim; ++a)
    {
      const double w = size(rng);
      r.lo[a] = margin + unit(rng) * (1.0 - 2.0 * margin - w);
      r.hi[a] = r.lo[a] + w;
    }
    const bool clash =
      std::any_of(rects.begin(), rects.end(), [&](const Rect &o) { return r.overlaps(o, dim, margin); });
    if (!clash)
      rects.push_back(r);
  }
  return rects;
}

// Staircase random walk between two inclusion centres, as thin slabs.
void
random_strip(int dim, const Point &from, const Point &to, std::mt19937_64 &rng, std::vector<Rect> &out)
{
  const double width = 0.012;
  const double step = 0.06;
  std::uniform_int_distribution<int> axis_pick(0, dim - 1);
  Point x = from;
  for (int guard = 0; guard < 1000; ++guard)
  {
    std::array<int, 3> open{};
    int n_open = 0;
    for (int a = 0; a < dim; ++a)
      if (std::abs(to[a] - x[a]) > 1e-12)
        open[static_cast<std::size_t>(n_open++)] = a;
    if (n_open == 0)
      break;
    const int a = open[static_cast<std::size_t>(axis_pick(rng) % n_open)];
    const double len = std::min(step, std::abs(to[a] - x[a]));
    Point y = x;
    y[a] += std::copysign(len, to[a] - x[a]);
    Rect r;
    for (int b = 0; b < dim; ++b)
    {
      r.lo[b] = std::min(x[b], y[b]) - width;
      r.hi[b] = std::max(x[b], y[b]) + width;
    }
    out.push_back(r);
    x = y;
  }
}

// Foam: Voronoi cell walls of a random point set, cut open near the
// junctions so that the walls form mostly disconnected segments.
struct Foam
{
  std::vector<Point> seeds;
  int dim;
  double wall = 0.022;
  double junction = 0.05;

  bool is_wall(const Point &x) const
  {
    double d[3] = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                   std::numeric_limits<double>::max()};
    for (const Point &s : seeds)
    {
      double r = 0.0;
      for (int a = 0; a < dim; ++a)
        r += (x[a] - s[a]) * (x[a] - s[a]);
      r = std::sqrt(r);
      if (r < d[0])
      {
        d[2] = d[1];
        d[1] = d[0];
        d[0] = r;
      }
      else if (r < d[1])
      {
        d[2] = d[1];
        d[1] = r;
      }
      else if (r < d[2])
        d[2] = r;
    }
    return d[1] - d[0] < wall && d[2] - d[0] > junction;
  }
};

} // namespace

PermeabilityField
generate_field(FieldKind kind, int dim, const MultiIndex &dims, double high, double low, std::uint64_t seed,
               const FieldParams &params)
{
  check_shape(dim, dims);
  require(high >= low && low > 0.0 && std::isfinite(high), "field values must satisfy high >= low > 0");
  for (int a = 0; a < dim; ++a)
    require(dims[a] >= 8, "synthetic fields need at least 8 cells per axis");
  require(params.block_size >= 1, "checkerboard block size must be positive");
  require(params.inclusions >= 0 && params.strips >= 0 && params.foam_cells >= 3,
          "generator counts out of range");

  PermeabilityField f = constant_field(dim, dims, 0.0);
  const double on = params.reversed ? low : high;
  const double off = params.reversed ? high : low;
  f.provenance = to_string(kind) + " seed=" + std::to_string(seed);
  std::mt19937_64 rng(seed);

  auto center = [&](Index i) {
    const MultiIndex c = multi_index(f, i);
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a)
      x[a] = (c[a] + 0.5) / static_cast<double>(f.dims[a]);
    return x;
  };

  switch (kind)
  {
    case FieldKind::checkerboard:
    {
      for (Index i = 0; i < f.size(); ++i)
      {
        const MultiIndex c = multi_index(f, i);
        Index parity = 0;
        for (int a = 0; a < dim; ++a)
          parity += c[a] / params.block_size;
        f.values[static_cast<std::size_t>(i)] = parity % 2 == 0 ? on : off;
      }
      break;
    }
    case FieldKind::open_foam:
    {
      Foam foam;
      foam.dim = dim;
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (int s = 0; s < params.foam_cells; ++s)
      {
        Point p{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a)
          p[a] = unit(rng);
        foam.seeds.push_back(p);
      }
      for (Index i = 0; i < f.size(); ++i)
        f.values[static_cast<std::size_t>(i)] = foam.is_wall(center(i)) ? on : off;
      break;
    }
    case FieldKind::inclusions:
    case FieldKind::connected_inclusions:
    {
      std::vector<Rect> shapes = random_inclusions(dim, params.inclusions, rng);
      if (kind == FieldKind::connected_inclusions && shapes.size() >= 2)
      {
        const std::size_t n = shapes.size();
        const auto strips = std::min<std::size_t>(static_cast<std::size_t>(params.strips), n - 1);
        for (std::size_t s = 0; s < strips; ++s)
        {
          Point from{0.0, 0.0, 0.0};
          Point to{0.0, 0.0, 0.0};
          for (int a = 0; a < dim; ++a)
          {
            from[a] = 0.5 * (shapes[s].lo[a] + shapes[s].hi[a]);
            to[a] = 0.5 * (shapes[s + 1].lo[a] + shapes[s + 1].hi[a]);
          }
          random_strip(dim, from, to, rng, shapes);
        }
      }
      for (Index i = 0; i < f.size(); ++i)
      {
        const Point x = center(i);
        const bool inside = std::any_of(shapes.begin(), shapes.end(), [&](const Rect &r) { return r.contains(x, dim); });
        f.values[static_cast<std::size_t>(i)] = inside ? on : off;
      }
      break;
    }
  }
  return f;
}

namespace
{

constexpr char magic[4] = {'P', 'F', 'K', '1'};

template <typename T>
void
put_le(std::ostream &out, T value)
{
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof bits);
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, sizeof bytes);
}

template <typename T>
bool
get_le(std::istream &in, T &value)
{
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char *>(bytes), sizeof bytes))
    return false;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    bits |= static_cast<U>(bytes[i]) << (8 * i);
  std::memcpy(&value, &bits, sizeof bits);
  return true;
}

} // namespace

void
write_field(const PermeabilityField &field, const std::filesystem::path &path)
{
  field.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  out.write(magic, 4);
  put_le(out, static_cast<std::uint32_t>(field.dim));
  for (int a = 0; a < field.dim; ++a)
    put_le(out, static_cast<std::uint64_t>(field.dims[a]));
  for (double v : field.values)
    put_le(out, v);
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

PermeabilityField
load_field(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  char head[4];
  if (!in.read(head, 4) || !std::equal(head, head + 4, magic))
    throw FieldFormatError("'" + path.string() + "' is not a PFK1 field file");
  std::uint32_t dim = 0;
  if (!get_le(in, dim) || (dim != 2 && dim != 3))
    throw FieldFormatError("'" + path.string() + "': unsupported dimension in header");
  PermeabilityField f;
  f.dim = static_cast<int>(dim);
  f.dims = {1, 1, 1};
  std::uint64_t total = 1;
  for (int a = 0; a < f.dim; ++a)
  {
    std::uint64_t n = 0;
    if (!get_le(in, n) || n == 0 || n > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()))
      throw FieldFormatError("'" + path.string() + "': invalid extent in header");
    f.dims[a] = static_cast<Index>(n);
    total *= n;
    if (total > static_cast<std::uint64_t>(std::numeric_limits<Index>::max()))
      throw FieldFormatError("'" + path.string() + "': field too large");
  }
  f.values.resize(static_cast<std::size_t>(total));
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (!get_le(in, f.values[i]))
      throw FieldCountError("'" + path.string() + "' holds " + std::to_string(i) + " values, header announces " +
                            std::to_string(total));
  if (in.peek() != std::char_traits<char>::eof())
    throw FieldCountError("'" + path.string() + "' holds more values than its header announces");
  f.provenance = path.string();
  f.validate();
  return f;
}

PermeabilityField
load_ascii_field(const std::filesystem::path &path, int dim, const MultiIndex &dims, int components, int component)
{
  check_shape(dim, dims);
  require(components >= 1 && component >= 0 && component < components, "invalid component selection");
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  PermeabilityField f = constant_field(dim, dims, 1.0);
  f.values.clear();
  const auto cells = static_cast<std::size_t>(f.size());
  std::vector<double> all;
  all.reserve(cells * static_cast<std::size_t>(components));
  std::string token;
  while (in >> token)
  {
    std::size_t used = 0;
    double v = 0.0;
    try
    {
      v = std::stod(token, &used);
    }
    catch (const std::exception &)
    {
      used = 0;
    }
    if (used != token.size())
      throw FieldFormatError("'" + path.string() + "': malformed value '" + token + "'");
    all.push_back(v);
  }
  if (all.size() == cells * static_cast<std::size_t>(components))
    f.values.assign(all.begin() + static_cast<std::ptrdiff_t>(cells * static_cast<std::size_t>(component)),
                    all.begin() + static_cast<std::ptrdiff_t>(cells * static_cast<std::size_t>(component + 1)));
  else
    throw FieldCountError("'" + path.string() + "' holds " + std::to_string(all.size()) + " values, expected " +
                          std::to_string(cells * static_cast<std::size_t>(components)));
  f.provenance = path.string();
  f.validate();
  return f;
}

PermeabilityField
load_field(const std::filesystem::path &path, FieldFormat format, int dim, const MultiIndex &dims)
{
  if (format == FieldFormat::raw_binary)
    return load_field(path);
  return load_ascii_field(path, dim, dims);
}

PermeabilityField
invert_permeability(const PermeabilityField &field, double scale)
{
  field.validate();
  require(scale > 0.0, "viscosity scale must be positive");
  PermeabilityField f = field;
  for (double &v : f.values)
    v = scale / v;
  f.validate();
  return f;
}

namespace
{

struct Overlap
{
  Index source;
  double weight;
};

// For every target cell along one axis, the source cells it overlaps and
// the fraction of the target length each covers.
std::vector<std::vector<Overlap>>
axis_overlaps(Index source, Index target)
{
  std::vector<std::vector<Overlap>> result(static_cast<std::size_t>(target));
  // Work in units of 1 / (source * target) to stay exact.
  for (Index t = 0; t < target; ++t)
  {
    const long long lo = static_cast<long long>(t) * source;
    const long long hi = lo + source;
    for (Index s = static_cast<Index>(lo / target); s < source; ++s)
    {
      const long long slo = static_cast<long long>(s) * target;
      const long long shi = slo + target;
      if (slo >= hi)
        break;
      const long long overlap = std::min(hi, shi) - std::max(lo, slo);
      if (overlap > 0)
        result[static_cast<std::size_t>(t)].push_back({s, static_cast<double>(overlap) / static_cast<double>(source)});
    }
  }
  return result;
}

} // namespace

PermeabilityField
rescale_field(const PermeabilityField &field, const MultiIndex &dims)
{
  field.validate();
  check_shape(field.dim, dims);
  const int d = field.dim;
  bool same = true;
  for (int a = 0; a < d; ++a)
    same = same && dims[a] == field.dims[a];
  if (same)
    return field;

  std::array<std::vector<std::vector<Overlap>>, 3> axes;
  for (int a = 0; a < 3; ++a)
    axes[static_cast<std::size_t>(a)] = a < d ? axis_overlaps(field.dims[a], dims[a]) : axis_overlaps(1, 1);

  PermeabilityField out = constant_field(d, dims, 0.0);
  out.provenance = field.provenance + " rescaled";
  for (Index i = 0; i < out.size(); ++i)
  {
    const MultiIndex c = multi_index(out, i);
    double sum = 0.0;
    for (const Overlap &z : axes[2][static_cast<std::size_t>(c[2])])
      for (const Overlap &y : axes[1][static_cast<std::size_t>(c[1])])
        for (const Overlap &x : axes[0][static_cast<std::size_t>(c[0])])
          sum += x.weight * y.weight * z.weight * field.at({x.source, y.source, z.source});
    out.values[static_cast<std::size_t>(i)] = sum;
  }
  return out;
}

PermeabilityField
slice_field(const PermeabilityField &field, int axis, Index index)
{
  require(field.dim == 3, "only 3D fields can be sliced");
  require(axis >= 0 && axis < 3, "slice axis out of range");
  if (index < 0 || index >= field.dims[axis])
    throw InvalidArgument("slice index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(field.dims[axis]) + ")");
  const int a0 = axis == 0 ? 1 : 0;
  const int a1 = axis == 2 ? 1 : 2;
  PermeabilityField out = constant_field(2, {field.dims[a0], field.dims[a1], 1}, 0.0);
  out.provenance = field.provenance + " slice " + std::to_string(axis) + ":" + std::to_string(index);
  for (Index j = 0; j < field.dims[a1]; ++j)
    for (Index i = 0; i < field.dims[a0]; ++i)
    {
      MultiIndex c{0, 0, 0};
      c[axis] = index;
      c[a0] = i;
      c[a1] = j;
      out.at({i, j, 0}) = field.at(c);
    }
  return out;
}

std::vector<std::vector<double>>
coarsen_levels(const PermeabilityField &field, const MeshHierarchy &hierarchy)
{
  field.validate();
  require(field.dim == hierarchy.dim(), "field and mesh dimensions differ");
  for (int a = 0; a < field.dim; ++a)
    if (field.dims[a] != hierarchy.finest().cells()[a])
      throw InvalidArgument("field extents do not match the finest mesh");

  std::vector<std::vector<double>> levels(static_cast<std::size_t>(hierarchy.num_levels()));
  levels.back() = field.values;
  for (int j = hierarchy.finest_level() - 1; j >= 0; --j)
  {
    const auto children = parent_child_map(hierarchy, j);
    const auto &fine = levels[static_cast<std::size_t>(j) + 1];
    auto &coarse = levels[static_cast<std::size_t>(j)];
    coarse.resize(children.size());
    for (std::size_t c = 0; c < children.size(); ++c)
    {
      double sum = 0.0;
      for (Index child : children[c])
        sum += fine[static_cast<std::size_t>(child)];
      coarse[c] = sum / static_cast<double>(children[c].size());
    }
  }
  return levels;
}

double
contrast(const PermeabilityField &field)
{
  field.validate();
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  return *hi / *lo;
}

} // namespace hdivmg
