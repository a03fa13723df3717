#include "hdivmg/io.hpp"

#include <fstream>
#include <sstream>

namespace hdivmg
{

namespace
{

std::ofstream
open_output(const std::filesystem::path &path)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out)
    throw Error("cannot open '" + path.string() + "' for writing");
  out.precision(10);
  return out;
}

void
write_header(std::ostream &out, int dim, const MultiIndex &cells, const Point &origin, const Point &spacing,
             const std::string &title)
{
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << cells[0] + 1 << ' ' << cells[1] + 1 << ' ' << (dim == 3 ? cells[2] + 1 : 1) << '\n';
  out << "ORIGIN " << origin[0] << ' ' << origin[1] << ' ' << (dim == 3 ? origin[2] : 0.0) << '\n';
  out << "SPACING " << spacing[0] << ' ' << spacing[1] << ' ' << (dim == 3 ? spacing[2] : 1.0) << '\n';
  Index n = cells[0] * cells[1] * (dim == 3 ? cells[2] : 1);
  out << "CELL_DATA " << n << '\n';
}

void
write_scalars(std::ostream &out, const std::string &name, const Vector &values)
{
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (Index i = 0; i < values.size(); ++i)
    out << values[i] << '\n';
}

std::string
format_double(double v)
{
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

} // namespace

void
write_vtk(const std::filesystem::path &path, const Solution &solution)
{
  const DofLayout layout(solution.level, solution.degree);
  const CartesianLevel &level = solution.level;
  std::ofstream out = open_output(path);
  write_header(out, level.dim(), level.cells(), level.box().origin, level.spacing(), "hdivmg solution");

  write_scalars(out, "pressure", cell_average_pressure(layout, solution.pressure));
  write_scalars(out, "divergence", cell_average_pressure(layout, solution.divergence));
  const std::vector<Point> u = cell_average_velocity(layout, solution.velocity);
  out << "VECTORS velocity double\n";
  for (const Point &v : u)
    out << v[0] << ' ' << v[1] << ' ' << (level.dim() == 3 ? v[2] : 0.0) << '\n';
  if (static_cast<Index>(solution.field.values.size()) == level.num_cells())
    write_scalars(out, "kappa", Eigen::Map<const Vector>(solution.field.values.data(), level.num_cells()));
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

void
write_field_vtk(const std::filesystem::path &path, const PermeabilityField &field)
{
  field.validate();
  std::ofstream out = open_output(path);
  Point spacing{1.0, 1.0, 1.0};
  for (int a = 0; a < field.dim; ++a)
    spacing[a] = 1.0 / static_cast<double>(field.dims[a]);
  write_header(out, field.dim, field.dims, {0.0, 0.0, 0.0}, spacing, "hdivmg permeability " + field.provenance);
  write_scalars(out, "kappa", Eigen::Map<const Vector>(field.values.data(), field.size()));
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

void
write_report_csv(const std::filesystem::path &path, const SolveReport &report)
{
  std::ofstream out = open_output(path);
  out << "key,value\n";
  out << "iterations," << report.iterations << '\n';
  out << "converged," << (report.converged ? 1 : 0) << '\n';
  out << "final_residual," << format_double(report.final_residual) << '\n';
  out << "assembly_seconds," << format_double(report.timings.assembly) << '\n';
  out << "setup_seconds," << format_double(report.timings.setup) << '\n';
  out << "solve_seconds," << format_double(report.timings.solve) << '\n';
  for (const auto &[key, value] : report.config)
    out << key << ',' << value << '\n';
  for (std::size_t i = 0; i < report.residual_history.size(); ++i)
    out << "residual_" << i << ',' << format_double(report.residual_history[i]) << '\n';
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

void
write_sweep_csv(const std::filesystem::path &path, const SweepTable &table)
{
  write_sweep_csv(path, {""}, {table});
}

void
write_sweep_csv(const std::filesystem::path &path, const std::vector<std::string> &labels,
                const std::vector<SweepTable> &tables)
{
  require(!tables.empty() && labels.size() == tables.size(), "one label per table is required");
  for (const auto &t : tables)
    require(t.grids == tables.front().grids, "tables must share their grids");
  std::ofstream out = open_output(path);
  out << "grid";
  for (std::size_t t = 0; t < tables.size(); ++t)
    for (double c : tables[t].contrasts)
      out << ',' << (labels[t].empty() ? "" : labels[t] + ":") << format_double(c);
  out << '\n';
  for (std::size_t r = 0; r < tables.front().grids.size(); ++r)
  {
    out << tables.front().grids[r];
    for (const auto &t : tables)
      for (const auto &entry : t.iterations[r])
        out << ',' << (entry ? std::to_string(*entry) : std::string("DNF"));
    out << '\n';
  }
  if (!out)
    throw Error("failed writing '" + path.string() + "'");
}

std::vector<std::vector<std::string>>
read_csv(const std::filesystem::path &path)
{
  std::ifstream in(path);
  if (!in)
    throw Error("cannot open '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line))
  {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    std::vector<std::string> row;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ','))
      row.push_back(cell);
    if (line.back() == ',')
      row.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepTable
read_sweep_csv(const std::filesystem::path &path)
{
  const auto rows = read_csv(path);
  if (rows.empty() || rows.front().empty() || rows.front().front() != "grid")
    throw Error("'" + path.string() + "' is not a sweep table");
  SweepTable table;
  for (std::size_t c = 1; c < rows.front().size(); ++c)
  {
    const std::string &h = rows.front()[c];
    const auto colon = h.rfind(':');
    table.contrasts.push_back(std::stod(colon == std::string::npos ? h : h.substr(colon + 1)));
  }
  for (std::size_t r = 1; r < rows.size(); ++r)
  {
    if (rows[r].size() != rows.front().size())
      throw Error("'" + path.string() + "': row " + std::to_string(r) + " has the wrong number of columns");
    table.grids.push_back(std::stoi(rows[r][0]));
    std::vector<std::optional<int>> entries;
    for (std::size_t c = 1; c < rows[r].size(); ++c)
      entries.push_back(rows[r][c] == "DNF" ? std::nullopt : std::optional<int>(std::stoi(rows[r][c])));
    table.iterations.push_back(std::move(entries));
  }
  return table;
}

} // namespace hdivmg
