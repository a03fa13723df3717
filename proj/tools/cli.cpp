#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include <hdivmg/io.hpp>

namespace hdivmg::cli
{

namespace
{

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string>
split(const std::string &text, const std::string &separators)
{
  std::vector<std::string> parts;
  std::string current;
  for (char c : text)
  {
    if (separators.find(c) != std::string::npos)
    {
      parts.push_back(current);
      current.clear();
    }
    else
      current += c;
  }
  parts.push_back(current);
  return parts;
}

double
to_double(const std::string &s, const std::string &what)
{
  std::size_t used = 0;
  double v = 0.0;
  try
  {
    v = std::stod(s, &used);
  }
  catch (const std::exception &)
  {
    used = 0;
  }
  if (s.empty() || used != s.size())
    throw UsageError("invalid number '" + s + "' for " + what);
  return v;
}

int
to_int(const std::string &s, const std::string &what)
{
  const double v = to_double(s, what);
  if (v != static_cast<int>(v))
    throw UsageError("invalid integer '" + s + "' for " + what);
  return static_cast<int>(v);
}

std::vector<double>
parse_list(const std::string &s, const std::string &what)
{
  std::vector<double> values;
  for (const auto &part : split(s, ","))
    values.push_back(to_double(part, what));
  return values;
}

/// "64", "64x32" or "64,32,16".
MultiIndex
parse_extents(const std::string &s, int dim, const std::string &what)
{
  const auto parts = split(s, "x,");
  MultiIndex e{1, 1, 1};
  if (parts.size() == 1)
  {
    const int n = to_int(parts[0], what);
    e = {n, n, dim == 3 ? n : 1};
  }
  else if (static_cast<int>(parts.size()) == dim)
    for (int a = 0; a < dim; ++a)
      e[a] = to_int(parts[static_cast<std::size_t>(a)], what);
  else
    throw UsageError(what + " needs 1 or " + std::to_string(dim) + " values");
  for (int a = 0; a < dim; ++a)
    if (e[a] < 1)
      throw UsageError(what + " must be positive");
  return e;
}

Point
parse_vector(const std::string &s, int dim, const std::string &what)
{
  const auto values = parse_list(s, what);
  if (static_cast<int>(values.size()) != dim)
    throw UsageError(what + " needs " + std::to_string(dim) + " components");
  Point p{0.0, 0.0, 0.0};
  std::copy(values.begin(), values.end(), p.begin());
  return p;
}

std::filesystem::path
output_dir(const std::string &flag)
{
  if (!flag.empty())
    return flag;
  if (const char *env = std::getenv("HDIVMG_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

struct FieldInput
{
  std::string path;
  std::string format = "raw";
  std::string dims;
  int components = 1;
  int component = 0;
  bool invert = false;
  double scale = 1.0;
};

void
add_field_input(CLI::App &cmd, FieldInput &in)
{
  cmd.add_option("--format", in.format, "Input format: raw or ascii")
    ->check(CLI::IsMember({"raw", "ascii"}))
    ->capture_default_str();
  cmd.add_option("--dims", in.dims, "Extents of an ascii field, e.g. 60,220,85");
  cmd.add_option("--components", in.components, "Number of value blocks in an ascii file (3 for kx,ky,kz)")
    ->check(CLI::PositiveNumber);
  cmd.add_option("--component", in.component, "Block to read from a multi-component ascii file")
    ->check(CLI::NonNegativeNumber);
  cmd.add_flag("--invert", in.invert, "Input holds permeability K; store kappa = scale / K");
  cmd.add_option("--scale", in.scale, "Viscosity scale for --invert")->check(CLI::PositiveNumber);
}

PermeabilityField
read_field_input(const FieldInput &in, int dim_hint)
{
  PermeabilityField field;
  if (in.format == "raw")
    field = load_field(in.path);
  else
  {
    if (in.dims.empty())
      throw UsageError("--dims is required for ascii fields");
    const int dim = static_cast<int>(split(in.dims, "x,").size()) == 3 ? 3 : (dim_hint == 3 ? 3 : 2);
    if (in.component >= in.components)
      throw UsageError("--component must be below --components");
    field = load_ascii_field(in.path, dim, parse_extents(in.dims, dim, "--dims"), in.components, in.component);
  }
  return in.invert ? invert_permeability(field, in.scale) : field;
}

struct ProblemFlags
{
  std::string model = "darcy";
  double mu = -1.0;
  int degree = 0;
  int dim = 2;
  std::string grid = "64";
  std::string field = "constant";
  FieldInput field_file;
  double contrast = 1e4;
  std::uint64_t seed = 1;
  bool reverse = false;
  int block_size = 1;
  int inclusions = FieldParams{}.inclusions;
  std::string g;
  std::string f;
  double tol = 1e-6;
  int max_iter = 500;
  int smoothing = 2;
  bool standard_cycle = false;
  bool flexible = false;
};

void
add_problem_flags(CLI::App &cmd, ProblemFlags &p, bool with_grid)
{
  cmd.add_option("--model", p.model, "darcy or brinkman")->check(CLI::IsMember({"darcy", "brinkman"}));
  cmd.add_option("--mu", p.mu, "Viscosity (default 0 for darcy, 1e-2 for brinkman)");
  cmd.add_option("--degree", p.degree, "Raviart-Thomas degree k")->check(CLI::IsMember({0, 1}));
  cmd.add_option("--dim", p.dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
  if (with_grid)
    cmd.add_option("--grid", p.grid, "Finest cells per axis, e.g. 128 or 128x64");
  cmd.add_option("--field", p.field,
                 "constant, checkerboard, open_foam, inclusions, connected_inclusions, or a field file");
  cmd.add_option("--field-format", p.field_file.format, "Format of a field file: raw or ascii")
    ->check(CLI::IsMember({"raw", "ascii"}));
  cmd.add_option("--field-dims", p.field_file.dims, "Extents of an ascii field file");
  cmd.add_option("--field-component", p.field_file.component, "Block of a multi-component ascii file");
  cmd.add_option("--field-components", p.field_file.components, "Number of blocks in the ascii file");
  cmd.add_option("--contrast", p.contrast, "Ratio between the two kappa values of a generated field")
    ->check(CLI::Range(1.0, 1e300));
  cmd.add_option("--seed", p.seed, "Generator seed");
  cmd.add_flag("--reverse-roles", p.reverse, "Swap the kappa values of structures and background");
  cmd.add_option("--block-size", p.block_size, "Checkerboard block size in cells")->check(CLI::PositiveNumber);
  cmd.add_option("--inclusions", p.inclusions, "Number of inclusions")->check(CLI::NonNegativeNumber);
  cmd.add_option("--g", p.g, "Constant boundary velocity, e.g. 1,0");
  cmd.add_option("--f", p.f, "Constant volume force");
  cmd.add_option("--tol", p.tol, "Relative residual reduction")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", p.max_iter, "GMRES iteration limit")->check(CLI::PositiveNumber);
  cmd.add_option("--smoothing-steps", p.smoothing, "Smoothing steps m(J) on the finest level")
    ->check(CLI::PositiveNumber);
  cmd.add_flag("--standard-cycle", p.standard_cycle, "Use m(j) = m(J) on every level");
  cmd.add_flag("--flexible", p.flexible, "Flexible GMRES");
}

ProblemSpec
make_spec(const ProblemFlags &p)
{
  ProblemSpec spec;
  spec.model = parse_model(p.model);
  spec.mu = p.mu >= 0.0 ? p.mu : (spec.model == Model::darcy ? 0.0 : 1e-2);
  if (spec.model == Model::darcy && spec.mu != 0.0)
    throw UsageError("--model darcy requires --mu 0");
  if (spec.model == Model::brinkman && !(spec.mu > 0.0))
    throw UsageError("--model brinkman requires --mu > 0");
  spec.degree = p.degree;
  spec.dim = p.dim;
  if (spec.degree == 1 && spec.dim == 3)
    throw UsageError("--degree 1 is only available in 2D");
  spec.grid = parse_extents(p.grid, p.dim, "--grid");
  for (int a = 0; a < spec.dim; ++a)
    if (spec.grid[a] < 2)
      throw UsageError("--grid needs at least 2 cells per axis");

  const std::vector<std::string> kinds{"constant", "checkerboard", "open_foam", "inclusions",
                                       "connected_inclusions"};
  if (std::find(kinds.begin(), kinds.end(), p.field) != kinds.end())
    spec.field_spec.kind = p.field;
  else if (std::filesystem::exists(p.field))
  {
    FieldInput in = p.field_file;
    in.path = p.field;
    spec.field = read_field_input(in, p.dim);
    if (spec.field->dim != spec.dim)
      throw UsageError("field file dimension does not match --dim");
  }
  else
    throw UsageError("--field '" + p.field + "' is neither a generator nor an existing file");
  spec.field_spec.contrast = p.contrast;
  spec.field_spec.seed = p.seed;
  spec.field_spec.params.reversed = p.reverse;
  spec.field_spec.params.block_size = p.block_size;
  spec.field_spec.params.inclusions = p.inclusions;

  spec.g = {0.0, 0.0, 0.0};
  spec.g[0] = 1.0;
  if (!p.g.empty())
    spec.g = parse_vector(p.g, p.dim, "--g");
  if (!p.f.empty())
    spec.f = parse_vector(p.f, p.dim, "--f");
  spec.gmres.tolerance = p.tol;
  spec.gmres.max_iterations = p.max_iter;
  spec.gmres.flexible = p.flexible;
  spec.cycle.smoothing_steps = p.smoothing;
  spec.cycle.variable = !p.standard_cycle;
  return spec;
}

int
cmd_solve(const ProblemFlags &flags, const std::string &dir, const std::string &name, std::ostream &out)
{
  const ProblemSpec spec = make_spec(flags);
  const Solution solution = solve_problem(spec);
  const std::filesystem::path base = output_dir(dir);
  write_vtk(base / (name + ".vtk"), solution);
  write_report_csv(base / (name + ".csv"), solution.report);
  out << (solution.report.converged ? "converged" : "not converged") << " after " << solution.report.iterations
      << " iterations, relative residual " << solution.report.final_residual << '\n';
  out << "wrote " << (base / (name + ".vtk")).string() << " and " << (base / (name + ".csv")).string() << '\n';
  return solution.report.converged ? ok : not_converged;
}

int
cmd_sweep(const ProblemFlags &flags, const std::string &grids_text, const std::string &contrasts_text,
          const std::string &degrees_text, int jobs, const std::string &dir, const std::string &name,
          std::ostream &out)
{
  std::vector<int> grids;
  for (double g : parse_list(grids_text, "--grids"))
  {
    if (g < 2 || g != static_cast<int>(g))
      throw UsageError("--grids entries must be integers >= 2");
    grids.push_back(static_cast<int>(g));
  }
  const std::vector<double> contrasts = parse_list(contrasts_text, "--contrasts");
  for (double c : contrasts)
    if (!(c >= 1.0))
      throw UsageError("--contrasts entries must be >= 1");
  std::vector<int> degrees;
  for (double d : parse_list(degrees_text, "--degrees"))
  {
    if (d != 0.0 && d != 1.0)
      throw UsageError("--degrees entries must be 0 or 1");
    degrees.push_back(static_cast<int>(d));
  }

  // Validate the template once before any solve.
  ProblemFlags probe = flags;
  probe.grid = std::to_string(grids.front());
  for (int k : degrees)
  {
    probe.degree = k;
    make_spec(probe);
  }

  const std::filesystem::path base = output_dir(dir);
  bool complete = true;
  for (bool reversed : {false, true})
  {
    if (reversed && !flags.reverse)
      break;
    std::vector<SweepTable> tables;
    std::vector<std::string> labels;
    for (int k : degrees)
    {
      ProblemFlags p = probe;
      p.degree = k;
      p.reverse = reversed;
      tables.push_back(run_sweep(make_spec(p), grids, contrasts, jobs));
      labels.push_back(degrees.size() > 1 ? "RT" + std::to_string(k) : "");
    }
    for (const auto &t : tables)
      for (const auto &row : t.iterations)
        for (const auto &e : row)
          complete = complete && e.has_value();
    const std::filesystem::path path = base / (name + (reversed ? "_reversed" : "") + ".csv");
    write_sweep_csv(path, labels, tables);
    std::ifstream echo(path);
    out << echo.rdbuf();
    out << "wrote " << path.string() << '\n';
  }
  return complete ? ok : not_converged;
}

int
cmd_gen_field(const ProblemFlags &flags, const std::string &dims_text, const std::string &output,
              const std::string &vtk, std::ostream &out)
{
  if (flags.field == "constant")
    throw UsageError("gen-field needs a generator kind");
  const MultiIndex dims = parse_extents(dims_text, flags.dim, "--dims");
  FieldParams params;
  params.block_size = flags.block_size;
  params.inclusions = flags.inclusions;
  params.reversed = flags.reverse;
  const PermeabilityField field =
    generate_field(parse_field_kind(flags.field), flags.dim, dims, 1.0, 1.0 / flags.contrast, flags.seed, params);
  write_field(field, output);
  out << "wrote " << output << '\n';
  if (!vtk.empty())
  {
    write_field_vtk(vtk, field);
    out << "wrote " << vtk << '\n';
  }
  return ok;
}

int
cmd_field_info(const FieldInput &in, std::ostream &out)
{
  const PermeabilityField field = read_field_input(in, 2);
  const auto [lo, hi] = std::minmax_element(field.values.begin(), field.values.end());
  double sum = 0.0;
  for (double v : field.values)
    sum += v;
  out << "dim " << field.dim << "\ndims";
  for (int a = 0; a < field.dim; ++a)
    out << ' ' << field.dims[a];
  out << "\ncells " << field.size() << "\nmin " << *lo << "\nmax " << *hi << "\nmean "
      << sum / static_cast<double>(field.size()) << "\ncontrast " << contrast(field) << '\n';
  return ok;
}

int
cmd_convert(const FieldInput &in, const std::string &output, const std::string &rescale, const std::string &slice,
            std::ostream &out)
{
  PermeabilityField field = read_field_input(in, 2);
  if (!slice.empty())
  {
    const auto parts = split(slice, ":");
    if (parts.size() != 2)
      throw UsageError("--slice expects axis:index");
    field = slice_field(field, to_int(parts[0], "--slice axis"), to_int(parts[1], "--slice index"));
  }
  if (!rescale.empty())
    field = rescale_field(field, parse_extents(rescale, field.dim, "--rescale"));
  const std::filesystem::path path(output);
  if (path.extension() == ".vtk")
    write_field_vtk(path, field);
  else
    write_field(field, path);
  out << "wrote " << output << '\n';
  return ok;
}

} // namespace

int
run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Multigrid-preconditioned Darcy and Brinkman solver", "hdivmg"};
  app.require_subcommand(1);

  ProblemFlags problem;
  std::string dir;
  std::string name = "solution";
  auto *solve = app.add_subcommand("solve", "Solve one problem and write VTK and CSV output");
  add_problem_flags(*solve, problem, true);
  solve->add_option("--output-dir", dir, "Output directory (default $HDIVMG_OUTPUT_DIR or .)");
  solve->add_option("--name", name, "Base name of the output files");

  std::string grids = "64,128";
  std::string contrasts = "1e4,1e5,1e6";
  std::string degrees;
  int jobs = 1;
  std::string sweep_name = "sweep";
  auto *sweep = app.add_subcommand("sweep", "Iteration counts over grids and contrasts");
  add_problem_flags(*sweep, problem, false);
  sweep->add_option("--grids", grids, "Comma-separated finest grids")->capture_default_str();
  sweep->add_option("--contrasts", contrasts, "Comma-separated contrasts")->capture_default_str();
  sweep->add_option("--degrees", degrees, "Comma-separated degrees; one column block each");
  sweep->add_option("--jobs", jobs, "Parallel solves")->check(CLI::PositiveNumber);
  sweep->add_option("--output-dir", dir, "Output directory (default $HDIVMG_OUTPUT_DIR or .)");
  sweep->add_option("--name", sweep_name, "Base name of the CSV files");

  std::string dims = "128";
  std::string field_out;
  std::string vtk;
  auto *gen = app.add_subcommand("gen-field", "Generate a synthetic permeability field");
  gen->add_option("--kind", problem.field, "checkerboard, open_foam, inclusions, connected_inclusions")
    ->required()
    ->check(CLI::IsMember({"checkerboard", "open_foam", "inclusions", "connected_inclusions"}));
  gen->add_option("--dim", problem.dim, "Spatial dimension")->check(CLI::IsMember({2, 3}));
  gen->add_option("--dims", dims, "Cells per axis");
  gen->add_option("--contrast", problem.contrast, "Ratio between the two values")->check(CLI::Range(1.0, 1e300));
  gen->add_option("--seed", problem.seed, "Generator seed");
  gen->add_option("--block-size", problem.block_size, "Checkerboard block size")->check(CLI::PositiveNumber);
  gen->add_option("--inclusions", problem.inclusions, "Number of inclusions")->check(CLI::NonNegativeNumber);
  gen->add_flag("--reverse-roles", problem.reverse, "Swap structure and background values");
  gen->add_option("-o,--output", field_out, "Output PFK1 file")->required();
  gen->add_option("--vtk", vtk, "Also write a VTK preview");

  FieldInput info_in;
  auto *info = app.add_subcommand("field-info", "Print extents and statistics of a field file");
  info->add_option("input", info_in.path, "Field file")->required()->check(CLI::ExistingFile);
  add_field_input(*info, info_in);

  FieldInput conv_in;
  std::string conv_out;
  std::string rescale;
  std::string slice;
  auto *convert = app.add_subcommand("convert-field", "Convert, slice or rescale a field file");
  convert->add_option("input", conv_in.path, "Field file")->required()->check(CLI::ExistingFile);
  convert->add_option("-o,--output", conv_out, "Output file (.vtk for a preview, PFK1 otherwise)")->required();
  add_field_input(*convert, conv_in);
  convert->add_option("--rescale", rescale, "Target extents");
  convert->add_option("--slice", slice, "axis:index of a 3D field");

  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  }

  try
  {
    if (solve->parsed())
      return cmd_solve(problem, dir, name, out);
    if (sweep->parsed())
    {
      const std::string degree_list = degrees.empty() ? std::to_string(problem.degree) : degrees;
      return cmd_sweep(problem, grids, contrasts, degree_list, jobs, dir, sweep_name, out);
    }
    if (gen->parsed())
      return cmd_gen_field(problem, dims, field_out, vtk, out);
    if (info->parsed())
      return cmd_field_info(info_in, out);
    if (convert->parsed())
      return cmd_convert(conv_in, conv_out, rescale, slice, out);
  }
  catch (const UsageError &e)
  {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }
  catch (const InvalidArgument &e)
  {
    err << "error: " << e.what() << '\n';
    return usage_error;
  }
  catch (const std::exception &e)
  {
    err << "error: " << e.what() << '\n';
    return runtime_error;
  }
  return usage_error;
}

} // namespace hdivmg::cli
