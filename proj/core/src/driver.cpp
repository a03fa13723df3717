#include "hdivmg/driver.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace hdivmg
{

Model
parse_model(const std::string &name)
{
  if (name == "darcy")
    return Model::darcy;
  if (name == "brinkman")
    return Model::brinkman;
  throw InvalidArgument("unknown model '" + name + "'");
}

std::string
to_string(Model model)
{
  return model == Model::darcy ? "darcy" : "brinkman";
}

void
ProblemSpec::validate() const
{
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  require(degree == 0 || degree == 1, "degree must be 0 or 1");
  require(!(degree == 1 && dim == 3), "RT1 is only available in 2D");
  if (model == Model::darcy)
    require(mu == 0.0, "the Darcy model requires mu = 0");
  else
    require(mu > 0.0 && std::isfinite(mu), "the Brinkman model requires mu > 0");
  for (int a = 0; a < dim; ++a)
    require(grid[a] >= 2, "the grid needs at least 2 cells per axis");
  require(field_spec.contrast >= 1.0 && std::isfinite(field_spec.contrast), "contrast must be >= 1");
  require(gmres.tolerance > 0.0 && gmres.max_iterations >= 1, "invalid GMRES settings");
  require(cycle.smoothing_steps >= 1, "at least one smoothing step is required");
}

std::pair<MultiIndex, int>
choose_hierarchy(int dim, const MultiIndex &grid)
{
  int refinements = 0;
  while (true)
  {
    const Index factor = Index{1} << (refinements + 1);
    bool ok = true;
    for (int a = 0; a < dim; ++a)
      ok = ok && grid[a] % factor == 0 && grid[a] / factor >= 2;
    if (!ok)
      break;
    ++refinements;
  }
  MultiIndex coarse{1, 1, 1};
  for (int a = 0; a < dim; ++a)
    coarse[a] = grid[a] >> refinements;
  return {coarse, refinements};
}

PermeabilityField
make_field(const ProblemSpec &spec, const MultiIndex &finest_cells)
{
  if (spec.field)
  {
    require(spec.field->dim == spec.dim, "field dimension does not match the problem");
    return rescale_field(*spec.field, finest_cells);
  }
  const FieldSpec &fs = spec.field_spec;
  if (fs.kind == "constant")
    return constant_field(spec.dim, finest_cells, 1.0);
  return generate_field(parse_field_kind(fs.kind), spec.dim, finest_cells, 1.0, 1.0 / fs.contrast, fs.seed,
                        fs.params);
}

namespace
{

using Clock = std::chrono::steady_clock;

double
seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename F>
auto
phase(const char *name, F &&f)
{
  try
  {
    return f();
  }
  catch (const SingularMatrix &e)
  {
    throw SingularMatrix(std::string(name) + ": " + e.what());
  }
  catch (const InvalidArgument &e)
  {
    throw InvalidArgument(std::string(name) + ": " + e.what());
  }
  catch (const Error &e)
  {
    throw Error(std::string(name) + ": " + e.what());
  }
}

std::string
format_number(double v)
{
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

} // namespace

Solution
solve_problem(const ProblemSpec &spec)
{
  spec.validate();
  const auto t0 = Clock::now();

  MultiIndex coarse = spec.coarse_cells;
  int refinements = spec.refinements;
  if (refinements < 0)
    std::tie(coarse, refinements) = choose_hierarchy(spec.dim, spec.grid);
  const MeshHierarchy hierarchy =
    phase("mesh", [&] { return build_hierarchy(spec.dim, coarse, refinements, spec.box); });

  Solution solution;
  solution.level = hierarchy.finest();
  solution.degree = spec.degree;
  solution.field = phase("field", [&] { return make_field(spec, hierarchy.finest().cells()); });
  const auto kappa = phase("field", [&] { return coarsen_levels(solution.field, hierarchy); });

  const BoundaryData data = spec.data ? *spec.data : BoundaryData::constant(spec.g, spec.f);
  const auto t_setup = Clock::now();
  const VCycle cycle = phase("setup", [&] { return VCycle(hierarchy, kappa, spec.mu, spec.degree, spec.cycle); });
  const SystemOperator &op = cycle.finest_op();
  const auto t_rhs = Clock::now();
  const Vector rhs = phase("assembly", [&] { return assemble_rhs(op, data); });
  const Vector lifting = phase("assembly", [&] { return boundary_lifting(op, data); });
  const double assembly = seconds_since(t_rhs);
  const double setup = std::chrono::duration<double>(t_rhs - t_setup).count();

  const auto t_solve = Clock::now();
  GmresResult result = phase("solve", [&] { return gmres(cycle, rhs, spec.gmres); });
  const Vector x = result.x + lifting;

  solution.report = std::move(result.report);
  solution.report.timings.assembly = assembly;
  solution.report.timings.setup = setup;
  solution.report.timings.solve = seconds_since(t_solve);
  solution.velocity = x.head(op.num_velocity());
  solution.pressure = x.tail(op.num_pressure());
  solution.divergence = compute_divergence(op.layout(), solution.velocity);

  auto &config = solution.report.config;
  config["model"] = to_string(spec.model);
  config["mu"] = format_number(spec.mu);
  config["degree"] = std::to_string(spec.degree);
  config["dim"] = std::to_string(spec.dim);
  std::string grid;
  for (int a = 0; a < spec.dim; ++a)
    grid += (a ? "x" : "") + std::to_string(hierarchy.finest().cells()[a]);
  config["grid"] = grid;
  config["levels"] = std::to_string(hierarchy.num_levels());
  config["field"] = solution.field.provenance;
  config["contrast"] = format_number(contrast(solution.field));
  config["smoothing_steps"] = std::to_string(spec.cycle.smoothing_steps);
  config["cycle"] = spec.cycle.variable ? "variable" : "standard";
  std::string schedule;
  for (int j = 1; j <= cycle.finest_level(); ++j)
    schedule += (j > 1 ? " " : "") + std::to_string(cycle.smoothing_steps(j));
  config["schedule"] = schedule;
  config["tolerance"] = format_number(spec.gmres.tolerance);
  config["unknowns"] = std::to_string(op.size());
  config["total_seconds"] = format_number(seconds_since(t0));
  return solution;
}

SweepTable
run_sweep(const ProblemSpec &spec, const std::vector<int> &grids, const std::vector<double> &contrasts, int jobs)
{
  require(!grids.empty() && !contrasts.empty(), "a sweep needs at least one grid and one contrast");
  SweepTable table;
  table.grids = grids;
  table.contrasts = contrasts;
  table.iterations.assign(grids.size(), std::vector<std::optional<int>>(contrasts.size()));

  const std::size_t total = grids.size() * contrasts.size();
  auto run = [&](std::size_t entry) {
    const std::size_t r = entry / contrasts.size();
    const std::size_t c = entry % contrasts.size();
    ProblemSpec s = spec;
    s.grid = {grids[r], grids[r], grids[r]};
    s.refinements = -1;
    s.field_spec.contrast = contrasts[c];
    try
    {
      const Solution sol = solve_problem(s);
      if (sol.report.converged)
        table.iterations[r][c] = sol.report.iterations;
    }
    catch (const std::exception &)
    {
    }
  };

  if (jobs <= 1)
  {
    for (std::size_t e = 0; e < total; ++e)
      run(e);
    return table;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (int t = 0; t < jobs; ++t)
    workers.emplace_back([&] {
      for (std::size_t e = next++; e < total; e = next++)
        run(e);
    });
  workers.clear();
  return table;
}

} // namespace hdivmg
