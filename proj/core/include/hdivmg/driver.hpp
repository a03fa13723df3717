#ifndef HDIVMG_DRIVER_HPP
#define HDIVMG_DRIVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "hdivmg/fields.hpp"
#include "hdivmg/krylov.hpp"

namespace hdivmg
{

enum class Model
{
  darcy,
  brinkman
};

Model
parse_model(const std::string &name);
std::string
to_string(Model model);

/// Where the permeability comes from. Generated fields put kappa = 1 on
/// the structures and 1 / contrast on the background (swapped when
/// `params.reversed` is set).
struct FieldSpec
{
  /// "constant" or a generator name.
  std::string kind = "constant";
  double contrast = 1.0;
  std::uint64_t seed = 1;
  FieldParams params;
};

struct ProblemSpec
{
  Model model = Model::darcy;
  double mu = 0.0;
  int degree = 0;
  int dim = 2;
  /// Finest cells per axis.
  MultiIndex grid{64, 64, 64};
  /// Explicit hierarchy; when `refinements` is negative the deepest
  /// hierarchy with at least two coarse cells per axis is used.
  MultiIndex coarse_cells{2, 2, 2};
  int refinements = -1;
  Box box = Box::unit();

  /// Overrides `field_spec`; rescaled to the finest grid when needed.
  std::optional<PermeabilityField> field;
  FieldSpec field_spec;

  Point g{1.0, 0.0, 0.0};
  Point f{0.0, 0.0, 0.0};
  /// Overrides the constant g and f.
  std::optional<BoundaryData> data;

  GmresOptions gmres;
  CycleOptions cycle;

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

/// Coarse cell counts and number of refinements for the finest grid.
std::pair<MultiIndex, int>
choose_hierarchy(int dim, const MultiIndex &grid);

/// Finest-level permeability described by `spec`.
PermeabilityField
make_field(const ProblemSpec &spec, const MultiIndex &finest_cells);

struct Solution
{
  CartesianLevel level;
  int degree = 0;
  Vector velocity;
  Vector pressure;
  /// div u at the pressure nodes.
  Vector divergence;
  PermeabilityField field;
  SolveReport report;
};

/// Builds hierarchy, permeability levels, operators and the V-cycle, then
/// runs GMRES. Errors from the phases are rethrown with the phase name.
Solution
solve_problem(const ProblemSpec &spec);

struct SweepTable
{
  std::vector<int> grids;
  std::vector<double> contrasts;
  /// rows[grid][contrast]: iteration count, or nullopt for a failed solve.
  std::vector<std::vector<std::optional<int>>> iterations;
};

/// One solve per (grid, contrast) pair; `grid` sets every axis. A solve
/// that throws or does not converge is recorded as missing. With
/// jobs > 1 the entries run on several threads.
SweepTable
run_sweep(const ProblemSpec &spec, const std::vector<int> &grids, const std::vector<double> &contrasts, int jobs = 1);

} // namespace hdivmg

#endif
