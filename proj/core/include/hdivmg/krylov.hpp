#ifndef HDIVMG_KRYLOV_HPP
#define HDIVMG_KRYLOV_HPP

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hdivmg/multigrid.hpp"

namespace hdivmg
{

/// y = M x for a square linear map.
using LinearMap = std::function<void(const Vector &x, Vector &y)>;

struct GmresOptions
{
  double tolerance = 1e-6;
  int max_iterations = 500;
  /// Keep the preconditioned directions and form the update from them
  /// (flexible GMRES). Otherwise the preconditioner is applied once more
  /// to the combined Krylov update.
  bool flexible = false;
};

struct Timings
{
  double assembly = 0.0;
  double setup = 0.0;
  double solve = 0.0;
};

struct SolveReport
{
  int iterations = 0;
  /// Arnoldi residual estimates relative to ||b||, starting with 1.
  std::vector<double> residual_history;
  bool converged = false;
  /// ||b - A x|| / ||b|| evaluated explicitly after the solve.
  double final_residual = 0.0;
  Timings timings;
  /// Configuration echo, key -> value.
  std::map<std::string, std::string> config;
};

struct GmresResult
{
  Vector x;
  SolveReport report;
};

/// Full GMRES with right preconditioning and a zero initial guess.
///
/// Orthogonalization is modified Gram-Schmidt with a second pass whenever
/// the new vector loses more than 30% of its norm. The iteration stops once
/// the Arnoldi residual drops below tolerance * ||b||; the true residual is
/// then evaluated, and if it is still too large the method restarts from
/// the current iterate. Hitting max_iterations returns a non-converged
/// report. A NaN in the Arnoldi process throws.
GmresResult
gmres(const LinearMap &op, const LinearMap &preconditioner, const Vector &b, const GmresOptions &options = {});

/// GMRES on the finest level of a V-cycle, followed by projecting the
/// pressure onto zero mean.
GmresResult
gmres(const VCycle &cycle, const Vector &b, const GmresOptions &options = {});

} // namespace hdivmg

#endif
