#ifndef HDIVMG_SMOOTHER_HPP
#define HDIVMG_SMOOTHER_HPP

#include <vector>

#include "hdivmg/discretization.hpp"

namespace hdivmg
{

/// Local saddle-point solver of one vertex patch.
///
/// The local velocity space consists of the DoFs strictly inside the patch
/// (normal traces on the patch boundary stay fixed, i.e. slip conditions);
/// the local pressure space holds all pressure DoFs of the patch cells and
/// is restricted to zero mean by one Lagrange multiplier.
struct PatchSolver
{
  Index vertex = 0;
  std::vector<Index> cells;
  std::vector<Index> velocity_dofs;
  /// Indices into the pressure block.
  std::vector<Index> pressure_dofs;
  /// Inverse of the bordered local matrix, computed from a pivoted LU.
  DenseMatrix inverse;

  Index local_size() const
  {
    return static_cast<Index>(velocity_dofs.size() + pressure_dofs.size()) + 1;
  }
};

/// Local DoF sets of a patch on the given layout.
void
patch_dofs(const DofLayout &layout, const VertexPatch &patch, std::vector<Index> &velocity_dofs,
           std::vector<Index> &pressure_dofs);

/// The operator restricted to the patch DoFs, bordered by the pressure
/// mean constraint:
///   [ A_ll  B_ll^T  0 ]
///   [ B_ll  0       w ]
///   [ 0     w^T     0 ]
DenseMatrix
bordered_patch_matrix(const SystemOperator &op, const std::vector<Index> &velocity_dofs,
                      const std::vector<Index> &pressure_dofs);

/// Factorizes all patches; throws SingularMatrix naming the patch and its
/// coefficients when a local matrix has a pivot below 1e-14 of its largest
/// entry.
std::vector<PatchSolver>
build_patch_solvers(const SystemOperator &op, const std::vector<VertexPatch> &patches);

/// Symmetric multiplicative Schwarz smoother over vertex patches.
///
/// One smoothing step applies x <- x + R (b - A x) with
/// R = (I - E E^*) A^{-1}, E = (I - P_N) ... (I - P_1): the patches are
/// visited from N down to 1 and then from 1 up to N, each visit adding the
/// local Ritz correction computed from the current x. Constrained boundary
/// DoFs (identity rows) are solved exactly.
class PatchSmoother
{
public:
  PatchSmoother(const SystemOperator &op, const std::vector<VertexPatch> &patches);

  const SystemOperator &op() const { return *op_; }
  Index num_patches() const { return static_cast<Index>(solvers_.size()); }
  const PatchSolver &patch(Index i) const { return solvers_[static_cast<std::size_t>(i)]; }

  /// One symmetric smoothing step.
  void smooth(const Vector &b, Vector &x) const;

  /// Local correction of one patch from the current residual.
  void correct(Index patch, const Vector &b, Vector &x) const;

  /// Residual b - A x restricted to the patch DoFs (velocity then pressure).
  Vector local_residual(Index patch, const Vector &b, const Vector &x) const;

private:
  struct Workspace
  {
    Vector residual;
    Vector correction;
  };

  void correct(const PatchSolver &solver, const Vector &b, Vector &x, Workspace &ws) const;
  void gather_residual(const PatchSolver &solver, const Vector &b, const Vector &x, Vector &r) const;

  const SystemOperator *op_;
  std::vector<PatchSolver> solvers_;
  std::vector<Index> constrained_;
  Index max_local_ = 0;
};

} // namespace hdivmg

#endif
