#include "hdivmg/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

namespace hdivmg
{

void
patch_dofs(const DofLayout &layout, const VertexPatch &patch, std::vector<Index> &velocity_dofs,
           std::vector<Index> &pressure_dofs)
{
  velocity_dofs.clear();
  pressure_dofs.clear();
  const int fpd = layout.element().dofs_per_face();
  for (Index face : patch.interior_faces)
    for (int t = 0; t < fpd; ++t)
      velocity_dofs.push_back(layout.face_dof(face, t));
  for (Index cell : patch.cells)
    for (int i = 0; i < layout.element().interior_dofs(); ++i)
      velocity_dofs.push_back(layout.interior_dof(cell, i));
  for (Index cell : patch.cells)
    for (int q = 0; q < layout.element().num_pressure(); ++q)
      pressure_dofs.push_back(layout.pressure_dof(cell, q));
}

DenseMatrix
bordered_patch_matrix(const SystemOperator &op, const std::vector<Index> &velocity_dofs,
                      const std::vector<Index> &pressure_dofs)
{
  const auto nv = static_cast<Index>(velocity_dofs.size());
  const auto np = static_cast<Index>(pressure_dofs.size());
  DenseMatrix m = DenseMatrix::Zero(nv + np + 1, nv + np + 1);

  // Position of a global velocity DoF in the local list.
  auto local_velocity = [&](Index global) -> Index {
    const auto it = std::find(velocity_dofs.begin(), velocity_dofs.end(), global);
    return it == velocity_dofs.end() ? -1 : static_cast<Index>(it - velocity_dofs.begin());
  };

  for (Index i = 0; i < nv; ++i)
    for (SparseMatrix::InnerIterator it(op.A(), velocity_dofs[static_cast<std::size_t>(i)]); it; ++it)
    {
      const Index j = local_velocity(it.col());
      if (j >= 0)
        m(i, j) = it.value();
    }
  for (Index p = 0; p < np; ++p)
  {
    for (SparseMatrix::InnerIterator it(op.B(), pressure_dofs[static_cast<std::size_t>(p)]); it; ++it)
    {
      const Index j = local_velocity(it.col());
      if (j >= 0)
      {
        m(nv + p, j) = it.value();
        m(j, nv + p) = it.value();
      }
    }
    const double w = op.pressure_weights()[pressure_dofs[static_cast<std::size_t>(p)]];
    m(nv + p, nv + np) = w;
    m(nv + np, nv + p) = w;
  }
  return m;
}

std::vector<PatchSolver>
build_patch_solvers(const SystemOperator &op, const std::vector<VertexPatch> &patches)
{
  std::vector<PatchSolver> solvers;
  solvers.reserve(patches.size());
  for (std::size_t index = 0; index < patches.size(); ++index)
  {
    const VertexPatch &patch = patches[index];
    PatchSolver solver;
    solver.vertex = patch.vertex;
    solver.cells = patch.cells;
    patch_dofs(op.layout(), patch, solver.velocity_dofs, solver.pressure_dofs);
    // Patch-interior faces never lie on the domain boundary.
    for (Index dof : solver.velocity_dofs)
      if (op.constrained()[static_cast<std::size_t>(dof)])
        throw Error("patch around vertex " + std::to_string(patch.vertex) + " contains a constrained DoF");

    const DenseMatrix local = bordered_patch_matrix(op, solver.velocity_dofs, solver.pressure_dofs);
    const Eigen::PartialPivLU<DenseMatrix> lu(local);
    const double largest = local.cwiseAbs().maxCoeff();
    const double smallest_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(smallest_pivot >= 1e-14 * largest))
    {
      std::ostringstream msg;
      msg << "singular local saddle-point matrix on patch " << index << " (vertex " << patch.vertex
          << "); kappa on patch cells:";
      for (Index c : patch.cells)
        msg << ' ' << op.kappa()[static_cast<std::size_t>(c)];
      throw SingularMatrix(msg.str());
    }
    solver.inverse = lu.inverse();
    solvers.push_back(std::move(solver));
  }
  return solvers;
}

PatchSmoother::PatchSmoother(const SystemOperator &op, const std::vector<VertexPatch> &patches)
  : op_(&op)
  , solvers_(build_patch_solvers(op, patches))
{
  for (Index i = 0; i < op.num_velocity(); ++i)
    if (op.constrained()[static_cast<std::size_t>(i)])
      constrained_.push_back(i);
  for (const auto &s : solvers_)
    max_local_ = std::max(max_local_, s.local_size());
}

void
PatchSmoother::gather_residual(const PatchSolver &solver, const Vector &b, const Vector &x, Vector &r) const
{
  const SystemOperator &op = *op_;
  const Index nu = op.num_velocity();
  const auto nv = static_cast<Index>(solver.velocity_dofs.size());
  const auto np = static_cast<Index>(solver.pressure_dofs.size());
  for (Index i = 0; i < nv; ++i)
  {
    const Index row = solver.velocity_dofs[static_cast<std::size_t>(i)];
    double sum = b[row];
    for (SparseMatrix::InnerIterator it(op.A(), row); it; ++it)
      sum -= it.value() * x[it.col()];
    for (SparseMatrix::InnerIterator it(op.Bt(), row); it; ++it)
      sum -= it.value() * x[nu + it.col()];
    r[i] = sum;
  }
  for (Index p = 0; p < np; ++p)
  {
    const Index row = solver.pressure_dofs[static_cast<std::size_t>(p)];
    double sum = b[nu + row];
    for (SparseMatrix::InnerIterator it(op.B(), row); it; ++it)
      sum -= it.value() * x[it.col()];
    r[nv + p] = sum;
  }
  r[nv + np] = 0.0;
}

void
PatchSmoother::correct(const PatchSolver &solver, const Vector &b, Vector &x, Workspace &ws) const
{
  const Index n = solver.local_size();
  auto r = ws.residual.head(n);
  auto c = ws.correction.head(n);
  Vector &rv = ws.residual;
  gather_residual(solver, b, x, rv);
  c.noalias() = solver.inverse * r;
  const Index nu = op_->num_velocity();
  const auto nv = static_cast<Index>(solver.velocity_dofs.size());
  for (Index i = 0; i < nv; ++i)
    x[solver.velocity_dofs[static_cast<std::size_t>(i)]] += c[i];
  for (std::size_t p = 0; p < solver.pressure_dofs.size(); ++p)
    x[nu + solver.pressure_dofs[p]] += c[nv + static_cast<Index>(p)];
}

void
PatchSmoother::correct(Index patch, const Vector &b, Vector &x) const
{
  Workspace ws{Vector(max_local_), Vector(max_local_)};
  correct(solvers_[static_cast<std::size_t>(patch)], b, x, ws);
}

Vector
PatchSmoother::local_residual(Index patch, const Vector &b, const Vector &x) const
{
  const PatchSolver &solver = solvers_[static_cast<std::size_t>(patch)];
  Vector r(solver.local_size());
  gather_residual(solver, b, x, r);
  return r.head(solver.local_size() - 1);
}

void
PatchSmoother::smooth(const Vector &b, Vector &x) const
{
  require(b.size() == op_->size() && x.size() == op_->size(), "smoother: vector size does not match the level");
  Workspace ws{Vector(max_local_), Vector(max_local_)};
  for (auto it = solvers_.rbegin(); it != solvers_.rend(); ++it)
    correct(*it, b, x, ws);
  for (const auto &solver : solvers_)
    correct(solver, b, x, ws);
  for (Index i : constrained_)
    x[i] = b[i];
}

} // namespace hdivmg
