#ifndef HDIVMG_TRANSFER_HPP
#define HDIVMG_TRANSFER_HPP

#include <memory>

#include <Eigen/SparseCholesky>

#include "hdivmg/discretization.hpp"

namespace hdivmg
{

/// Grid transfer between level j and j+1.
///
/// Prolongation is the natural injection of the nested spaces: each fine
/// nodal value is the coarse function evaluated at the fine node. Residuals
/// (functionals) are restricted with the plain transpose; primal functions
/// with the L2 projection M_c^{-1} P^T M_f.
class TransferPair
{
public:
  TransferPair(const MeshHierarchy &hierarchy, int coarse_level, int degree, bool essential_normal_bc = true);

  int coarse_level() const { return coarse_level_; }
  const DofLayout &coarse() const { return coarse_; }
  const DofLayout &fine() const { return fine_; }

  /// Natural injections of the full spaces.
  const SparseMatrix &velocity_prolongation() const { return prolong_u_; }
  const SparseMatrix &pressure_prolongation() const { return prolong_p_; }

  /// Velocity injection restricted to functions with zero boundary normal
  /// trace; this is what the V-cycle uses with essential conditions.
  const SparseMatrix &homogeneous_velocity_prolongation() const { return prolong_u0_; }

  /// Coarse system vector -> fine system vector (full injection).
  Vector prolong(const Vector &coarse) const;
  /// Same on the homogeneous subspace.
  Vector prolong_homogeneous(const Vector &coarse) const;

  /// Transpose of the homogeneous prolongation applied to a fine residual.
  Vector restrict_residual(const Vector &fine_residual) const;

  /// L2 projection of a fine function onto the coarse space.
  Vector restrict_function(const Vector &fine) const;

private:
  int coarse_level_;
  DofLayout coarse_;
  DofLayout fine_;
  SparseMatrix prolong_u_;
  SparseMatrix prolong_u0_;
  SparseMatrix prolong_p_;
  SparseMatrix mass_fine_;
  Vector pressure_weights_fine_;
  Vector pressure_weights_coarse_;
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> mass_coarse_solver_;
};

TransferPair
build_transfer(const MeshHierarchy &hierarchy, int coarse_level, int degree, bool essential_normal_bc = true);

} // namespace hdivmg

#endif
