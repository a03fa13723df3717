#ifndef HDIVMG_MULTIGRID_HPP
#define HDIVMG_MULTIGRID_HPP

#include <memory>
#include <vector>

#include <Eigen/SparseLU>

#include "hdivmg/smoother.hpp"
#include "hdivmg/transfer.hpp"

namespace hdivmg
{

/// Direct solver for the level-0 saddle-point system.
///
/// The system is bordered by the global pressure-mean constraint
///   [ A   B^T  0 ]
///   [ B   0    w ]
///   [ 0   w^T  0 ]
/// and factorized once with a sparse LU. With `bordered = false` the plain
/// block operator is factorized instead; it is singular under pure normal
/// velocity conditions and then rejected.
class CoarseSolver
{
public:
  static constexpr Index default_cap = 50000;

  explicit CoarseSolver(const SystemOperator &op, Index cap = default_cap, bool bordered = true);

  Index size() const { return size_; }

  /// Solves the level system; the returned pressure has zero mean when
  /// bordered.
  Vector solve(const Vector &b) const;

private:
  using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;

  Index size_;
  bool bordered_;
  std::shared_ptr<Eigen::SparseLU<ColMatrix>> lu_;
};

/// Smoothing sweeps and coarse solves performed by one or more cycles.
struct CycleStats
{
  std::vector<long> pre_smoothing;
  std::vector<long> post_smoothing;
  long coarse_solves = 0;
};

struct CycleOptions
{
  /// m(J), the number of smoothing steps on the finest level.
  int smoothing_steps = 2;
  /// m(j) = m(J) 2^(J-j) when set, m(j) = m(J) otherwise.
  bool variable = true;
  Index coarse_cap = CoarseSolver::default_cap;
};

/// Multigrid V-cycle preconditioner B_J.
///
/// Every level owns an operator re-assembled from its own permeability;
/// levels 1..J carry a vertex-patch smoother and level 0 a direct solver.
/// The cycle is a fixed linear map: the same sweeps in the same order on
/// every application.
class VCycle
{
public:
  /// `kappa[j]` holds the cell values of level j.
  VCycle(const MeshHierarchy &hierarchy, const std::vector<std::vector<double>> &kappa, double mu, int degree,
         const CycleOptions &options = {});

  int finest_level() const { return static_cast<int>(operators_.size()) - 1; }
  const SystemOperator &op(int level) const { return *operators_[static_cast<std::size_t>(level)]; }
  const SystemOperator &finest_op() const { return *operators_.back(); }
  const PatchSmoother &smoother(int level) const { return *smoothers_[static_cast<std::size_t>(level)]; }
  const TransferPair &transfer(int coarse_level) const { return transfers_[static_cast<std::size_t>(coarse_level)]; }
  const CycleOptions &options() const { return options_; }

  /// m(j); zero on level 0, which is solved directly.
  int smoothing_steps(int level) const;

  /// B_J b on the finest level.
  Vector apply(const Vector &b, CycleStats *stats = nullptr) const;
  /// B_j b on level j.
  Vector apply(int level, const Vector &b, CycleStats *stats = nullptr) const;

private:
  CycleOptions options_;
  std::vector<std::unique_ptr<SystemOperator>> operators_;
  std::vector<std::unique_ptr<PatchSmoother>> smoothers_;
  std::vector<TransferPair> transfers_;
  std::unique_ptr<CoarseSolver> coarse_;
};

} // namespace hdivmg

#endif
