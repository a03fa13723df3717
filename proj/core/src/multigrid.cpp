#include "hdivmg/multigrid.hpp"

#include <cmath>
#include <random>

namespace hdivmg
{

CoarseSolver::CoarseSolver(const SystemOperator &op, Index cap, bool bordered)
  : size_(op.size())
  , bordered_(bordered)
{
  if (op.size() > cap)
    throw InvalidArgument("coarse system has " + std::to_string(op.size()) + " unknowns, above the cap of " +
                          std::to_string(cap) + "; use a coarser base mesh and more refinement levels");

  const Index nu = op.num_velocity();
  const Index np = op.num_pressure();
  const Index n = bordered ? size_ + 1 : size_;
  std::vector<Eigen::Triplet<double, Index>> entries;
  entries.reserve(static_cast<std::size_t>(op.A().nonZeros() + 2 * op.B().nonZeros() + 2 * np));
  for (Index r = 0; r < nu; ++r)
    for (SparseMatrix::InnerIterator it(op.A(), r); it; ++it)
      entries.emplace_back(r, it.col(), it.value());
  for (Index r = 0; r < np; ++r)
    for (SparseMatrix::InnerIterator it(op.B(), r); it; ++it)
    {
      entries.emplace_back(nu + r, it.col(), it.value());
      entries.emplace_back(it.col(), nu + r, it.value());
    }
  if (bordered)
    for (Index p = 0; p < np; ++p)
    {
      entries.emplace_back(nu + p, size_, op.pressure_weights()[p]);
      entries.emplace_back(size_, nu + p, op.pressure_weights()[p]);
    }
  ColMatrix matrix(n, n);
  matrix.setFromTriplets(entries.begin(), entries.end());
  matrix.makeCompressed();

  lu_ = std::make_shared<Eigen::SparseLU<ColMatrix>>();
  lu_->analyzePattern(matrix);
  lu_->factorize(matrix);
  if (lu_->info() != Eigen::Success)
    throw SingularMatrix("coarse saddle-point system is singular: " + lu_->lastErrorMessage());

  // The LU does not expose its pivots; a solve with a generic right-hand
  // side detects near-singular factors by its residual.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector probe(n);
  for (Index i = 0; i < n; ++i)
    probe[i] = dist(rng);
  const Vector x = lu_->solve(probe);
  const double residual = (matrix * x - probe).norm();
  if (!x.allFinite() || !(residual <= 1e-8 * probe.norm()))
    throw SingularMatrix("coarse saddle-point system is singular (probe residual " + std::to_string(residual) +
                         "); the pressure-mean constraint is missing or the coefficients are degenerate");
}

Vector
CoarseSolver::solve(const Vector &b) const
{
  require(b.size() == size_, "coarse solve: size mismatch");
  if (!bordered_)
    return lu_->solve(b);
  Vector rhs(size_ + 1);
  rhs.head(size_) = b;
  rhs[size_] = 0.0;
  const Vector x = lu_->solve(rhs);
  return x.head(size_);
}

VCycle::VCycle(const MeshHierarchy &hierarchy, const std::vector<std::vector<double>> &kappa, double mu, int degree,
               const CycleOptions &options)
  : options_(options)
{
  require(options.smoothing_steps >= 1, "at least one smoothing step is required");
  require(static_cast<int>(kappa.size()) == hierarchy.num_levels(), "one permeability array per level is required");
  const int J = hierarchy.finest_level();
  require(J < 30, "too many levels");

  for (int j = 0; j <= J; ++j)
    operators_.push_back(std::make_unique<SystemOperator>(
      assemble_operator(hierarchy.level(j), kappa[static_cast<std::size_t>(j)], mu, degree)));

  coarse_ = std::make_unique<CoarseSolver>(*operators_.front(), options.coarse_cap);
  smoothers_.resize(static_cast<std::size_t>(J) + 1);
  for (int j = 1; j <= J; ++j)
    smoothers_[static_cast<std::size_t>(j)] =
      std::make_unique<PatchSmoother>(*operators_[static_cast<std::size_t>(j)], vertex_patches(hierarchy, j));
  transfers_.reserve(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j)
    transfers_.emplace_back(hierarchy, j, degree);
}

int
VCycle::smoothing_steps(int level) const
{
  require(level >= 0 && level <= finest_level(), "level out of range");
  if (level == 0)
    return 0;
  if (!options_.variable)
    return options_.smoothing_steps;
  return options_.smoothing_steps << (finest_level() - level);
}

Vector
VCycle::apply(const Vector &b, CycleStats *stats) const
{
  return apply(finest_level(), b, stats);
}

Vector
VCycle::apply(int level, const Vector &b, CycleStats *stats) const
{
  require(level >= 0 && level <= finest_level(), "level out of range");
  const SystemOperator &op = this->op(level);
  require(b.size() == op.size(), "V-cycle: right-hand side does not match the level");
  if (stats != nullptr && stats->pre_smoothing.size() != operators_.size())
  {
    stats->pre_smoothing.assign(operators_.size(), 0);
    stats->post_smoothing.assign(operators_.size(), 0);
  }

  if (level == 0)
  {
    if (stats != nullptr)
      ++stats->coarse_solves;
    return coarse_->solve(b);
  }

  const PatchSmoother &smoother = this->smoother(level);
  const int m = smoothing_steps(level);
  Vector x = Vector::Zero(op.size());
  for (int i = 0; i < m; ++i)
    smoother.smooth(b, x);

  const TransferPair &transfer = this->transfer(level - 1);
  const Vector residual = b - op.apply(x);
  const Vector coarse = apply(level - 1, transfer.restrict_residual(residual), stats);
  x += transfer.prolong_homogeneous(coarse);

  for (int i = 0; i < m; ++i)
    smoother.smooth(b, x);

  if (stats != nullptr)
  {
    stats->pre_smoothing[static_cast<std::size_t>(level)] += m;
    stats->post_smoothing[static_cast<std::size_t>(level)] += m;
  }
  return x;
}

} // namespace hdivmg
