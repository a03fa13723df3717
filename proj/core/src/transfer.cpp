#include "hdivmg/transfer.hpp"

#include <algorithm>
#include <cmath>

namespace hdivmg
{

namespace
{

// Coarse cell containing a physical point and the point's unit-cell
// coordinates in it.
std::pair<Index, Point>
locate(const CartesianLevel &level, const Point &x)
{
  MultiIndex c{0, 0, 0};
  Point xhat{0.0, 0.0, 0.0};
  for (int a = 0; a < level.dim(); ++a)
  {
    const double t = (x[a] - level.box().origin[a]) / level.spacing()[a];
    Index i = static_cast<Index>(std::floor(t + 1e-12));
    i = std::clamp(i, Index{0}, level.cells()[a] - 1);
    c[a] = i;
    xhat[a] = std::clamp(t - i, 0.0, 1.0);
  }
  return {level.cell_index(c), xhat};
}

using Triplets = std::vector<Eigen::Triplet<double, Index>>;

} // namespace

TransferPair::TransferPair(const MeshHierarchy &hierarchy, int coarse_level, int degree, bool essential_normal_bc)
  : coarse_level_(coarse_level)
  , coarse_(hierarchy.level(coarse_level), degree)
  , fine_(hierarchy.level(coarse_level + 1), degree)
{
  require(coarse_level >= 0 && coarse_level < hierarchy.finest_level(), "transfer needs coarse level < J");
  const CartesianLevel &clevel = coarse_.level();
  const ReferenceElement &element = coarse_.element();

  Triplets u_entries;
  Triplets u0_entries;
  const std::vector<char> fine_fixed = essential_normal_bc ? fine_.boundary_normal_mask()
                                                          : std::vector<char>(fine_.num_velocity(), 0);
  const std::vector<char> coarse_fixed = essential_normal_bc ? coarse_.boundary_normal_mask()
                                                            : std::vector<char>(coarse_.num_velocity(), 0);
  std::vector<Index> cdofs;
  for (Index i = 0; i < fine_.num_velocity(); ++i)
  {
    const auto [component, x] = fine_.velocity_dof_location(i);
    const auto [cell, xhat] = locate(clevel, x);
    coarse_.cell_velocity_dofs(cell, cdofs);
    for (int s = 0; s < element.num_velocity(); ++s)
    {
      if (element.velocity_shape(s).component != component)
        continue;
      const double v = element.velocity_value(s, xhat);
      if (std::abs(v) < 1e-14)
        continue;
      const Index col = cdofs[static_cast<std::size_t>(s)];
      u_entries.emplace_back(i, col, v);
      if (!fine_fixed[static_cast<std::size_t>(i)] && !coarse_fixed[static_cast<std::size_t>(col)])
        u0_entries.emplace_back(i, col, v);
    }
  }
  prolong_u_.resize(fine_.num_velocity(), coarse_.num_velocity());
  prolong_u_.setFromTriplets(u_entries.begin(), u_entries.end());
  prolong_u0_.resize(fine_.num_velocity(), coarse_.num_velocity());
  prolong_u0_.setFromTriplets(u0_entries.begin(), u0_entries.end());

  Triplets p_entries;
  const CartesianLevel &flevel = fine_.level();
  for (Index fc = 0; fc < flevel.num_cells(); ++fc)
    for (int q = 0; q < element.num_pressure(); ++q)
    {
      Point x = flevel.cell_origin(fc);
      for (int a = 0; a < flevel.dim(); ++a)
        x[a] += element.pressure_node(q)[a] * flevel.spacing()[a];
      const auto [cell, xhat] = locate(clevel, x);
      for (int s = 0; s < element.num_pressure(); ++s)
      {
        const double v = element.pressure_value(s, xhat);
        if (std::abs(v) < 1e-14)
          continue;
        p_entries.emplace_back(fine_.pressure_dof(fc, q), coarse_.pressure_dof(cell, s), v);
      }
    }
  prolong_p_.resize(fine_.num_pressure(), coarse_.num_pressure());
  prolong_p_.setFromTriplets(p_entries.begin(), p_entries.end());

  prolong_u_.makeCompressed();
  prolong_u0_.makeCompressed();
  prolong_p_.makeCompressed();

  mass_fine_ = velocity_mass_matrix(fine_);
  const Eigen::SparseMatrix<double> mass_coarse = velocity_mass_matrix(coarse_);
  mass_coarse_solver_ = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>(mass_coarse);
  if (mass_coarse_solver_->info() != Eigen::Success)
    throw SingularMatrix("coarse velocity mass matrix could not be factorized");

  auto weights = [](const DofLayout &layout) {
    Vector w(layout.num_pressure());
    for (Index c = 0; c < layout.level().num_cells(); ++c)
      for (int q = 0; q < layout.element().num_pressure(); ++q)
        w[layout.pressure_dof(c, q)] = layout.element().pressure_weight(q) * layout.level().cell_volume();
    return w;
  };
  pressure_weights_fine_ = weights(fine_);
  pressure_weights_coarse_ = weights(coarse_);
}

Vector
TransferPair::prolong(const Vector &coarse) const
{
  require(coarse.size() == coarse_.size(), "prolong: size mismatch");
  Vector fine(fine_.size());
  fine.head(fine_.num_velocity()).noalias() = prolong_u_ * coarse.head(coarse_.num_velocity());
  fine.tail(fine_.num_pressure()).noalias() = prolong_p_ * coarse.tail(coarse_.num_pressure());
  return fine;
}

Vector
TransferPair::prolong_homogeneous(const Vector &coarse) const
{
  require(coarse.size() == coarse_.size(), "prolong: size mismatch");
  Vector fine(fine_.size());
  fine.head(fine_.num_velocity()).noalias() = prolong_u0_ * coarse.head(coarse_.num_velocity());
  fine.tail(fine_.num_pressure()).noalias() = prolong_p_ * coarse.tail(coarse_.num_pressure());
  return fine;
}

Vector
TransferPair::restrict_residual(const Vector &fine_residual) const
{
  require(fine_residual.size() == fine_.size(), "restrict_residual: size mismatch");
  Vector coarse(coarse_.size());
  coarse.head(coarse_.num_velocity()).noalias() =
    prolong_u0_.transpose() * fine_residual.head(fine_.num_velocity());
  coarse.tail(coarse_.num_pressure()).noalias() =
    prolong_p_.transpose() * fine_residual.tail(fine_.num_pressure());
  return coarse;
}

Vector
TransferPair::restrict_function(const Vector &fine) const
{
  require(fine.size() == fine_.size(), "restrict_function: size mismatch");
  Vector coarse(coarse_.size());
  const Vector mu = mass_fine_ * fine.head(fine_.num_velocity());
  const Vector rhs_u = prolong_u_.transpose() * mu;
  coarse.head(coarse_.num_velocity()) = mass_coarse_solver_->solve(rhs_u);
  const Vector mp = pressure_weights_fine_.cwiseProduct(fine.tail(fine_.num_pressure()));
  const Vector rhs_p = prolong_p_.transpose() * mp;
  coarse.tail(coarse_.num_pressure()) = rhs_p.cwiseQuotient(pressure_weights_coarse_);
  return coarse;
}

TransferPair
build_transfer(const MeshHierarchy &hierarchy, int coarse_level, int degree, bool essential_normal_bc)
{
  return TransferPair(hierarchy, coarse_level, degree, essential_normal_bc);
}

} // namespace hdivmg
