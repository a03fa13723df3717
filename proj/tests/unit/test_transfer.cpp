#include <gtest/gtest.h>

#include <hdivmg/transfer.hpp>

#include "oracles.hpp"

using namespace hdivmg;
using namespace hdivmg::testing;

namespace
{

SystemOperator
unit_operator(const CartesianLevel &level, int degree, double mu = 0.0, bool essential = false)
{
  return assemble_operator(level, std::vector<double>(static_cast<std::size_t>(level.num_cells()), 1.0), mu,
                           degree, AssemblyOptions{essential});
}

double
hat(double x, double center, double width)
{
  return std::max(0.0, 1.0 - std::abs(x - center) / width);
}

} // namespace

TEST(Transfer, PressureInjectionCopiesParentValue)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 1);
  const TransferPair t(h, 0, 0);
  Vector coarse = Vector::Zero(t.coarse().size());
  const Index nu = t.coarse().num_velocity();
  for (Index c = 0; c < 4; ++c)
    coarse[nu + c] = 10.0 + static_cast<double>(c);
  const Vector fine = t.prolong(coarse);
  const auto children = parent_child_map(h, 0);
  for (Index c = 0; c < 4; ++c)
    for (Index child : children[static_cast<std::size_t>(c)])
      EXPECT_EQ(fine[t.fine().num_velocity() + child], 10.0 + static_cast<double>(c));
  EXPECT_EQ(fine.head(t.fine().num_velocity()).norm(), 0.0);
}

TEST(Transfer, LowestOrderColumnIsCoarseHat)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 1);
  const TransferPair t(h, 0, 0, false);
  const CartesianLevel &coarse = h.level(0);
  const DenseMatrix p(t.velocity_prolongation());
  // Interior x-face at x = 1/2 in the lower row.
  const Index face = coarse.face_index(0, {1, 0, 0});
  const Index col = t.coarse().face_dof(face, 0);
  for (Index i = 0; i < t.fine().num_velocity(); ++i)
  {
    const auto [component, x] = t.fine().velocity_dof_location(i);
    const double expected = component == 0 && x[1] < 0.5 ? hat(x[0], 0.5, 0.5) : 0.0;
    EXPECT_NEAR(p(i, col), expected, 1e-15) << "fine dof " << i;
  }
}

TEST(Transfer, ProlongationReproducesCoarseFunctions)
{
  // The fine interpolant of a coarse discrete function is the prolongation.
  for (int k : {0, 1})
  {
    const MeshHierarchy h = build_hierarchy(2, {2, 3, 1}, 2);
    const TransferPair t(h, 1, k, false);
    const Vector coarse = random_vector(t.coarse().size(), 9);
    const Vector fine = t.prolong(coarse);
    const Vector u = coarse.head(t.coarse().num_velocity());
    for (Index i = 0; i < t.fine().num_velocity(); ++i)
    {
      const auto [component, x] = t.fine().velocity_dof_location(i);
      // Evaluate from a coarse cell containing x (any of them: normal
      // continuity makes the value unique).
      const CartesianLevel &cl = h.level(1);
      MultiIndex c{0, 0, 0};
      Point xhat{0, 0, 0};
      for (int a = 0; a < 2; ++a)
      {
        const double s = x[a] / cl.spacing()[a];
        c[a] = std::min<Index>(static_cast<Index>(s), cl.cells()[a] - 1);
        xhat[a] = s - static_cast<double>(c[a]);
      }
      const Point v = evaluate_velocity(t.coarse(), u, cl.cell_index(c), xhat);
      EXPECT_NEAR(fine[i], v[component], 1e-12);
    }
  }
}

TEST(Transfer, RestrictionInvertsProlongation)
{
  struct Case
  {
    int dim, k;
  };
  for (const Case c : {Case{2, 0}, Case{2, 1}, Case{3, 0}})
  {
    const MeshHierarchy h = build_hierarchy(c.dim, {2, 2, 2}, 1);
    const TransferPair t(h, 0, c.k);
    const Vector x = random_vector(t.coarse().size(), 3);
    EXPECT_LE((t.restrict_function(t.prolong(x)) - x).norm(), 1e-12 * x.norm());
  }
}

TEST(Transfer, GalerkinIdentityForUnitDarcy)
{
  for (int k : {0, 1})
  {
    const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
    const TransferPair t(h, 1, k, false);
    const SystemOperator fine = unit_operator(h.level(2), k);
    const SystemOperator coarse = unit_operator(h.level(1), k);
    const DenseMatrix pu(t.velocity_prolongation());
    const DenseMatrix pp(t.pressure_prolongation());
    const DenseMatrix a = pu.transpose() * DenseMatrix(fine.A()) * pu;
    const DenseMatrix b = pp.transpose() * DenseMatrix(fine.B()) * pu;
    EXPECT_LE(max_abs(a - DenseMatrix(coarse.A())), 1e-13);
    EXPECT_LE(max_abs(b - DenseMatrix(coarse.B())), 1e-13);
  }
}

TEST(Transfer, ResidualRestrictionIsLinear)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
  const TransferPair t(h, 1, 1);
  EXPECT_EQ(t.restrict_residual(Vector::Zero(t.fine().size())).norm(), 0.0);
  const Vector r1 = random_vector(t.fine().size(), 1);
  const Vector r2 = random_vector(t.fine().size(), 2);
  const Vector lhs = t.restrict_residual(2.0 * r1 - 0.5 * r2);
  const Vector rhs = 2.0 * t.restrict_residual(r1) - 0.5 * t.restrict_residual(r2);
  EXPECT_LE((lhs - rhs).norm(), 1e-13 * lhs.norm());
  EXPECT_THROW(t.restrict_residual(Vector::Zero(3)), InvalidArgument);
  EXPECT_THROW(t.prolong(Vector::Zero(3)), InvalidArgument);
}

TEST(Transfer, ResidualRestrictionIsAdjointOfProlongation)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
  const TransferPair t(h, 1, 0);
  const Vector xc = random_vector(t.coarse().size(), 5);
  const Vector rf = random_vector(t.fine().size(), 6);
  EXPECT_NEAR(t.prolong_homogeneous(xc).dot(rf), xc.dot(t.restrict_residual(rf)), 1e-12);
}

TEST(Transfer, HomogeneousProlongationKeepsBoundaryTraceZero)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
  const TransferPair t(h, 1, 1);
  const auto mask = t.fine().boundary_normal_mask();
  const Vector fine = t.prolong_homogeneous(random_vector(t.coarse().size(), 8));
  for (Index i = 0; i < t.fine().num_velocity(); ++i)
    if (mask[static_cast<std::size_t>(i)])
      EXPECT_EQ(fine[i], 0.0);
}

TEST(Transfer, CommutesWithDivergence)
{
  for (int k : {0, 1})
  {
    const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
    const TransferPair t(h, 1, k, false);
    const Vector u = random_vector(t.coarse().num_velocity(), 12);
    const Vector lhs = compute_divergence(t.fine(), DenseMatrix(t.velocity_prolongation()) * u);
    const Vector rhs = DenseMatrix(t.pressure_prolongation()) * compute_divergence(t.coarse(), u);
    EXPECT_LE((lhs - rhs).lpNorm<Eigen::Infinity>(), 1e-11);
  }
}

TEST(Transfer, MapsDivergenceFreeSubspaceIntoItself)
{
  struct Case
  {
    Index coarse_cells;
    int k;
  };
  for (const Case c : {Case{8, 0}, Case{4, 1}})
  {
    const MeshHierarchy h = build_hierarchy(2, {c.coarse_cells, c.coarse_cells, 1}, 1);
    const TransferPair t(h, 0, c.k, false);
    const SystemOperator coarse = unit_operator(h.level(0), c.k);
    const SystemOperator fine = unit_operator(h.level(1), c.k);
    const DenseMatrix kernel = DenseMatrix(coarse.B()).fullPivLu().kernel();
    ASSERT_GT(kernel.cols(), 0);
    EXPECT_LE(max_abs(DenseMatrix(coarse.B()) * kernel), 1e-12);
    const DenseMatrix image = DenseMatrix(fine.B()) * (DenseMatrix(t.velocity_prolongation()) * kernel);
    EXPECT_LE(max_abs(image), 1e-10) << "k=" << c.k;
  }
}

TEST(Transfer, PressureMeanAndNormArePreserved)
{
  for (int k : {0, 1})
  {
    const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 1);
    const TransferPair t(h, 0, k);
    const SystemOperator coarse = unit_operator(h.level(0), k, 0.0, true);
    const SystemOperator fine = unit_operator(h.level(1), k, 0.0, true);
    const Vector p = random_vector(t.coarse().num_pressure(), 4);
    const Vector fp = DenseMatrix(t.pressure_prolongation()) * p;
    const Vector &wc = coarse.pressure_weights();
    const Vector &wf = fine.pressure_weights();
    EXPECT_NEAR(wf.dot(fp), wc.dot(p), 1e-14);
    EXPECT_NEAR(wf.dot(fp.cwiseProduct(fp)), wc.dot(p.cwiseProduct(p)), 1e-13);
  }
}
