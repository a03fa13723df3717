#include <gtest/gtest.h>

#include <hdivmg/fields.hpp>
#include <hdivmg/krylov.hpp>

#include "oracles.hpp"

using namespace hdivmg;
using namespace hdivmg::testing;

namespace
{

std::vector<std::vector<double>>
constant_levels(const MeshHierarchy &h, double value = 1.0)
{
  std::vector<std::vector<double>> k;
  for (int j = 0; j < h.num_levels(); ++j)
    k.emplace_back(static_cast<std::size_t>(h.level(j).num_cells()), value);
  return k;
}

Vector
uniform_flow_rhs(const SystemOperator &op)
{
  return assemble_rhs(op, BoundaryData::constant({1.0, 0.0, 0.0}));
}

} // namespace

TEST(VCycle, VariableSmoothingSchedule)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 3);
  const VCycle cycle(h, constant_levels(h), 0.0, 0);
  EXPECT_EQ(cycle.smoothing_steps(3), 2);
  EXPECT_EQ(cycle.smoothing_steps(2), 4);
  EXPECT_EQ(cycle.smoothing_steps(1), 8);
  EXPECT_EQ(cycle.smoothing_steps(0), 0);

  const VCycle standard(h, constant_levels(h), 0.0, 0, CycleOptions{3, false});
  for (int j = 1; j <= 3; ++j)
    EXPECT_EQ(standard.smoothing_steps(j), 3);
  EXPECT_THROW(cycle.smoothing_steps(4), InvalidArgument);
  EXPECT_THROW(VCycle(h, constant_levels(h), 0.0, 0, CycleOptions{0}), InvalidArgument);
}

TEST(VCycle, InstrumentedSweepCounts)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 3);
  const VCycle cycle(h, constant_levels(h), 1e-2, 0);
  CycleStats stats;
  cycle.apply(uniform_flow_rhs(cycle.finest_op()), &stats);
  EXPECT_EQ(stats.pre_smoothing, (std::vector<long>{0, 8, 4, 2}));
  EXPECT_EQ(stats.post_smoothing, (std::vector<long>{0, 8, 4, 2}));
  EXPECT_EQ(stats.coarse_solves, 1);
}

TEST(VCycle, SingleLevelIsExactSolve)
{
  const MeshHierarchy h = build_hierarchy(2, {4, 4, 1}, 0);
  const VCycle cycle(h, constant_levels(h), 1e-2, 0);
  const Vector b = uniform_flow_rhs(cycle.finest_op());
  const GmresResult r = gmres(cycle, b, GmresOptions{1e-12});
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 1);
  EXPECT_LE((cycle.finest_op().apply(r.x) - b).norm(), 1e-12 * b.norm());
}

TEST(VCycle, IsLinearAndDeterministic)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
  const VCycle cycle(h, constant_levels(h), 1e-2, 1);
  const Index n = cycle.finest_op().size();
  const Vector a = random_vector(n, 1);
  const Vector b = random_vector(n, 2);
  const Vector lhs = cycle.apply(3.0 * a - b);
  const Vector rhs = 3.0 * cycle.apply(a) - cycle.apply(b);
  EXPECT_LE((lhs - rhs).norm(), 1e-10 * lhs.norm());
  const Vector once = cycle.apply(a);
  const Vector twice = cycle.apply(a);
  EXPECT_TRUE((once.array() == twice.array()).all());
}

TEST(VCycle, PreconditionerIsSymmetric)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 2);
  const VCycle cycle(h, coarsen_levels(generate_field(FieldKind::checkerboard, 2, {8, 8, 1}, 1.0, 1e-3, 1), h),
                     1e-2, 0);
  const Index n = cycle.finest_op().size();
  DenseMatrix m(n, n);
  for (Index j = 0; j < n; ++j)
  {
    Vector e = Vector::Zero(n);
    e[j] = 1.0;
    m.col(j) = cycle.apply(e);
  }
  EXPECT_LE(max_abs(m - m.transpose()), 1e-9 * max_abs(m));
}

TEST(CoarseSolver, MatchesDenseSolve)
{
  const CartesianLevel level(2, {2, 2, 1}, Box::unit());
  for (double mu : {0.0, 1e-2})
  {
    const SystemOperator op = assemble_operator(level, random_kappa(4, 5), mu, 0);
    const CoarseSolver solver(op);
    Vector b = random_vector(op.size(), 6);
    for (Index d = 0; d < op.num_velocity(); ++d)
      if (op.constrained()[static_cast<std::size_t>(d)])
        b[d] = 0.0;
    // Compatible right-hand side: the pressure block sums to zero.
    b.tail(op.num_pressure()).array() -= b.tail(op.num_pressure()).mean();
    const Vector x = solver.solve(b);
    EXPECT_LE((x - dense_solve(op, b)).norm(), 1e-10 * x.norm());
    EXPECT_NEAR(pressure_mean(op, x), 0.0, 1e-13);
    EXPECT_LE((op.apply(x) - b).norm(), 1e-10 * b.norm());
  }
}

TEST(CoarseSolver, RejectsSingularAndOversizedSystems)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const SystemOperator op = assemble_operator(level, std::vector<double>(16, 1.0), 0.0, 0);
  EXPECT_THROW(CoarseSolver(op, CoarseSolver::default_cap, false), SingularMatrix);
  EXPECT_THROW(CoarseSolver(op, 10), InvalidArgument);
  EXPECT_NO_THROW(CoarseSolver(op, op.size() + 1));
}

TEST(VCycle, ConstantDarcyConvergesQuickly)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 4);
  const VCycle cycle(h, constant_levels(h), 0.0, 0);
  const GmresResult r = gmres(cycle, uniform_flow_rhs(cycle.finest_op()));
  EXPECT_TRUE(r.report.converged);
  EXPECT_LE(r.report.iterations, 25);
}

TEST(VCycle, IterationsIndependentOfDepth)
{
  std::vector<int> counts;
  for (int J : {4, 5, 6})
  {
    const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, J);
    const VCycle cycle(h, constant_levels(h), 1e-2, 0);
    const GmresResult r = gmres(cycle, uniform_flow_rhs(cycle.finest_op()));
    ASSERT_TRUE(r.report.converged);
    counts.push_back(r.report.iterations);
  }
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  EXPECT_LE(*hi - *lo, 4);
}

TEST(VCycle, SolutionIsMeanFreeAndDivergenceFree)
{
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 4);
  const auto field = generate_field(FieldKind::inclusions, 2, {32, 32, 1}, 1.0, 1e-4, 3);
  const VCycle cycle(h, coarsen_levels(field, h), 1e-2, 0);
  const SystemOperator &op = cycle.finest_op();
  const BoundaryData data = BoundaryData::constant({1.0, 0.0, 0.0});
  const GmresResult r = gmres(cycle, assemble_rhs(op, data), GmresOptions{1e-10});
  ASSERT_TRUE(r.report.converged);
  EXPECT_NEAR(pressure_mean(op, r.x), 0.0, 1e-14);
  const Vector u = (r.x + boundary_lifting(op, data)).head(op.num_velocity());
  EXPECT_LE(compute_divergence(op.layout(), u).lpNorm<Eigen::Infinity>(), 1e-8);
}
