#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"

using namespace hdivmg;
using namespace hdivmg::testing;

namespace
{

const AssemblyOptions raw{false};

SystemOperator
assemble_const(const CartesianLevel &level, double kappa, double mu, int degree, const AssemblyOptions &o = {})
{
  const std::vector<double> k(static_cast<std::size_t>(level.num_cells()), kappa);
  return assemble_operator(level, k, mu, degree, o);
}

} // namespace

TEST(Quadrature, GaussLegendreExactness)
{
  for (int n = 1; n <= 6; ++n)
  {
    const QuadratureRule q = gauss_legendre(n);
    ASSERT_EQ(static_cast<int>(q.points.size()), n);
    for (int p = 0; p <= 2 * n - 1; ++p)
    {
      double sum = 0.0;
      for (int i = 0; i < n; ++i)
        sum += q.weights[static_cast<std::size_t>(i)] * std::pow(q.points[static_cast<std::size_t>(i)], p);
      EXPECT_NEAR(sum, 1.0 / (p + 1), 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Layout, DofCounts)
{
  for (int dim : {2, 3})
    for (int k : {0, 1})
    {
      if (dim == 3 && k == 1)
        continue;
      const CartesianLevel level(dim, {3, 4, 2}, Box::unit());
      const DofLayout layout(level, k);
      const Index tangential = dim == 2 ? k + 1 : (k + 1) * (k + 1);
      // Per component k (k+1)^(d-1) interior nodes.
      const Index interior = dim * k * tangential;
      EXPECT_EQ(layout.num_velocity(), level.num_faces() * tangential + level.num_cells() * interior);
      EXPECT_EQ(layout.num_pressure(), level.num_cells() * (dim == 2 ? (k + 1) * (k + 1) : (k + 1) * (k + 1) * (k + 1)));
      if (k == 0)
        EXPECT_EQ(layout.num_velocity(), level.num_faces());
    }
}

TEST(Layout, FaceDofsAreShared)
{
  const CartesianLevel level(2, {3, 3, 1}, Box::unit());
  const DofLayout layout(level, 1);
  const FaceSet faces = build_faces(level);
  std::vector<Index> lo, hi;
  for (const auto &f : faces.interior_faces)
  {
    layout.cell_velocity_dofs(f.cell_lo, lo);
    layout.cell_velocity_dofs(f.cell_hi, hi);
    int shared = 0;
    for (Index a : lo)
      shared += static_cast<int>(std::count(hi.begin(), hi.end(), a));
    EXPECT_EQ(shared, 2);
  }
}

TEST(Assembly, UnitCellMassBlock)
{
  const CartesianLevel cell(2, {1, 1, 1}, Box::unit());
  const SystemOperator op = assemble_const(cell, 1.0, 0.0, 0, raw);
  const Index left = op.layout().face_dof(cell.face_index(0, {0, 0, 0}), 0);
  const Index right = op.layout().face_dof(cell.face_index(0, {1, 0, 0}), 0);

  // Shape functions (1 - x, 0) and (x, 0).
  const double m00 = simpson([](double x) { return (1 - x) * (1 - x); });
  const double m01 = simpson([](double x) { return (1 - x) * x; });
  const double m11 = simpson([](double x) { return x * x; });
  const DenseMatrix a(op.A());
  EXPECT_NEAR(a(left, left), m00, 1e-14);
  EXPECT_NEAR(a(left, right), m01, 1e-14);
  EXPECT_NEAR(a(right, left), m01, 1e-14);
  EXPECT_NEAR(a(right, right), m11, 1e-14);
  EXPECT_NEAR(m00, 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(m01, 1.0 / 6.0, 1e-14);

  // -(1, div v): the divergences are -1 and +1.
  const DenseMatrix b(op.B());
  EXPECT_NEAR(b(0, left), -simpson([](double) { return -1.0; }), 1e-14);
  EXPECT_NEAR(b(0, right), -simpson([](double) { return 1.0; }), 1e-14);
  EXPECT_DOUBLE_EQ(b(0, left), 1.0);
  EXPECT_DOUBLE_EQ(b(0, right), -1.0);
}

TEST(Assembly, DarcyBlockIsLinearInKappa)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const SystemOperator one = assemble_const(level, 1.0, 0.0, 0);
  const SystemOperator c = assemble_const(level, 3.5, 0.0, 0);
  const DenseMatrix a1(one.A());
  const DenseMatrix ac(c.A());
  for (Index i = 0; i < a1.rows(); ++i)
    for (Index j = 0; j < a1.cols(); ++j)
    {
      if (one.constrained()[static_cast<std::size_t>(i)])
        continue;
      EXPECT_NEAR(ac(i, j), 3.5 * a1(i, j), 1e-14);
    }
}

TEST(Assembly, PenaltyParameter)
{
  EXPECT_DOUBLE_EQ(penalty_parameter(0, 1.0 / 128.0), 256.0);
  EXPECT_DOUBLE_EQ(penalty_parameter(1, 0.5), 12.0);
  const MeshHierarchy h = build_hierarchy(2, {2, 2, 1}, 6);
  const SystemOperator op = assemble_const(h.finest(), 1.0, 1e-2, 0);
  EXPECT_DOUBLE_EQ(op.sigma(), 256.0);
}

TEST(Assembly, RejectsInvalidInput)
{
  const CartesianLevel level(2, {2, 2, 1}, Box::unit());
  std::vector<double> k(4, 1.0);
  k[2] = 0.0;
  EXPECT_THROW(assemble_operator(level, k, 0.0, 0), InvalidArgument);
  k[2] = -1.0;
  EXPECT_THROW(assemble_operator(level, k, 0.0, 0), InvalidArgument);
  k[2] = std::nan("");
  EXPECT_THROW(assemble_operator(level, k, 0.0, 0), InvalidArgument);
  EXPECT_THROW(assemble_operator(level, std::vector<double>(3, 1.0), 0.0, 0), InvalidArgument);
  EXPECT_THROW(assemble_operator(level, std::vector<double>(4, 1.0), -1.0, 0), InvalidArgument);
  const CartesianLevel cube(3, {2, 2, 2}, Box::unit());
  EXPECT_THROW(assemble_operator(cube, std::vector<double>(8, 1.0), 1.0, 1), InvalidArgument);
}

TEST(Assembly, SymmetricBlocks)
{
  struct Case
  {
    int dim, k;
    double mu;
  };
  for (const Case c : {Case{2, 0, 0.0}, Case{2, 0, 1e-2}, Case{2, 1, 1.0}, Case{3, 0, 0.3}, Case{2, 1, 0.0}})
    for (bool essential : {true, false})
    {
      const CartesianLevel level(c.dim, {4, 3, 3}, Box{{0, 0, 0}, {1.0, 0.75, 0.9}});
      const auto kappa = random_kappa(level.num_cells(), 7);
      const SystemOperator op = assemble_operator(level, kappa, c.mu, c.k, AssemblyOptions{essential});
      const DenseMatrix a(op.A());
      EXPECT_LE(max_abs(a - a.transpose()), 1e-12 * max_abs(a));
      const DenseMatrix full = dense_system(op);
      EXPECT_LE(max_abs(full - full.transpose()), 1e-12 * max_abs(full));

      const Vector x = random_vector(op.size(), 1);
      const Vector y = random_vector(op.size(), 2);
      const double lhs = op.apply(x).dot(y);
      const double rhs = x.dot(op.apply(y));
      EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs) + 1e-14);
    }
}

TEST(Assembly, ApplyMatchesColumns)
{
  const CartesianLevel level(2, {3, 3, 1}, Box::unit());
  const SystemOperator op = assemble_operator(level, random_kappa(9, 3), 0.1, 1);
  const DenseMatrix full = dense_system(op);
  EXPECT_EQ(op.apply(Vector::Zero(op.size())).norm(), 0.0);
  for (Index i = 0; i < op.size(); i += 7)
  {
    Vector e = Vector::Zero(op.size());
    e[i] = 1.0;
    EXPECT_LE((op.apply(e) - full.col(i)).norm(), 1e-14);
  }
  Vector wrong(op.size() + 1);
  Vector out;
  EXPECT_THROW(op.apply(wrong, out), InvalidArgument);
}

TEST(Assembly, DarcyHasNoFaceTerms)
{
  // For mu = 0 the velocity block is the kappa-weighted mass matrix:
  // only DoFs of a common cell and of the same component couple.
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const auto kappa = random_kappa(16, 5);
  const SystemOperator op = assemble_operator(level, kappa, 0.0, 0, raw);
  const DofLayout &layout = op.layout();
  std::vector<Index> dofs;
  for (Index r = 0; r < op.num_velocity(); ++r)
    for (SparseMatrix::InnerIterator it(op.A(), r); it; ++it)
    {
      EXPECT_EQ(layout.velocity_dof_location(r).first, layout.velocity_dof_location(it.col()).first);
      bool common = false;
      for (Index c = 0; c < level.num_cells() && !common; ++c)
      {
        layout.cell_velocity_dofs(c, dofs);
        common = std::count(dofs.begin(), dofs.end(), r) && std::count(dofs.begin(), dofs.end(), it.col());
      }
      EXPECT_TRUE(common);
    }
  // Entrywise: kappa times the unit mass matrix.
  const DenseMatrix mass(velocity_mass_matrix(layout));
  const SystemOperator unit = assemble_const(level, 1.0, 0.0, 0, raw);
  EXPECT_LE(max_abs(DenseMatrix(unit.A()) - mass), 1e-14);
}

TEST(Assembly, KappaEntersOnlyTheMassTerm)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const auto kappa = random_kappa(16, 11);
  std::vector<double> scaled = kappa;
  for (auto &v : scaled)
    v *= 4.0;
  const SystemOperator a = assemble_operator(level, kappa, 0.5, 1, raw);
  const SystemOperator b = assemble_operator(level, scaled, 0.5, 1, raw);
  const SystemOperator darcy = assemble_operator(level, kappa, 0.0, 1, raw);
  EXPECT_LE(max_abs(DenseMatrix(b.A()) - DenseMatrix(a.A()) - 3.0 * DenseMatrix(darcy.A())), 1e-12);
}

TEST(Rhs, ZeroDataGivesZero)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  for (double mu : {0.0, 0.1})
    for (bool essential : {true, false})
    {
      const SystemOperator op = assemble_const(level, 2.0, mu, 1, AssemblyOptions{essential});
      EXPECT_EQ(assemble_rhs(op, BoundaryData::constant({0, 0, 0})).norm(), 0.0);
    }
}

TEST(Rhs, DarcyPressureFunctionalOnCoarseSquare)
{
  // Oracle: <g.n, q> face by face, with g = (1, 0) and faces of length 1/2.
  const CartesianLevel level(2, {2, 2, 1}, Box::unit());
  Vector expected = Vector::Zero(4);
  const FaceSet faces = build_faces(level);
  const Point g{1.0, 0.0, 0.0};
  for (const auto &f : faces.boundary_faces)
  {
    Point n{0, 0, 0};
    n[f.axis] = f.side == 0 ? -1.0 : 1.0;
    expected[f.cell] += (g[0] * n[0] + g[1] * n[1]) * 0.5;
  }
  EXPECT_DOUBLE_EQ(expected[0], -0.5);
  EXPECT_DOUBLE_EQ(expected[1], 0.5);

  const SystemOperator op = assemble_const(level, 1.0, 0.0, 0, raw);
  const Vector rhs = assemble_rhs(op, BoundaryData::constant(g));
  EXPECT_LE((rhs.tail(4) - expected).norm(), 1e-14);

  // Homogenized: the lifting carries the boundary flux, -B u_b equals the
  // functional above, and the constant field leaves no pressure residual.
  const SystemOperator hom = assemble_const(level, 1.0, 0.0, 0);
  const Vector lift = boundary_lifting(hom, BoundaryData::constant(g));
  Vector trace = lift;
  for (Index i = 0; i < hom.num_velocity(); ++i)
    if (!hom.constrained()[static_cast<std::size_t>(i)])
      trace[i] = 0.0;
  EXPECT_LE((-(op.B() * trace.head(hom.num_velocity())) - expected).norm(), 1e-14);
  EXPECT_EQ(assemble_rhs(hom, BoundaryData::constant(g)).tail(4).norm(), 0.0);
}

TEST(Rhs, RejectsIncompatibleData)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const SystemOperator op = assemble_const(level, 1.0, 0.0, 0);
  const BoundaryData source{[](const Point &x) { return Point{x[0], 0.0, 0.0}; },
                            [](const Point &) { return Point{0, 0, 0}; }};
  EXPECT_THROW(assemble_rhs(op, source), InvalidArgument);
}

TEST(Rhs, BrinkmanBoundaryTermsLinearInMu)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const BoundaryData data = BoundaryData::constant({1.0, 0.0, 0.0});
  const Vector a = assemble_rhs(assemble_const(level, 1.0, 1e-2, 0, raw), data);
  const Vector b = assemble_rhs(assemble_const(level, 1.0, 2e-2, 0, raw), data);
  EXPECT_GT(a.norm(), 0.0);
  EXPECT_LE((b - 2.0 * a).norm(), 1e-13 * b.norm());
  EXPECT_EQ(a.tail(16).norm(), 0.0);
}

TEST(Rhs, BrinkmanWallPenalty)
{
  // Tangential velocity DoFs on the bottom boundary see g only through the
  // wall penalty. For RT0 its weight is 2/h (a wall half a cell away) and the
  // shape integrates to h along the wall, so the entry is 2 mu at every h.
  // For RT1 the weight is 2 sigma, growing like 1/h.
  const BoundaryData data = BoundaryData::constant({1.0, 0.0, 0.0});
  for (Index n : {4, 8, 16})
  {
    const CartesianLevel level(2, {n, n, 1}, Box::unit());
    const SystemOperator op = assemble_const(level, 1.0, 1e-2, 0, raw);
    const Vector rhs = assemble_rhs(op, data);
    const Index dof = op.layout().face_dof(level.face_index(0, {n / 2, 0, 0}), 0);
    EXPECT_NEAR(rhs[dof], 2e-2, 1e-14);
  }
  EXPECT_DOUBLE_EQ(face_penalty(0, 256.0, 1.0 / 128.0, false), 128.0);
  EXPECT_DOUBLE_EQ(face_penalty(0, 256.0, 1.0 / 128.0, true), 256.0);
  EXPECT_DOUBLE_EQ(face_penalty(1, 12.0, 0.5, false), 24.0);
  EXPECT_DOUBLE_EQ(face_penalty(1, 12.0, 0.5, true), 24.0);
}

TEST(Divergence, InterpolantsOfSimpleFields)
{
  for (int dim : {2, 3})
    for (int k : {0, 1})
    {
      if (dim == 3 && k == 1)
        continue;
      const CartesianLevel level(dim, {4, 3, 2}, Box{{0, 0, 0}, {1.0, 2.0, 1.0}});
      const DofLayout layout(level, k);
      const Vector c = interpolate_velocity(layout, [](const Point &) { return Point{1.0, 0.0, 0.0}; });
      EXPECT_LE(compute_divergence(layout, c).lpNorm<Eigen::Infinity>(), 1e-13);
      const Vector lin = interpolate_velocity(layout, [](const Point &x) { return x; });
      const Vector div = compute_divergence(layout, lin);
      for (Index i = 0; i < div.size(); ++i)
        EXPECT_NEAR(div[i], static_cast<double>(dim), 1e-12);
    }
}

TEST(Divergence, QuadraticFieldIsExactForRT1)
{
  const CartesianLevel level(2, {3, 3, 1}, Box::unit());
  const DofLayout layout(level, 1);
  const Vector u = interpolate_velocity(layout, [](const Point &x) { return Point{x[0] * x[0], x[0] * x[1], 0.0}; });
  const Vector div = compute_divergence(layout, u);
  for (Index c = 0; c < level.num_cells(); ++c)
    for (int q = 0; q < layout.element().num_pressure(); ++q)
    {
      Point x = level.cell_origin(c);
      for (int a = 0; a < 2; ++a)
        x[a] += layout.element().pressure_node(q)[a] * level.spacing()[a];
      EXPECT_NEAR(div[layout.pressure_dof(c, q)], 3.0 * x[0], 1e-12);
    }
}

TEST(MeanZero, ConstantsVanishAndProjectionIsIdempotent)
{
  const CartesianLevel level(2, {4, 2, 1}, Box{{0, 0, 0}, {2.0, 1.0, 1.0}});
  const SystemOperator op = assemble_const(level, 1.0, 0.0, 1);
  Vector p = Vector::Constant(op.num_pressure(), 3.25);
  enforce_mean_zero(op, p);
  EXPECT_LE(p.norm(), 1e-14);

  Vector x = random_vector(op.size(), 4);
  enforce_mean_zero(op, x);
  EXPECT_NEAR(pressure_mean(op, x), 0.0, 1e-15);
  Vector twice = x;
  enforce_mean_zero(op, twice);
  EXPECT_LE((twice - x).norm(), 1e-15);
}

TEST(Manufactured, UniformDarcyFlowIsDiscreteSolution)
{
  // u = (1, 0) with p = -x (+ const) solves kappa u + grad p = 0, div u = 0.
  for (int k : {0, 1})
    for (Index n : {2, 4, 8})
    {
      const CartesianLevel level(2, {n, n, 1}, Box::unit());
      const SystemOperator op = assemble_const(level, 1.0, 0.0, k);
      const BoundaryData data = BoundaryData::constant({1.0, 0.0, 0.0});
      const Vector rhs = assemble_rhs(op, data);
      const Vector lift = boundary_lifting(op, data);

      Vector x(op.size());
      x.head(op.num_velocity()) =
        interpolate_velocity(op.layout(), [](const Point &) { return Point{1.0, 0.0, 0.0}; });
      x.tail(op.num_pressure()) = interpolate_pressure(op.layout(), [](const Point &p) { return -p[0]; });
      x -= lift;
      EXPECT_LE((op.apply(x) - rhs).norm(), 1e-12) << "k=" << k << " n=" << n;

      Vector solved = dense_solve(op, rhs) + lift;
      const Vector u = solved.head(op.num_velocity());
      EXPECT_LE(velocity_l2_error(op.layout(), u, [](const Point &) { return Point{1.0, 0.0, 0.0}; }), 1e-10);
    }
}

TEST(Manufactured, BrinkmanResidualOfInterpolantDecreases)
{
  using std::numbers::pi;
  const VectorFunction u = [](const Point &x) {
    return Point{std::sin(pi * x[0]) * std::cos(pi * x[1]), -std::cos(pi * x[0]) * std::sin(pi * x[1]), 0.0};
  };
  // f = -Laplace u + u + grad p with p = cos(pi x) cos(pi y).
  const VectorFunction f = [&](const Point &x) {
    const Point v = u(x);
    return Point{(2 * pi * pi + 1) * v[0] - pi * std::sin(pi * x[0]) * std::cos(pi * x[1]),
                 (2 * pi * pi + 1) * v[1] - pi * std::cos(pi * x[0]) * std::sin(pi * x[1]), 0.0};
  };
  double previous = 0.0;
  for (Index n : {8, 16, 32})
  {
    const CartesianLevel level(2, {n, n, 1}, Box::unit());
    const SystemOperator op = assemble_const(level, 1.0, 1.0, 1);
    const BoundaryData data{u, f};
    const Vector rhs = assemble_rhs(op, data);
    Vector x(op.size());
    x.head(op.num_velocity()) = interpolate_velocity(op.layout(), u);
    x.tail(op.num_pressure()) =
      interpolate_pressure(op.layout(), [](const Point &p) { return std::cos(pi * p[0]) * std::cos(pi * p[1]); });
    const double scale = op.apply(x).norm();
    x -= boundary_lifting(op, data);
    const double rel = (op.apply(x) - rhs).norm() / scale;
    if (previous > 0.0)
      EXPECT_LT(rel, 0.5 * previous) << "n=" << n;
    previous = rel;
  }
}

TEST(Norms, BrokenH1OfConstantField)
{
  const CartesianLevel level(2, {4, 4, 1}, Box::unit());
  const DofLayout layout(level, 0);
  const Vector u = interpolate_velocity(layout, [](const Point &) { return Point{1.0, 0.0, 0.0}; });
  EXPECT_NEAR(broken_h1_norm(layout, u), 1.0, 1e-12);
  EXPECT_NEAR(velocity_l2_error(layout, u, [](const Point &) { return Point{0.0, 0.0, 0.0}; }), 1.0, 1e-12);
}
