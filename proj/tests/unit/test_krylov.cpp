#include <gtest/gtest.h>

#include <limits>

#include <hdivmg/krylov.hpp>

#include "oracles.hpp"

using namespace hdivmg;
using namespace hdivmg::testing;

namespace
{

LinearMap
matrix_map(const DenseMatrix &m)
{
  return [m](const Vector &x, Vector &y) { y = m * x; };
}

const LinearMap identity = [](const Vector &x, Vector &y) { y = x; };

// Nonsymmetric, well conditioned test matrix.
DenseMatrix
test_matrix(Index n, unsigned seed)
{
  DenseMatrix m(n, n);
  for (Index j = 0; j < n; ++j)
    m.col(j) = random_vector(n, seed + static_cast<unsigned>(j));
  return m + 2.0 * std::sqrt(static_cast<double>(n)) * DenseMatrix::Identity(n, n);
}

} // namespace

TEST(Gmres, IdentityConvergesInOneStep)
{
  const Vector b = random_vector(20, 1);
  const GmresResult r = gmres(identity, identity, b);
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 1);
  EXPECT_LE((r.x - b).norm(), 1e-14);
}

TEST(Gmres, ZeroRightHandSide)
{
  const GmresResult r = gmres(identity, identity, Vector::Zero(5));
  EXPECT_TRUE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Gmres, MatchesDenseSolveOnSaddlePoint)
{
  const CartesianLevel level(2, {8, 8, 1}, Box::unit());
  for (double mu : {0.0, 1e-2})
  {
    const SystemOperator op = assemble_operator(level, random_kappa(64, 9), mu, 0);
    const Vector b = assemble_rhs(op, BoundaryData::constant({1.0, 0.5, 0.0}));
    const LinearMap a = [&op](const Vector &x, Vector &y) { op.apply(x, y); };
    GmresResult r = gmres(a, identity, b, GmresOptions{1e-12, 2000});
    ASSERT_TRUE(r.report.converged);
    enforce_mean_zero(op, r.x);
    const Vector exact = dense_solve(op, b);
    EXPECT_LE((r.x - exact).norm() / exact.norm(), 1e-8);
  }
}

TEST(Gmres, HistoryIsMonotoneAndComplete)
{
  const DenseMatrix m = test_matrix(40, 3);
  const Vector b = random_vector(40, 4);
  const GmresResult r = gmres(matrix_map(m), identity, b, GmresOptions{1e-10});
  ASSERT_TRUE(r.report.converged);
  const auto &hist = r.report.residual_history;
  ASSERT_EQ(static_cast<int>(hist.size()), r.report.iterations + 1);
  EXPECT_EQ(hist.front(), 1.0);
  for (std::size_t i = 1; i < hist.size(); ++i)
    EXPECT_LE(hist[i], hist[i - 1] * (1.0 + 1e-12));
  const double true_residual = (b - m * r.x).norm() / b.norm();
  EXPECT_NEAR(true_residual, r.report.final_residual, 1e-14);
  EXPECT_LE(true_residual, 1e-10);
  EXPECT_LE(std::abs(hist.back() - true_residual), 1e-2 * 1e-10 + 1e-13);
}

TEST(Gmres, PreconditionedSolveMatchesDirect)
{
  const DenseMatrix m = test_matrix(30, 7);
  const DenseMatrix approx_inv = DenseMatrix(m.diagonal().cwiseInverse().asDiagonal());
  const Vector b = random_vector(30, 8);
  for (bool flexible : {false, true})
  {
    GmresOptions o{1e-11};
    o.flexible = flexible;
    const GmresResult r = gmres(matrix_map(m), matrix_map(approx_inv), b, o);
    ASSERT_TRUE(r.report.converged);
    EXPECT_LE((r.x - m.lu().solve(b)).norm(), 1e-9 * b.norm());
  }
}

TEST(Gmres, FlexibleAndStandardAgreeForFixedPreconditioner)
{
  const DenseMatrix m = test_matrix(25, 11);
  const DenseMatrix p = test_matrix(25, 50).inverse();
  const Vector b = random_vector(25, 12);
  GmresOptions o{1e-9};
  const GmresResult standard = gmres(matrix_map(m), matrix_map(p), b, o);
  o.flexible = true;
  const GmresResult flexible = gmres(matrix_map(m), matrix_map(p), b, o);
  EXPECT_EQ(standard.report.iterations, flexible.report.iterations);
  EXPECT_LE((standard.x - flexible.x).norm(), 1e-7 * standard.x.norm());
}

TEST(Gmres, ScalingTheRightHandSideScalesTheSolution)
{
  const DenseMatrix m = test_matrix(20, 13);
  const Vector b = random_vector(20, 14);
  const GmresResult r1 = gmres(matrix_map(m), identity, b, GmresOptions{1e-12});
  const GmresResult r2 = gmres(matrix_map(m), identity, 1e6 * b, GmresOptions{1e-12});
  EXPECT_EQ(r1.report.iterations, r2.report.iterations);
  EXPECT_LE((r2.x - 1e6 * r1.x).norm(), 1e-9 * r2.x.norm());
}

TEST(Gmres, IterationLimitGivesNonConvergedReport)
{
  const DenseMatrix m = test_matrix(50, 15);
  const Vector b = random_vector(50, 16);
  GmresOptions o{1e-14};
  o.max_iterations = 3;
  const GmresResult r = gmres(matrix_map(m), identity, b, o);
  EXPECT_FALSE(r.report.converged);
  EXPECT_EQ(r.report.iterations, 3);
  EXPECT_GT(r.report.final_residual, 1e-14);
  EXPECT_LT(r.report.final_residual, 1.0);
}

TEST(Gmres, NanInOperatorThrows)
{
  const LinearMap broken = [](const Vector &x, Vector &y) {
    y = x;
    y[0] = std::numeric_limits<double>::quiet_NaN();
  };
  EXPECT_THROW(gmres(broken, identity, random_vector(5, 1)), Error);
}

TEST(Gmres, RejectsBadOptions)
{
  EXPECT_THROW(gmres(identity, identity, Vector::Ones(3), GmresOptions{-1.0}), InvalidArgument);
  EXPECT_THROW(gmres(identity, identity, Vector::Ones(3), GmresOptions{1e-6, 0}), InvalidArgument);
}
