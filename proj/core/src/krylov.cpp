#include "hdivmg/krylov.hpp"

#include <cmath>

namespace hdivmg
{

namespace
{

// Solves the k x k upper triangular system H y = g.
Vector
back_substitute(const DenseMatrix &h, const Vector &g, int k)
{
  Vector y(k);
  for (int i = k - 1; i >= 0; --i)
  {
    double s = g[i];
    for (int j = i + 1; j < k; ++j)
      s -= h(i, j) * y[j];
    y[i] = s / h(i, i);
  }
  return y;
}

} // namespace

GmresResult
gmres(const LinearMap &op, const LinearMap &preconditioner, const Vector &b, const GmresOptions &options)
{
  require(options.tolerance > 0.0, "GMRES tolerance must be positive");
  require(options.max_iterations >= 1, "GMRES needs at least one iteration");
  if (!b.allFinite())
    throw InvalidArgument("GMRES right-hand side is not finite");

  const Index n = b.size();
  GmresResult result;
  SolveReport &report = result.report;
  result.x = Vector::Zero(n);
  report.residual_history.push_back(1.0);

  const double bnorm = b.norm();
  if (bnorm == 0.0)
  {
    report.converged = true;
    return result;
  }
  const double target = options.tolerance * bnorm;
  const int max_it = options.max_iterations;

  Vector residual = b;
  Vector w(n);
  Vector z(n);
  while (true)
  {
    const double beta = residual.norm();
    std::vector<Vector> basis;
    std::vector<Vector> directions;
    basis.push_back(residual / beta);
    DenseMatrix h = DenseMatrix::Zero(max_it + 1, max_it);
    Vector g = Vector::Zero(max_it + 1);
    std::vector<double> cs;
    std::vector<double> sn;
    g[0] = beta;

    int k = 0;
    bool done = false;
    while (!done && report.iterations < max_it)
    {
      preconditioner(basis[static_cast<std::size_t>(k)], z);
      op(z, w);
      if (options.flexible)
        directions.push_back(z);

      const double norm_before = w.norm();
      for (int i = 0; i <= k; ++i)
      {
        const double hij = w.dot(basis[static_cast<std::size_t>(i)]);
        h(i, k) = hij;
        w -= hij * basis[static_cast<std::size_t>(i)];
      }
      double hnext = w.norm();
      if (hnext < 0.7 * norm_before)
      {
        for (int i = 0; i <= k; ++i)
        {
          const double c = w.dot(basis[static_cast<std::size_t>(i)]);
          h(i, k) += c;
          w -= c * basis[static_cast<std::size_t>(i)];
        }
        hnext = w.norm();
      }
      if (!std::isfinite(hnext) || !h.col(k).head(k + 1).allFinite())
        throw Error("GMRES: non-finite value in the Arnoldi process at iteration " +
                    std::to_string(report.iterations + 1));
      h(k + 1, k) = hnext;

      for (int i = 0; i < k; ++i)
      {
        const double t = cs[static_cast<std::size_t>(i)] * h(i, k) + sn[static_cast<std::size_t>(i)] * h(i + 1, k);
        h(i + 1, k) = -sn[static_cast<std::size_t>(i)] * h(i, k) + cs[static_cast<std::size_t>(i)] * h(i + 1, k);
        h(i, k) = t;
      }
      const double r = std::hypot(h(k, k), h(k + 1, k));
      const double c = r == 0.0 ? 1.0 : h(k, k) / r;
      const double s = r == 0.0 ? 0.0 : h(k + 1, k) / r;
      cs.push_back(c);
      sn.push_back(s);
      h(k, k) = r;
      h(k + 1, k) = 0.0;
      g[k + 1] = -s * g[k];
      g[k] = c * g[k];

      ++report.iterations;
      ++k;
      const double estimate = std::abs(g[k]);
      report.residual_history.push_back(estimate / bnorm);
      done = estimate <= target || hnext == 0.0;
      if (!done)
        basis.push_back(w / hnext);
    }

    if (k > 0)
    {
      const Vector y = back_substitute(h, g, k);
      if (options.flexible)
      {
        for (int i = 0; i < k; ++i)
          result.x += y[i] * directions[static_cast<std::size_t>(i)];
      }
      else
      {
        Vector combined = Vector::Zero(n);
        for (int i = 0; i < k; ++i)
          combined += y[i] * basis[static_cast<std::size_t>(i)];
        preconditioner(combined, z);
        result.x += z;
      }
    }

    op(result.x, w);
    residual = b - w;
    const double true_residual = residual.norm();
    report.final_residual = true_residual / bnorm;
    if (true_residual <= target)
    {
      report.converged = true;
      break;
    }
    if (report.iterations >= max_it || k == 0)
      break;
  }
  return result;
}

GmresResult
gmres(const VCycle &cycle, const Vector &b, const GmresOptions &options)
{
  const SystemOperator &op = cycle.finest_op();
  require(b.size() == op.size(), "GMRES: right-hand side does not match the finest level");
  const LinearMap apply_op = [&op](const Vector &x, Vector &y) { op.apply(x, y); };
  const LinearMap apply_cycle = [&cycle](const Vector &x, Vector &y) { y = cycle.apply(x); };
  GmresResult result = gmres(apply_op, apply_cycle, b, options);
  enforce_mean_zero(op, result.x);
  return result;
}

} // namespace hdivmg
