#include "hdivmg/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hdivmg
{

QuadratureRule
gauss_legendre(int n)
{
  require(n >= 1, "quadrature needs at least one point");
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  // Newton iteration on the Legendre polynomial P_n over [-1, 1].
  for (int i = 0; i < (n + 1) / 2; ++i)
  {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k)
      {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    // Recompute the derivative at the converged root.
    {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k)
      {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n == 1 ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  if (n % 2 == 1)
    rule.points[static_cast<std::size_t>(n / 2)] = 0.5;
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes)
  : nodes_(std::move(nodes))
{}

double
LagrangeBasis1D::value(int i, double x) const
{
  double v = 1.0;
  const double xi = nodes_[static_cast<std::size_t>(i)];
  for (int m = 0; m < size(); ++m)
    if (m != i)
      v *= (x - nodes_[static_cast<std::size_t>(m)]) / (xi - nodes_[static_cast<std::size_t>(m)]);
  return v;
}

double
LagrangeBasis1D::derivative(int i, double x) const
{
  double sum = 0.0;
  const double xi = nodes_[static_cast<std::size_t>(i)];
  for (int l = 0; l < size(); ++l)
  {
    if (l == i)
      continue;
    double term = 1.0 / (xi - nodes_[static_cast<std::size_t>(l)]);
    for (int m = 0; m < size(); ++m)
      if (m != i && m != l)
        term *= (x - nodes_[static_cast<std::size_t>(m)]) / (xi - nodes_[static_cast<std::size_t>(m)]);
    sum += term;
  }
  return sum;
}

namespace
{

std::vector<double>
lobatto_nodes(int n)
{
  switch (n)
  {
    case 2:
      return {0.0, 1.0};
    case 3:
      return {0.0, 0.5, 1.0};
    default:
      throw InvalidArgument("Raviart-Thomas degree above 1 is not supported");
  }
}

// Calls f(multi_index) for all indices with 0 <= m[a] < extent[a], x fastest.
template <typename F>
void
for_each_index(int dim, const MultiIndex &extent, F &&f)
{
  MultiIndex n{1, 1, 1};
  for (int a = 0; a < dim; ++a)
    n[a] = extent[a];
  MultiIndex m{0, 0, 0};
  for (m[2] = 0; m[2] < n[2]; ++m[2])
    for (m[1] = 0; m[1] < n[1]; ++m[1])
      for (m[0] = 0; m[0] < n[0]; ++m[0])
        f(m);
}

struct CellQuadrature
{
  std::vector<Point> points;
  std::vector<double> weights;
};

CellQuadrature
cell_quadrature(int dim, int n)
{
  const QuadratureRule q = gauss_legendre(n);
  CellQuadrature rule;
  for_each_index(dim, {n, n, n}, [&](const MultiIndex &m) {
    Point x{0.0, 0.0, 0.0};
    double w = 1.0;
    for (int a = 0; a < dim; ++a)
    {
      x[a] = q.points[static_cast<std::size_t>(m[a])];
      w *= q.weights[static_cast<std::size_t>(m[a])];
    }
    rule.points.push_back(x);
    rule.weights.push_back(w);
  });
  return rule;
}

// Quadrature on the unit-cell face normal to `axis` at xhat_axis = `position`.
CellQuadrature
face_quadrature(int dim, int n, int axis, double position)
{
  const QuadratureRule q = gauss_legendre(n);
  CellQuadrature rule;
  MultiIndex extent{n, n, n};
  extent[axis] = 1;
  for_each_index(dim, extent, [&](const MultiIndex &m) {
    Point x{0.0, 0.0, 0.0};
    double w = 1.0;
    for (int a = 0; a < dim; ++a)
    {
      if (a == axis)
      {
        x[a] = position;
        continue;
      }
      x[a] = q.points[static_cast<std::size_t>(m[a])];
      w *= q.weights[static_cast<std::size_t>(m[a])];
    }
    rule.points.push_back(x);
    rule.weights.push_back(w);
  });
  return rule;
}

double
boundary_measure(const CartesianLevel &level)
{
  double total = 0.0;
  for (int a = 0; a < level.dim(); ++a)
  {
    double m = 2.0;
    for (int b = 0; b < level.dim(); ++b)
      if (b != a)
        m *= level.box().extent[b];
    total += m;
  }
  return total;
}

Point
to_physical(const CartesianLevel &level, Index cell, const Point &xhat)
{
  Point x = level.cell_origin(cell);
  for (int a = 0; a < level.dim(); ++a)
    x[a] += xhat[a] * level.spacing()[a];
  return x;
}

} // namespace

ReferenceElement::ReferenceElement(int dim, int degree)
  : dim_(dim)
  , degree_(degree)
  , normal_(lobatto_nodes(degree + 2))
  , tangential_(gauss_legendre(degree + 1).points)
{
  require(dim == 2 || dim == 3, "dimension must be 2 or 3");
  require(degree == 0 || degree == 1, "supported Raviart-Thomas degrees are 0 and 1");
  require(!(degree == 1 && dim == 3), "RT1 is only supported in 2D");

  dofs_per_face_ = 1;
  for (int b = 1; b < dim; ++b)
    dofs_per_face_ *= degree + 1;

  int interior = 0;
  for (int a = 0; a < dim; ++a)
  {
    MultiIndex extent{degree + 1, degree + 1, degree + 1};
    extent[a] = degree + 2;
    for_each_index(dim, extent, [&](const MultiIndex &m) {
      VelocityShape shape{a, m, -1, 0};
      if (m[a] == 0 || m[a] == degree + 1)
      {
        shape.face_side = m[a] == 0 ? 0 : 1;
        int t = 0;
        int stride = 1;
        for (int b = 0; b < dim; ++b)
        {
          if (b == a)
            continue;
          t += m[b] * stride;
          stride *= degree + 1;
        }
        shape.local_index = t;
      }
      else
        shape.local_index = interior++;
      velocity_.push_back(shape);
    });
  }
  interior_dofs_ = interior;

  const QuadratureRule gauss = gauss_legendre(degree + 1);
  for_each_index(dim, {degree + 1, degree + 1, degree + 1}, [&](const MultiIndex &m) {
    Point x{0.0, 0.0, 0.0};
    double w = 1.0;
    for (int a = 0; a < dim; ++a)
    {
      x[a] = gauss.points[static_cast<std::size_t>(m[a])];
      w *= gauss.weights[static_cast<std::size_t>(m[a])];
    }
    pressure_nodes_.push_back(x);
    pressure_weights_.push_back(w);
  });
}

Point
ReferenceElement::velocity_node(int i) const
{
  const VelocityShape &s = velocity_shape(i);
  Point x{0.0, 0.0, 0.0};
  for (int b = 0; b < dim_; ++b)
    x[b] = (b == s.component ? normal_ : tangential_).nodes()[static_cast<std::size_t>(s.node[b])];
  return x;
}

double
ReferenceElement::velocity_value(int i, const Point &xhat) const
{
  const VelocityShape &s = velocity_shape(i);
  double v = 1.0;
  for (int b = 0; b < dim_; ++b)
    v *= (b == s.component ? normal_ : tangential_).value(s.node[b], xhat[b]);
  return v;
}

double
ReferenceElement::velocity_derivative(int i, int d, const Point &xhat) const
{
  const VelocityShape &s = velocity_shape(i);
  double v = 1.0;
  for (int b = 0; b < dim_; ++b)
  {
    const LagrangeBasis1D &basis = b == s.component ? normal_ : tangential_;
    v *= b == d ? basis.derivative(s.node[b], xhat[b]) : basis.value(s.node[b], xhat[b]);
  }
  return v;
}

double
ReferenceElement::velocity_divergence(int i, const Point &xhat) const
{
  return velocity_derivative(i, velocity_shape(i).component, xhat);
}

double
ReferenceElement::pressure_value(int q, const Point &xhat) const
{
  // Pressure node q has tensor index given by its position in the list.
  const int n = degree_ + 1;
  double v = 1.0;
  int rest = q;
  for (int b = 0; b < dim_; ++b)
  {
    v *= tangential_.value(rest % n, xhat[b]);
    rest /= n;
  }
  return v;
}

DofLayout::DofLayout(const CartesianLevel &level, int degree)
  : level_(level)
  , element_(level.dim(), degree)
{
  num_velocity_ = level.num_faces() * element_.dofs_per_face() + level.num_cells() * element_.interior_dofs();
  num_pressure_ = level.num_cells() * element_.num_pressure();
}

Index
DofLayout::interior_dof(Index cell, int i) const
{
  return level_.num_faces() * element_.dofs_per_face() + cell * element_.interior_dofs() + i;
}

void
DofLayout::cell_velocity_dofs(Index cell, std::vector<Index> &dofs) const
{
  const MultiIndex c = level_.cell_coords(cell);
  dofs.resize(static_cast<std::size_t>(element_.num_velocity()));
  for (int i = 0; i < element_.num_velocity(); ++i)
  {
    const auto &s = element_.velocity_shape(i);
    if (s.face_side < 0)
    {
      dofs[static_cast<std::size_t>(i)] = interior_dof(cell, s.local_index);
      continue;
    }
    MultiIndex p = c;
    p[s.component] += s.face_side;
    dofs[static_cast<std::size_t>(i)] = face_dof(level_.face_index(s.component, p), s.local_index);
  }
}

void
DofLayout::cell_pressure_dofs(Index cell, std::vector<Index> &dofs) const
{
  dofs.resize(static_cast<std::size_t>(element_.num_pressure()));
  for (int q = 0; q < element_.num_pressure(); ++q)
    dofs[static_cast<std::size_t>(q)] = pressure_dof(cell, q);
}

std::vector<char>
DofLayout::boundary_normal_mask() const
{
  std::vector<char> mask(static_cast<std::size_t>(num_velocity_), 0);
  for (Index f = 0; f < level_.num_faces(); ++f)
    if (level_.is_boundary_face(f))
      for (int t = 0; t < element_.dofs_per_face(); ++t)
        mask[static_cast<std::size_t>(face_dof(f, t))] = 1;
  return mask;
}

std::pair<int, Point>
DofLayout::velocity_dof_location(Index dof) const
{
  const int fpd = element_.dofs_per_face();
  const Index face_dofs = level_.num_faces() * fpd;
  const Point &h = level_.spacing();
  const Point &origin = level_.box().origin;
  if (dof < face_dofs)
  {
    const auto [axis, p] = level_.face_position(dof / fpd);
    int t = dof % fpd;
    Point x{0.0, 0.0, 0.0};
    const auto &tn = element_.tangential_basis().nodes();
    const int n = degree() + 1;
    for (int b = 0; b < dim(); ++b)
    {
      if (b == axis)
      {
        x[b] = origin[b] + p[b] * h[b];
        continue;
      }
      x[b] = origin[b] + (p[b] + tn[static_cast<std::size_t>(t % n)]) * h[b];
      t /= n;
    }
    return {axis, x};
  }
  const Index cell = (dof - face_dofs) / element_.interior_dofs();
  const int local = (dof - face_dofs) % element_.interior_dofs();
  for (int i = 0; i < element_.num_velocity(); ++i)
  {
    const auto &s = element_.velocity_shape(i);
    if (s.face_side < 0 && s.local_index == local)
      return {s.component, to_physical(level_, cell, element_.velocity_node(i))};
  }
  throw Error("interior velocity DoF not found");
}

double
penalty_parameter(int degree, double h)
{
  return (degree + 1.0) * (degree + 2.0) / h;
}

double
face_penalty(int degree, double sigma, double spacing, bool boundary)
{
  // RT_0 fields are constant along the face, so this term alone carries the
  // tangential diffusion. Difference-quotient weights over the cell distance
  // (half a cell at a wall) turn the form into the MAC scheme.
  if (degree == 0)
    return (boundary ? 2.0 : 1.0) / spacing;
  return 2.0 * sigma;
}

LocalMatrices
compute_local_matrices(const ReferenceElement &element, const Point &spacing, double sigma)
{
  const int dim = element.dim();
  const int n = element.num_velocity();
  const int np = element.num_pressure();
  const int nq = element.degree() + 2;
  double volume = 1.0;
  for (int a = 0; a < dim; ++a)
    volume *= spacing[a];

  LocalMatrices local;
  local.mass = DenseMatrix::Zero(n, n);
  local.stiffness = DenseMatrix::Zero(n, n);
  local.divergence = DenseMatrix::Zero(np, n);

  const CellQuadrature cq = cell_quadrature(dim, nq);
  DenseMatrix grad(n, dim);
  Vector val(n);
  for (std::size_t q = 0; q < cq.points.size(); ++q)
  {
    const Point &x = cq.points[q];
    const double w = cq.weights[q] * volume;
    for (int i = 0; i < n; ++i)
    {
      val[i] = element.velocity_value(i, x);
      for (int b = 0; b < dim; ++b)
        grad(i, b) = element.velocity_derivative(i, b, x) / spacing[b];
    }
    for (int i = 0; i < n; ++i)
    {
      const int ci = element.velocity_shape(i).component;
      for (int j = 0; j < n; ++j)
      {
        if (element.velocity_shape(j).component != ci)
          continue;
        local.mass(i, j) += w * val[i] * val[j];
        local.stiffness(i, j) += w * grad.row(i).dot(grad.row(j));
      }
      const double div = grad(i, ci);
      for (int p = 0; p < np; ++p)
        local.divergence(p, i) += w * element.pressure_value(p, x) * div;
    }
  }

  // Trace value (component, value) and normal derivative of every shape at a
  // face point of one cell.
  auto traces = [&](const Point &x, int axis, Vector &value, Vector &dn) {
    for (int i = 0; i < n; ++i)
    {
      value[i] = element.velocity_value(i, x);
      dn[i] = element.velocity_derivative(i, axis, x) / spacing[axis];
    }
  };

  for (int axis = 0; axis < dim; ++axis)
  {
    double measure = 1.0;
    for (int b = 0; b < dim; ++b)
      if (b != axis)
        measure *= spacing[b];

    // Interior face: lower cell sees the face at xhat = 1, upper at xhat = 0,
    // normal +e_axis, jump = lower - upper.
    const double interior_penalty = face_penalty(element.degree(), sigma, spacing[axis], false);
    const double boundary_penalty = face_penalty(element.degree(), sigma, spacing[axis], true);
    DenseMatrix &F = local.interior_face[static_cast<std::size_t>(axis)];
    F = DenseMatrix::Zero(2 * n, 2 * n);
    const CellQuadrature lo = face_quadrature(dim, nq, axis, 1.0);
    const CellQuadrature hi = face_quadrature(dim, nq, axis, 0.0);
    Vector v_lo(n), d_lo(n), v_hi(n), d_hi(n);
    Vector jump(2 * n), avg(2 * n);
    std::vector<int> comp(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < 2 * n; ++i)
      comp[static_cast<std::size_t>(i)] = element.velocity_shape(i % n).component;
    for (std::size_t q = 0; q < lo.points.size(); ++q)
    {
      traces(lo.points[q], axis, v_lo, d_lo);
      traces(hi.points[q], axis, v_hi, d_hi);
      jump << v_lo, -v_hi;
      avg << 0.5 * d_lo, 0.5 * d_hi;
      const double w = lo.weights[q] * measure;
      for (int i = 0; i < 2 * n; ++i)
        for (int j = 0; j < 2 * n; ++j)
        {
          if (comp[static_cast<std::size_t>(i)] != comp[static_cast<std::size_t>(j)])
            continue;
          F(i, j) += w * (interior_penalty * jump[j] * jump[i] - avg[j] * jump[i] - avg[i] * jump[j]);
        }
    }

    for (int side = 0; side < 2; ++side)
    {
      DenseMatrix &G = local.boundary_face[static_cast<std::size_t>(axis)][static_cast<std::size_t>(side)];
      G = DenseMatrix::Zero(n, n);
      const double normal = side == 0 ? -1.0 : 1.0;
      const CellQuadrature fq = face_quadrature(dim, nq, axis, side == 0 ? 0.0 : 1.0);
      Vector v(n), d(n);
      for (std::size_t q = 0; q < fq.points.size(); ++q)
      {
        traces(fq.points[q], axis, v, d);
        d *= normal;
        const double w = fq.weights[q] * measure;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
          {
            if (comp[static_cast<std::size_t>(i)] != comp[static_cast<std::size_t>(j)])
              continue;
            G(i, j) += w * (boundary_penalty * v[j] * v[i] - d[j] * v[i] - d[i] * v[j]);
          }
      }
    }
  }
  return local;
}

SystemOperator::SystemOperator(const CartesianLevel &level, int degree)
  : layout_(level, degree)
{}

void
SystemOperator::apply(const Vector &x, Vector &y) const
{
  require(x.size() == size(), "apply_operator: vector size does not match the operator");
  y.resize(size());
  const Index nu = num_velocity();
  const Index np = num_pressure();
  y.head(nu).noalias() = A_ * x.head(nu);
  y.head(nu).noalias() += Bt_ * x.tail(np);
  y.tail(np).noalias() = B_ * x.head(nu);
}

Vector
SystemOperator::apply(const Vector &x) const
{
  Vector y;
  apply(x, y);
  return y;
}

namespace
{

// Visits every cell contribution of a_h and -(q, div v) and, when mu > 0,
// every face contribution, handing out local matrices with global DoFs.
template <typename CellVisitor, typename FaceVisitor>
void
visit_contributions(const DofLayout &layout, const LocalMatrices &local, std::span<const double> kappa,
                    double mu, CellVisitor &&on_cell, FaceVisitor &&on_face)
{
  const CartesianLevel &level = layout.level();
  std::vector<Index> vdofs;
  std::vector<Index> pdofs;
  DenseMatrix cell_matrix;
  for (Index c = 0; c < level.num_cells(); ++c)
  {
    layout.cell_velocity_dofs(c, vdofs);
    layout.cell_pressure_dofs(c, pdofs);
    cell_matrix = kappa[static_cast<std::size_t>(c)] * local.mass;
    if (mu > 0.0)
      cell_matrix += mu * local.stiffness;
    on_cell(c, vdofs, pdofs, cell_matrix);
  }
  if (!(mu > 0.0))
    return;

  const FaceSet faces = build_faces(level);
  std::vector<Index> lo;
  std::vector<Index> hi;
  std::vector<Index> both;
  DenseMatrix face_matrix;
  for (const auto &f : faces.interior_faces)
  {
    layout.cell_velocity_dofs(f.cell_lo, lo);
    layout.cell_velocity_dofs(f.cell_hi, hi);
    both = lo;
    both.insert(both.end(), hi.begin(), hi.end());
    face_matrix = mu * local.interior_face[static_cast<std::size_t>(f.axis)];
    on_face(both, face_matrix);
  }
  for (const auto &f : faces.boundary_faces)
  {
    layout.cell_velocity_dofs(f.cell, lo);
    face_matrix = mu * local.boundary_face[static_cast<std::size_t>(f.axis)][static_cast<std::size_t>(f.side)];
    on_face(lo, face_matrix);
  }
}

LocalMatrices
level_matrices(const DofLayout &layout, double sigma)
{
  return compute_local_matrices(layout.element(), layout.level().spacing(), sigma);
}

} // namespace

SystemOperator
assemble_operator(const CartesianLevel &level, std::span<const double> kappa, double mu, int degree,
                  const AssemblyOptions &options)
{
  require(degree == 0 || degree == 1, "degree must be 0 or 1");
  require(!(degree == 1 && level.dim() == 3), "RT1 is not supported in 3D");
  require(static_cast<Index>(kappa.size()) == level.num_cells(),
          "permeability has " + std::to_string(kappa.size()) + " values, level has " +
            std::to_string(level.num_cells()) + " cells");
  require(mu >= 0.0 && std::isfinite(mu), "viscosity must be non-negative");
  for (double k : kappa)
    require(k > 0.0 && std::isfinite(k), "permeability coefficient must be positive and finite");

  SystemOperator op(level, degree);
  op.mu_ = mu;
  op.sigma_ = penalty_parameter(degree, level.h());
  op.kappa_.assign(kappa.begin(), kappa.end());
  const DofLayout &layout = op.layout_;
  const Index nu = layout.num_velocity();
  const Index np = layout.num_pressure();

  op.constrained_.assign(static_cast<std::size_t>(nu), 0);
  if (options.essential_normal_bc)
    op.constrained_ = layout.boundary_normal_mask();
  op.has_constraints_ = options.essential_normal_bc;
  const auto &fixed = op.constrained_;

  const LocalMatrices local = level_matrices(layout, op.sigma_);
  std::vector<Eigen::Triplet<double, Index>> a_entries;
  std::vector<Eigen::Triplet<double, Index>> b_entries;
  const auto n_loc = static_cast<std::size_t>(layout.element().num_velocity());
  a_entries.reserve(static_cast<std::size_t>(level.num_cells()) * n_loc * n_loc * (mu > 0.0 ? 3 : 1));
  b_entries.reserve(static_cast<std::size_t>(np) * n_loc);

  auto scatter = [&](const std::vector<Index> &dofs, const DenseMatrix &m) {
    for (std::size_t i = 0; i < dofs.size(); ++i)
    {
      if (fixed[static_cast<std::size_t>(dofs[i])])
        continue;
      for (std::size_t j = 0; j < dofs.size(); ++j)
      {
        const double v = m(static_cast<Index>(i), static_cast<Index>(j));
        if (v == 0.0 || fixed[static_cast<std::size_t>(dofs[j])])
          continue;
        a_entries.emplace_back(dofs[i], dofs[j], v);
      }
    }
  };

  visit_contributions(
    layout, local, kappa, mu,
    [&](Index, const std::vector<Index> &vdofs, const std::vector<Index> &pdofs, const DenseMatrix &m) {
      scatter(vdofs, m);
      for (std::size_t p = 0; p < pdofs.size(); ++p)
        for (std::size_t i = 0; i < vdofs.size(); ++i)
        {
          const double v = local.divergence(static_cast<Index>(p), static_cast<Index>(i));
          if (v == 0.0 || fixed[static_cast<std::size_t>(vdofs[i])])
            continue;
          b_entries.emplace_back(pdofs[p], vdofs[i], -v);
        }
    },
    scatter);

  for (Index i = 0; i < nu; ++i)
    if (fixed[static_cast<std::size_t>(i)])
      a_entries.emplace_back(i, i, 1.0);

  op.A_.resize(nu, nu);
  op.A_.setFromTriplets(a_entries.begin(), a_entries.end());
  op.B_.resize(np, nu);
  op.B_.setFromTriplets(b_entries.begin(), b_entries.end());
  op.Bt_ = op.B_.transpose();
  op.A_.makeCompressed();
  op.B_.makeCompressed();
  op.Bt_.makeCompressed();

  op.pressure_weights_.resize(np);
  const double volume = level.cell_volume();
  for (Index c = 0; c < level.num_cells(); ++c)
    for (int q = 0; q < layout.element().num_pressure(); ++q)
      op.pressure_weights_[layout.pressure_dof(c, q)] = layout.element().pressure_weight(q) * volume;
  return op;
}

BoundaryData
BoundaryData::constant(const Point &g, const Point &f)
{
  return {[g](const Point &) { return g; }, [f](const Point &) { return f; }};
}

double
boundary_flux(const CartesianLevel &level, const VectorFunction &g)
{
  const FaceSet faces = build_faces(level);
  double flux = 0.0;
  for (const auto &f : faces.boundary_faces)
  {
    const CellQuadrature fq = face_quadrature(level.dim(), 4, f.axis, f.side == 0 ? 0.0 : 1.0);
    const double normal = f.side == 0 ? -1.0 : 1.0;
    for (std::size_t q = 0; q < fq.points.size(); ++q)
    {
      const Point x = to_physical(level, f.cell, fq.points[q]);
      flux += fq.weights[q] * level.face_measure(f.axis) * normal * g(x)[f.axis];
    }
  }
  return flux;
}

namespace
{

void
check_compatibility(const CartesianLevel &level, const VectorFunction &g)
{
  const double flux = boundary_flux(level, g);
  const FaceSet faces = build_faces(level);
  double scale = 0.0;
  for (const auto &f : faces.boundary_faces)
    scale = std::max(scale, std::abs(g(level.cell_center(f.cell))[f.axis]));
  const double measure = boundary_measure(level);
  if (std::abs(flux) > 1e-10 * measure * std::max(scale, 1e-300) && std::abs(flux) > 0.0)
    throw InvalidArgument("boundary data is incompatible: net flux " + std::to_string(flux) +
                          " through the boundary is not zero");
}

} // namespace

Vector
boundary_lifting(const SystemOperator &op, const BoundaryData &data)
{
  const DofLayout &layout = op.layout();
  const CartesianLevel &level = layout.level();
  Vector x = Vector::Zero(op.size());
  if (!op.has_constraints())
    return x;
  check_compatibility(level, data.g);

  const int fpd = layout.element().dofs_per_face();
  const QuadratureRule tangential = gauss_legendre(layout.degree() + 1);
  const auto &tw = tangential.weights;
  double flux = 0.0;
  const FaceSet faces = build_faces(level);
  for (const auto &f : faces.boundary_faces)
  {
    const double normal = f.side == 0 ? -1.0 : 1.0;
    for (int t = 0; t < fpd; ++t)
    {
      const Index dof = layout.face_dof(f.face, t);
      const auto [axis, point] = layout.velocity_dof_location(dof);
      x[dof] = data.g(point)[axis];
      double w = level.face_measure(f.axis);
      int rest = t;
      for (int b = 1; b < level.dim(); ++b)
      {
        w *= tw[static_cast<std::size_t>(rest % (layout.degree() + 1))];
        rest /= layout.degree() + 1;
      }
      flux += w * normal * x[dof];
    }
  }
  // Remove the interpolation error in the net flux so that the discrete
  // problem stays solvable.
  const double correction = flux / boundary_measure(level);
  if (correction != 0.0)
    for (const auto &f : faces.boundary_faces)
      for (int t = 0; t < fpd; ++t)
        x[layout.face_dof(f.face, t)] -= (f.side == 0 ? -1.0 : 1.0) * correction;

  // Extend by the interpolant inside. For constant or linear g it is
  // divergence free, which keeps the pressure rows of the homogenized
  // right-hand side at zero and the Krylov iterates exactly solenoidal.
  const Vector inside = interpolate_velocity(layout, data.g);
  const std::vector<char> &fixed = op.constrained();
  for (Index i = 0; i < layout.num_velocity(); ++i)
    if (!fixed[static_cast<std::size_t>(i)])
      x[i] = inside[i];
  return x;
}

Vector
assemble_rhs(const SystemOperator &op, const BoundaryData &data)
{
  const DofLayout &layout = op.layout();
  const CartesianLevel &level = layout.level();
  const ReferenceElement &element = layout.element();
  const int dim = level.dim();
  const int n = element.num_velocity();
  const int nq = layout.degree() + 2;
  const Index nu = op.num_velocity();
  const double mu = op.mu();
  const double sigma = op.sigma();
  const Point &h = level.spacing();
  check_compatibility(level, data.g);

  Vector rhs = Vector::Zero(op.size());
  std::vector<Index> vdofs;
  std::vector<Index> pdofs;

  // (f, v)
  const CellQuadrature cq = cell_quadrature(dim, nq);
  for (Index c = 0; c < level.num_cells(); ++c)
  {
    layout.cell_velocity_dofs(c, vdofs);
    for (std::size_t q = 0; q < cq.points.size(); ++q)
    {
      const Point fx = data.f(to_physical(level, c, cq.points[q]));
      const double w = cq.weights[q] * level.cell_volume();
      for (int i = 0; i < n; ++i)
        rhs[vdofs[static_cast<std::size_t>(i)]] +=
          w * fx[element.velocity_shape(i).component] * element.velocity_value(i, cq.points[q]);
    }
  }

  const FaceSet faces = build_faces(level);
  if (mu > 0.0)
  {
    // Nitsche terms mu eta <g, v> - mu <grad v n, g> on the boundary.
    for (const auto &f : faces.boundary_faces)
    {
      const double eta = face_penalty(layout.degree(), sigma, h[f.axis], true);
      layout.cell_velocity_dofs(f.cell, vdofs);
      const double normal = f.side == 0 ? -1.0 : 1.0;
      const CellQuadrature fq = face_quadrature(dim, nq, f.axis, f.side == 0 ? 0.0 : 1.0);
      for (std::size_t q = 0; q < fq.points.size(); ++q)
      {
        const Point gx = data.g(to_physical(level, f.cell, fq.points[q]));
        const double w = fq.weights[q] * level.face_measure(f.axis);
        for (int i = 0; i < n; ++i)
        {
          const int comp = element.velocity_shape(i).component;
          const double v = element.velocity_value(i, fq.points[q]);
          const double dn = normal * element.velocity_derivative(i, f.axis, fq.points[q]) / h[f.axis];
          rhs[vdofs[static_cast<std::size_t>(i)]] += w * mu * (eta * gx[comp] * v - dn * gx[comp]);
        }
      }
    }
  }

  if (!op.has_constraints())
  {
    if (mu > 0.0)
      return rhs;
    // Darcy without constraints: pressure functional <g.n, q>.
    for (const auto &f : faces.boundary_faces)
    {
      layout.cell_pressure_dofs(f.cell, pdofs);
      const double normal = f.side == 0 ? -1.0 : 1.0;
      const CellQuadrature fq = face_quadrature(dim, nq, f.axis, f.side == 0 ? 0.0 : 1.0);
      for (std::size_t q = 0; q < fq.points.size(); ++q)
      {
        const Point gx = data.g(to_physical(level, f.cell, fq.points[q]));
        const double w = fq.weights[q] * level.face_measure(f.axis);
        for (int p = 0; p < element.num_pressure(); ++p)
          rhs[nu + pdofs[static_cast<std::size_t>(p)]] +=
            w * normal * gx[f.axis] * element.pressure_value(p, fq.points[q]);
      }
    }
    return rhs;
  }

  // Homogenization: subtract A_h(u_b; v, q) for the lifted boundary trace.
  const Vector lift = boundary_lifting(op, data);
  const LocalMatrices local = level_matrices(layout, sigma);
  Vector loc;
  auto subtract = [&](const std::vector<Index> &dofs, const DenseMatrix &m) {
    loc.resize(static_cast<Index>(dofs.size()));
    bool any = false;
    for (std::size_t i = 0; i < dofs.size(); ++i)
    {
      loc[static_cast<Index>(i)] = lift[dofs[i]];
      any = any || loc[static_cast<Index>(i)] != 0.0;
    }
    if (!any)
      return;
    const Vector contribution = m * loc;
    for (std::size_t i = 0; i < dofs.size(); ++i)
      rhs[dofs[i]] -= contribution[static_cast<Index>(i)];
  };
  visit_contributions(
    layout, local, op.kappa(), mu,
    [&](Index, const std::vector<Index> &vd, const std::vector<Index> &pd, const DenseMatrix &m) {
      subtract(vd, m);
      loc.resize(static_cast<Index>(vd.size()));
      for (std::size_t i = 0; i < vd.size(); ++i)
        loc[static_cast<Index>(i)] = lift[vd[i]];
      // Pressure rows: -(-(q, div u_b)).
      const Vector div = local.divergence * loc;
      for (std::size_t p = 0; p < pd.size(); ++p)
        rhs[nu + pd[p]] += div[static_cast<Index>(p)];
    },
    subtract);

  for (Index i = 0; i < nu; ++i)
    if (op.constrained()[static_cast<std::size_t>(i)])
      rhs[i] = 0.0;
  return rhs;
}

double
pressure_mean(const SystemOperator &op, const Vector &x)
{
  const Vector &w = op.pressure_weights();
  const auto p = x.size() == op.size() ? x.tail(op.num_pressure()) : x.head(op.num_pressure());
  return w.dot(p) / w.sum();
}

void
enforce_mean_zero(const SystemOperator &op, Vector &x)
{
  require(x.size() == op.size() || x.size() == op.num_pressure(), "enforce_mean_zero: size mismatch");
  const double mean = pressure_mean(op, x);
  if (x.size() == op.size())
    x.tail(op.num_pressure()).array() -= mean;
  else
    x.array() -= mean;
}

Vector
compute_divergence(const DofLayout &layout, const Vector &u)
{
  require(u.size() >= layout.num_velocity(), "compute_divergence: velocity vector too short");
  const CartesianLevel &level = layout.level();
  const ReferenceElement &element = layout.element();
  Vector div = Vector::Zero(layout.num_pressure());
  std::vector<Index> vdofs;
  for (Index c = 0; c < level.num_cells(); ++c)
  {
    layout.cell_velocity_dofs(c, vdofs);
    for (int q = 0; q < element.num_pressure(); ++q)
    {
      double sum = 0.0;
      for (int i = 0; i < element.num_velocity(); ++i)
      {
        const int comp = element.velocity_shape(i).component;
        sum += u[vdofs[static_cast<std::size_t>(i)]] * element.velocity_divergence(i, element.pressure_node(q)) /
               level.spacing()[comp];
      }
      div[layout.pressure_dof(c, q)] = sum;
    }
  }
  return div;
}

Vector
interpolate_velocity(const DofLayout &layout, const VectorFunction &u)
{
  Vector x(layout.num_velocity());
  for (Index i = 0; i < layout.num_velocity(); ++i)
  {
    const auto [comp, point] = layout.velocity_dof_location(i);
    x[i] = u(point)[comp];
  }
  return x;
}

Vector
interpolate_pressure(const DofLayout &layout, const std::function<double(const Point &)> &p)
{
  const CartesianLevel &level = layout.level();
  Vector x(layout.num_pressure());
  for (Index c = 0; c < level.num_cells(); ++c)
    for (int q = 0; q < layout.element().num_pressure(); ++q)
      x[layout.pressure_dof(c, q)] = p(to_physical(level, c, layout.element().pressure_node(q)));
  return x;
}

Point
evaluate_velocity(const DofLayout &layout, const Vector &u, Index cell, const Point &xhat)
{
  std::vector<Index> vdofs;
  layout.cell_velocity_dofs(cell, vdofs);
  const ReferenceElement &element = layout.element();
  Point v{0.0, 0.0, 0.0};
  for (int i = 0; i < element.num_velocity(); ++i)
    v[element.velocity_shape(i).component] += u[vdofs[static_cast<std::size_t>(i)]] * element.velocity_value(i, xhat);
  return v;
}

std::vector<Point>
cell_average_velocity(const DofLayout &layout, const Vector &u)
{
  const CartesianLevel &level = layout.level();
  const CellQuadrature cq = cell_quadrature(level.dim(), layout.degree() + 2);
  std::vector<Point> avg(static_cast<std::size_t>(level.num_cells()), Point{0.0, 0.0, 0.0});
  for (Index c = 0; c < level.num_cells(); ++c)
    for (std::size_t q = 0; q < cq.points.size(); ++q)
    {
      const Point v = evaluate_velocity(layout, u, c, cq.points[q]);
      for (int a = 0; a < level.dim(); ++a)
        avg[static_cast<std::size_t>(c)][a] += cq.weights[q] * v[a];
    }
  return avg;
}

Vector
cell_average_pressure(const DofLayout &layout, const Vector &p)
{
  const CartesianLevel &level = layout.level();
  const ReferenceElement &element = layout.element();
  Vector avg = Vector::Zero(level.num_cells());
  for (Index c = 0; c < level.num_cells(); ++c)
    for (int q = 0; q < element.num_pressure(); ++q)
      avg[c] += element.pressure_weight(q) * p[layout.pressure_dof(c, q)];
  return avg;
}

double
velocity_l2_error(const DofLayout &layout, const Vector &u, const VectorFunction &exact, int points_per_axis)
{
  const CartesianLevel &level = layout.level();
  const CellQuadrature cq = cell_quadrature(level.dim(), points_per_axis);
  double sum = 0.0;
  for (Index c = 0; c < level.num_cells(); ++c)
    for (std::size_t q = 0; q < cq.points.size(); ++q)
    {
      const Point uh = evaluate_velocity(layout, u, c, cq.points[q]);
      const Point ue = exact(to_physical(level, c, cq.points[q]));
      double e2 = 0.0;
      for (int a = 0; a < level.dim(); ++a)
        e2 += (uh[a] - ue[a]) * (uh[a] - ue[a]);
      sum += cq.weights[q] * level.cell_volume() * e2;
    }
  return std::sqrt(sum);
}

double
broken_h1_norm(const DofLayout &layout, const Vector &u)
{
  const CartesianLevel &level = layout.level();
  const ReferenceElement &element = layout.element();
  const int dim = level.dim();
  const int nq = layout.degree() + 2;
  const CellQuadrature cq = cell_quadrature(dim, nq);
  const Point &h = level.spacing();
  std::vector<Index> vdofs;
  double sum = 0.0;
  for (Index c = 0; c < level.num_cells(); ++c)
  {
    layout.cell_velocity_dofs(c, vdofs);
    for (std::size_t q = 0; q < cq.points.size(); ++q)
    {
      double value[3] = {0.0, 0.0, 0.0};
      double grad[3][3] = {};
      for (int i = 0; i < element.num_velocity(); ++i)
      {
        const int comp = element.velocity_shape(i).component;
        const double coef = u[vdofs[static_cast<std::size_t>(i)]];
        value[comp] += coef * element.velocity_value(i, cq.points[q]);
        for (int b = 0; b < dim; ++b)
          grad[comp][b] += coef * element.velocity_derivative(i, b, cq.points[q]) / h[b];
      }
      double local = 0.0;
      for (int a = 0; a < dim; ++a)
      {
        local += value[a] * value[a];
        for (int b = 0; b < dim; ++b)
          local += grad[a][b] * grad[a][b];
      }
      sum += cq.weights[q] * level.cell_volume() * local;
    }
  }
  const FaceSet faces = build_faces(level);
  for (const auto &f : faces.interior_faces)
  {
    const CellQuadrature lo = face_quadrature(dim, nq, f.axis, 1.0);
    const CellQuadrature hi = face_quadrature(dim, nq, f.axis, 0.0);
    for (std::size_t q = 0; q < lo.points.size(); ++q)
    {
      const Point a = evaluate_velocity(layout, u, f.cell_lo, lo.points[q]);
      const Point b = evaluate_velocity(layout, u, f.cell_hi, hi.points[q]);
      double j2 = 0.0;
      for (int k = 0; k < dim; ++k)
        j2 += (a[k] - b[k]) * (a[k] - b[k]);
      sum += lo.weights[q] * level.face_measure(f.axis) * j2 / level.h();
    }
  }
  return std::sqrt(sum);
}

SparseMatrix
velocity_mass_matrix(const DofLayout &layout)
{
  const LocalMatrices local = level_matrices(layout, 0.0);
  std::vector<Eigen::Triplet<double, Index>> entries;
  std::vector<Index> vdofs;
  for (Index c = 0; c < layout.level().num_cells(); ++c)
  {
    layout.cell_velocity_dofs(c, vdofs);
    for (std::size_t i = 0; i < vdofs.size(); ++i)
      for (std::size_t j = 0; j < vdofs.size(); ++j)
      {
        const double v = local.mass(static_cast<Index>(i), static_cast<Index>(j));
        if (v != 0.0)
          entries.emplace_back(vdofs[i], vdofs[j], v);
      }
  }
  SparseMatrix m(layout.num_velocity(), layout.num_velocity());
  m.setFromTriplets(entries.begin(), entries.end());
  m.makeCompressed();
  return m;
}

} // namespace hdivmg
