#ifndef HDIVMG_DISCRETIZATION_HPP
#define HDIVMG_DISCRETIZATION_HPP

#include <functional>
#include <span>
#include <vector>

#include "hdivmg/mesh.hpp"

namespace hdivmg
{

/// Gauss-Legendre rule with n points on [0, 1].
struct QuadratureRule
{
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule
gauss_legendre(int n);

/// Lagrange polynomials on a fixed set of 1D nodes in [0, 1].
class LagrangeBasis1D
{
public:
  explicit LagrangeBasis1D(std::vector<double> nodes);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double> &nodes() const { return nodes_; }
  double value(int i, double x) const;
  double derivative(int i, double x) const;

private:
  std::vector<double> nodes_;
};

/// Nodal Raviart-Thomas RT_k basis on the unit cell together with the
/// discontinuous Q_k pressure basis.
///
/// Component a of the velocity is a tensor product of Lagrange polynomials
/// with k+2 Gauss-Lobatto nodes along axis a and k+1 Gauss nodes along the
/// other axes. The coefficients are point values of u_a, so the two
/// extreme nodes along axis a are shared with the neighbouring cell. The
/// pressure is nodal in the (k+1)^d Gauss points; its mass matrix is
/// diagonal.
class ReferenceElement
{
public:
  ReferenceElement(int dim, int degree);

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  int num_velocity() const { return static_cast<int>(velocity_.size()); }
  int num_pressure() const { return static_cast<int>(pressure_nodes_.size()); }
  int dofs_per_face() const { return dofs_per_face_; }
  int interior_dofs() const { return interior_dofs_; }

  /// Local velocity basis function description.
  struct VelocityShape
  {
    int component;
    MultiIndex node;
    /// -1 interior, 0 lower face, 1 upper face along `component`.
    int face_side;
    /// Tangential node index on the face, or interior index in the cell.
    int local_index;
  };

  const VelocityShape &velocity_shape(int i) const { return velocity_[static_cast<std::size_t>(i)]; }

  /// Position of pressure node q in unit-cell coordinates.
  const Point &pressure_node(int q) const { return pressure_nodes_[static_cast<std::size_t>(q)]; }
  /// Quadrature weight of pressure node q on the unit cell.
  double pressure_weight(int q) const { return pressure_weights_[static_cast<std::size_t>(q)]; }

  /// Position of velocity node i in unit-cell coordinates.
  Point velocity_node(int i) const;

  /// Value of velocity shape i (only the `component` entry is nonzero).
  double velocity_value(int i, const Point &xhat) const;
  /// d/dxhat_b of the nonzero component of velocity shape i.
  double velocity_derivative(int i, int b, const Point &xhat) const;
  /// Reference divergence of shape i (derivative along its component).
  double velocity_divergence(int i, const Point &xhat) const;
  double pressure_value(int q, const Point &xhat) const;

  const LagrangeBasis1D &normal_basis() const { return normal_; }
  const LagrangeBasis1D &tangential_basis() const { return tangential_; }

private:
  int dim_;
  int degree_;
  int dofs_per_face_;
  int interior_dofs_;
  LagrangeBasis1D normal_;
  LagrangeBasis1D tangential_;
  std::vector<VelocityShape> velocity_;
  std::vector<Point> pressure_nodes_;
  std::vector<double> pressure_weights_;
};

/// Global numbering of the velocity and pressure DoFs on one level.
///
/// Velocity: all face DoFs first (face-major, dofs_per_face each), then the
/// interior DoFs cell by cell. Pressure: cell-major. In a system vector the
/// pressure block follows the velocity block.
class DofLayout
{
public:
  DofLayout(const CartesianLevel &level, int degree);

  const CartesianLevel &level() const { return level_; }
  const ReferenceElement &element() const { return element_; }
  int dim() const { return level_.dim(); }
  int degree() const { return element_.degree(); }

  Index num_velocity() const { return num_velocity_; }
  Index num_pressure() const { return num_pressure_; }
  Index size() const { return num_velocity_ + num_pressure_; }

  Index face_dof(Index face, int t) const { return face * element_.dofs_per_face() + t; }
  Index interior_dof(Index cell, int i) const;
  Index pressure_dof(Index cell, int q) const { return cell * element_.num_pressure() + q; }

  /// Global velocity DoFs of a cell in local shape order.
  void cell_velocity_dofs(Index cell, std::vector<Index> &dofs) const;
  /// Global pressure DoFs of a cell (relative to the pressure block).
  void cell_pressure_dofs(Index cell, std::vector<Index> &dofs) const;

  /// Velocity DoFs carrying the normal trace on the domain boundary.
  std::vector<char> boundary_normal_mask() const;

  /// Component and physical position of a velocity DoF.
  std::pair<int, Point> velocity_dof_location(Index dof) const;

private:
  CartesianLevel level_;
  ReferenceElement element_;
  Index num_velocity_;
  Index num_pressure_;
};

/// Element and face matrices for one cell size. All cells of a level share
/// them; the permeability and viscosity enter as scalar factors.
struct LocalMatrices
{
  /// (u, v) over a cell.
  DenseMatrix mass;
  /// (grad u, grad v) over a cell.
  DenseMatrix stiffness;
  /// (q, div v): rows pressure shapes, columns velocity shapes.
  DenseMatrix divergence;
  /// Interior-penalty terms of an interior face normal to each axis, in
  /// the combined numbering [lower cell shapes, upper cell shapes], for
  /// unit viscosity: eta <[u],[v]> - <{grad u} n,[v]> - <{grad v} n,[u]>
  /// with eta from face_penalty().
  std::array<DenseMatrix, 3> interior_face;
  /// Same terms on a boundary face: index [axis][side].
  std::array<std::array<DenseMatrix, 2>, 3> boundary_face;
};

LocalMatrices
compute_local_matrices(const ReferenceElement &element, const Point &spacing, double sigma);

/// Penalty sigma_j = (k+1)(k+2)/h_j.
double
penalty_parameter(int degree, double h);

/// Weight eta of <[u],[v]> on a face whose normal cell spacing is `spacing`.
/// It is 2 sigma for k >= 1. For k = 0 it is 1/h inside and 2/h on the
/// boundary, which reproduces the MAC scheme.
double
face_penalty(int degree, double sigma, double spacing, bool boundary);

struct AssemblyOptions
{
  /// Impose the normal velocity trace on the domain boundary strongly. The
  /// affected DoFs become identity rows decoupled from the rest.
  bool essential_normal_bc = true;
};

/// Block operator [[A, B^T], [B, 0]] of one level.
class SystemOperator
{
public:
  SystemOperator(const CartesianLevel &level, int degree);

  const DofLayout &layout() const { return layout_; }
  const CartesianLevel &level() const { return layout_.level(); }
  int degree() const { return layout_.degree(); }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }
  const std::vector<double> &kappa() const { return kappa_; }

  Index num_velocity() const { return layout_.num_velocity(); }
  Index num_pressure() const { return layout_.num_pressure(); }
  Index size() const { return layout_.size(); }

  const SparseMatrix &A() const { return A_; }
  const SparseMatrix &B() const { return B_; }
  const SparseMatrix &Bt() const { return Bt_; }

  /// 1 for velocity DoFs fixed by an essential boundary condition.
  const std::vector<char> &constrained() const { return constrained_; }
  bool has_constraints() const { return has_constraints_; }

  /// Integration weights of the pressure DoFs; w^T p is the integral of p.
  const Vector &pressure_weights() const { return pressure_weights_; }

  /// y = [A u + B^T p; B u].
  void apply(const Vector &x, Vector &y) const;
  Vector apply(const Vector &x) const;

private:
  friend SystemOperator assemble_operator(const CartesianLevel &, std::span<const double>, double, int,
                                          const AssemblyOptions &);

  DofLayout layout_;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  std::vector<double> kappa_;
  SparseMatrix A_;
  SparseMatrix B_;
  SparseMatrix Bt_;
  std::vector<char> constrained_;
  bool has_constraints_ = false;
  Vector pressure_weights_;
};

/// Assembles a_h and the divergence coupling with entries -(q, div v).
/// Throws InvalidArgument on non-positive kappa, a size mismatch, negative
/// mu, or degree 1 in 3D.
SystemOperator
assemble_operator(const CartesianLevel &level, std::span<const double> kappa, double mu, int degree,
                  const AssemblyOptions &options = {});

using VectorFunction = std::function<Point(const Point &)>;

/// Dirichlet velocity g and volume force f.
struct BoundaryData
{
  VectorFunction g;
  VectorFunction f;

  static BoundaryData constant(const Point &g, const Point &f = {0.0, 0.0, 0.0});
};

/// Net outflow of g through the domain boundary.
double
boundary_flux(const CartesianLevel &level, const VectorFunction &g);

/// Right-hand side of the discrete problem for the given operator.
///
/// With essential normal conditions the system is homogenized: the
/// lifting u_b of boundary_lifting() is subtracted, the returned
/// vector contains F(v, q) - A_h(u_b; v, q) on free rows and zeros on the
/// constrained rows, and the solution is obtained by adding
/// boundary_lifting(). Without constraints the functional is the plain
/// Nitsche form (Brinkman) or <g.n, q> (Darcy).
Vector
assemble_rhs(const SystemOperator &op, const BoundaryData &data);

/// Velocity lifting u_b: the boundary normal trace of g (corrected to zero
/// net flux) on the constrained DoFs, the RT_k interpolant of g elsewhere.
Vector
boundary_lifting(const SystemOperator &op, const BoundaryData &data);

/// Subtracts the volume-weighted mean from the pressure block of `x`
/// (or from a bare pressure vector when its size equals num_pressure).
void
enforce_mean_zero(const SystemOperator &op, Vector &x);

double
pressure_mean(const SystemOperator &op, const Vector &x);

/// Values of div u at the pressure nodes of each cell, cell-major. Exact:
/// div RT_k lies in Q_k.
Vector
compute_divergence(const DofLayout &layout, const Vector &u);

/// Nodal RT_k interpolant of a vector field (velocity block only).
Vector
interpolate_velocity(const DofLayout &layout, const VectorFunction &u);

/// Nodal Q_k interpolant of a scalar field.
Vector
interpolate_pressure(const DofLayout &layout, const std::function<double(const Point &)> &p);

/// Evaluates the discrete velocity in `cell` at unit-cell coordinates.
Point
evaluate_velocity(const DofLayout &layout, const Vector &u, Index cell, const Point &xhat);

/// Cellwise averages of the velocity (d components per cell, cell-major).
std::vector<Point>
cell_average_velocity(const DofLayout &layout, const Vector &u);

/// Cellwise means of the pressure.
Vector
cell_average_pressure(const DofLayout &layout, const Vector &p);

/// L2 norm of u_h - u over the domain, by Gauss quadrature with
/// `points_per_axis` points.
double
velocity_l2_error(const DofLayout &layout, const Vector &u, const VectorFunction &exact,
                  int points_per_axis = 4);

/// Broken H1 norm: sum over cells of ||u||^2 + ||grad u||^2 plus
/// (1/h) ||[u]||^2 over interior faces.
double
broken_h1_norm(const DofLayout &layout, const Vector &u);

/// Velocity mass matrix (u, v) without constraints.
SparseMatrix
velocity_mass_matrix(const DofLayout &layout);

} // namespace hdivmg

#endif
