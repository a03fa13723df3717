#ifndef HDIVMG_TYPES_HPP
#define HDIVMG_TYPES_HPP

#include <array>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hdivmg
{

/// Index type for cells, faces and degrees of freedom. Matches the storage
/// index of the sparse matrices.
using Index = int;

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, Index>;

/// Spatial points and multi-indices always carry three slots; unused
/// trailing axes are zero (points) or one (counts).
using Point = std::array<double, 3>;
using MultiIndex = std::array<Index, 3>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input (parameters out of range, inconsistent sizes).
class InvalidArgument : public Error
{
public:
  using Error::Error;
};

/// A linear system turned out to be numerically singular.
class SingularMatrix : public Error
{
public:
  using Error::Error;
};

inline void
require(bool condition, const std::string &message)
{
  if (!condition)
    throw InvalidArgument(message);
}

} // namespace hdivmg

#endif
