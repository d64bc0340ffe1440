#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kvflow/fields.hpp"

namespace kvflow {

/// Boundary treatment of a 1D second-difference matrix.
enum class BasisKind {
  periodic,
  /// Cell-centered unknowns, odd ghost at both ends (value zero on the wall).
  dirichlet_cell,
  /// Face unknowns strictly inside the interval; the end faces are zero.
  dirichlet_face,
  /// Cell-centered unknowns, zero flux through both ends.
  neumann_cell,
};

/// Orthonormal eigenpairs of the 1D matrix -d^2/dx^2 (eigenvalues ascending).
struct AxisBasis {
  Eigen::MatrixXd q;
  Eigen::VectorXd lambda;
};

/// Cached eigenbasis for `n` cells of width `h`.
const AxisBasis& axis_basis(BasisKind kind, int n, double h);

/// Dense block of unknowns with the array layout of Array3 (first axis fastest).
struct SpectralBlock {
  Index3 shape{1, 1, 1};
  std::vector<double> data;
};

/// y = M x applied along one axis of the block.
void apply_along_axis(SpectralBlock& block, int axis, const Eigen::MatrixXd& m);

/// Basis kinds used for the unknowns of velocity component d.
std::array<BasisKind, 3> velocity_basis_kinds(const Grid& grid, int d);

/// Unknown block of a velocity component: wall-plane samples of the normal
/// component are dropped.
SpectralBlock extract_unknowns(const Grid& grid, int d, const Array3& component);
void scatter_unknowns(const Grid& grid, int d, const SpectralBlock& block, Array3& component);

/// Forward/inverse transform of a block whose axes use the given kinds.
void to_modes(const Grid& grid, const std::array<BasisKind, 3>& kinds, SpectralBlock& block);
void from_modes(const Grid& grid, const std::array<BasisKind, 3>& kinds, SpectralBlock& block);
/// Eigenvalue of the discrete -Laplacian for every mode of the block.
std::vector<double> mode_eigenvalues(const Grid& grid, const std::array<BasisKind, 3>& kinds,
                                     const Index3& shape);

/// Exact solver for the cell Laplacian divergence(gradient(.)) with zero-flux
/// walls, and the discrete Leray projection built on it.
class PressureSolver {
 public:
  explicit PressureSolver(GridPtr grid);

  /// Mean-free phi with cell_laplacian(phi) = rhs - mean(rhs).
  ScalarField solve(const ScalarField& rhs) const;
  /// v <- v - grad(L^{-1} div v). Leaves div v at round-off level.
  void project(VectorField& v) const;
  /// Projected copy of v.
  VectorField projected(const VectorField& v) const;

 private:
  GridPtr grid_;
  std::array<BasisKind, 3> kinds_{};
  std::vector<double> eig_;
};

/// Preconditioner for sigma I - div(c D .) restricted to solenoidal fields:
/// the component-wise operator sigma I - (1/2) div(cbar grad .), with cbar the
/// average of c over each plane parallel to the walls (over the whole box in
/// periodic mode). Inverted exactly with transforms in the periodic directions
/// and a tridiagonal solve along the wall normal.
class VelocityPreconditioner {
 public:
  /// `extra` is added to cbar everywhere.
  VelocityPreconditioner(GridPtr grid, const FluxCoefficient& c, double sigma, double extra = 0.0);

  VectorField apply(const VectorField& r) const;

 private:
  struct Component {
    std::array<BasisKind, 3> kinds{};
    std::vector<double> horizontal_eig;  // per in-plane mode
    std::vector<double> line_coef;       // per level, multiplies in-plane eigenvalues
    std::vector<double> lower, diag, upper;  // wall-normal tridiagonal (already /h^2)
    std::vector<double> full_eig;            // box mode only
  };
  GridPtr grid_;
  double sigma_;
  std::array<Component, 3> comp_;
};

/// A^s v for the component-wise Dirichlet Laplacian A = -vector_laplacian.
VectorField laplacian_power(const VectorField& v, double s);
/// <A^s v, v> computed in the eigenbasis. For s < 0 a nonzero component in
/// the kernel of A (box mode means) gives +inf.
double laplacian_power_form(const VectorField& v, double s);

}  // namespace kvflow
