#pragma once

#include <array>
#include <functional>

#include "kvflow/grid.hpp"

namespace kvflow {

/// Reflection used to extend a cell-centered scalar past a wall plane.
/// Odd extension makes the field vanish on the wall (homogeneous Dirichlet);
/// even extension gives a zero normal derivative.
enum class WallParity { odd, even };

/// Storage slot of the off-diagonal pair (a, b), a < b.
constexpr int pair_slot(int a, int b) { return a + b - 1; }

/// Cell-centered scalar.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid, double fill = 0.0, WallParity parity = WallParity::even);

  const GridPtr& grid() const { return grid_; }
  Array3& values() { return values_; }
  const Array3& values() const { return values_; }
  double& operator()(int i, int j, int k) { return values_(i, j, k); }
  double operator()(int i, int j, int k) const { return values_(i, j, k); }

  WallParity parity() const { return parity_; }
  void set_parity(WallParity p) { parity_ = p; }

  /// Value at cell q shifted by `step` (±1) along `axis`, honoring periodic
  /// wrap-around and the wall reflection.
  double neighbor(Index3 q, int axis, int step) const;

  double min() const;
  double max() const;
  /// Volume integral.
  double integral() const;
  bool all_finite() const;

 private:
  GridPtr grid_;
  Array3 values_;
  WallParity parity_ = WallParity::even;
};

/// Velocity-like field on the MAC layout: component d on faces normal to d.
/// Normal components on wall planes are stored and kept at zero (no-slip).
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  int dim() const { return grid_->dim(); }
  Array3& component(int d) { return comp_[d]; }
  const Array3& component(int d) const { return comp_[d]; }

  bool solenoidal() const { return solenoidal_; }
  void mark_solenoidal(bool flag) { solenoidal_ = flag; }

  /// Zeroes normal components on wall planes.
  void enforce_wall_bc();
  bool all_finite() const;
  void set_zero();

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(double s);
  /// this += a * x
  void axpy(double a, const VectorField& x);

  /// Samples f(axis d, x) at every face of component d.
  static VectorField sample(GridPtr grid, const std::function<double(int, const std::array<double, 3>&)>& f);

  bool operator==(const VectorField& other) const;

 private:
  GridPtr grid_;
  std::array<Array3, 3> comp_;
  bool solenoidal_ = false;
};

/// Symmetric tensor: diagonal entries at cell centers, off-diagonal (a,b) on
/// the (a,b) edges. Only the upper triangle is stored.
class TensorField {
 public:
  TensorField() = default;
  explicit TensorField(GridPtr grid);

  const GridPtr& grid() const { return grid_; }
  Array3& diag(int a) { return diag_[a]; }
  const Array3& diag(int a) const { return diag_[a]; }
  Array3& off(int a, int b) { return off_[pair_slot(a, b)]; }
  const Array3& off(int a, int b) const { return off_[pair_slot(a, b)]; }

  /// Entry (a, b) storage for any ordering of a and b.
  Array3& entry(int a, int b) { return a == b ? diag_[a] : off(std::min(a, b), std::max(a, b)); }
  const Array3& entry(int a, int b) const {
    return a == b ? diag_[a] : off(std::min(a, b), std::max(a, b));
  }

  TensorField& operator+=(const TensorField& other);
  TensorField& operator*=(double s);

  /// Pointwise squared Frobenius norm |S|^2 averaged onto cell centers.
  ScalarField frobenius_squared_at_cells() const;
  /// Trace at cell centers.
  ScalarField trace() const;

 private:
  GridPtr grid_;
  std::array<Array3, 3> diag_;
  std::array<Array3, 3> off_;
};

/// Full (non-symmetric) velocity gradient G(d, e) = d v_d / d x_e in the same
/// staggered layout as TensorField.
struct VelocityGradient {
  GridPtr grid;
  std::array<std::array<Array3, 3>, 3> entry;
};

/// Scalar coefficient sampled where the stress fluxes live: cell centers for
/// diagonal entries and edges for off-diagonal ones.
struct FluxCoefficient {
  Array3 cell;
  std::array<Array3, 3> edge;
};

/// Arithmetic averages of the adjacent cells, reflected at walls by parity.
FluxCoefficient sample_flux_points(const ScalarField& c);
/// Constant coefficient at every flux point.
FluxCoefficient constant_flux_coefficient(const Grid& grid, double value);
/// a*x + b*y + shift at every flux point.
FluxCoefficient combine(const FluxCoefficient& x, double a, const FluxCoefficient* y, double b,
                        double shift = 0.0);

/// Scalar averaged onto the faces normal to `axis` (two-cell average).
Array3 sample_faces(const ScalarField& c, int axis);

bool same_grid(const GridPtr& a, const GridPtr& b);
void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where);

/// Volume-weighted inner products. Wall-plane samples carry half weight.
double dot(const VectorField& a, const VectorField& b);
double norm(const VectorField& v);
double dot(const ScalarField& a, const ScalarField& b);
/// sum over entries of w * S : T, with S : T the Frobenius product.
double tensor_dot(const TensorField& s, const TensorField& t);
double tensor_dot(const TensorField& s, const TensorField& t, const FluxCoefficient& weight);
double gradient_norm_squared(const VelocityGradient& g);

/// Largest absolute entry of the field.
double max_abs(const VectorField& v);
double max_abs(const ScalarField& s);

}  // namespace kvflow
