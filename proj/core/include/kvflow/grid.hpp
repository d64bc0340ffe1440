#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace kvflow {

/// Boundary treatment of one axis.
enum class AxisKind { periodic, wall };

/// Channel: periodic in-plane, two no-slip walls normal to the last axis.
/// Box: periodic in every direction.
enum class GeometryMode { channel, box };

/// Wall distance reported on a fully periodic grid.
inline constexpr double kNoWall = std::numeric_limits<double>::infinity();

struct GridSpec {
  int dim = 2;
  GeometryMode mode = GeometryMode::channel;
  /// (L_x, [L_y,] H); entries past `dim` are ignored.
  std::array<double, 3> extents{1.0, 1.0, 1.0};
  std::array<int, 3> cells{1, 1, 1};
  std::array<AxisKind, 3> bc{AxisKind::periodic, AxisKind::periodic, AxisKind::periodic};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  static GridSpec channel2d(double length, double height, int nx, int nz);
  static GridSpec box2d(double length, double height, int nx, int nz);
  static GridSpec channel3d(double lx, double ly, double height, int nx, int ny, int nz);

  bool operator==(const GridSpec&) const = default;
};

std::string to_string(AxisKind kind);
std::string to_string(GeometryMode mode);

/// Which axes a sample location is shifted by half a cell along.
///
/// Cell centers carry no shift, velocity component d lives on faces normal to
/// d, and the off-diagonal entry (a,b) of a tensor lives on the edge shifted
/// along both a and b (the cell corner in 2D).
struct Stagger {
  std::uint8_t mask = 0;

  static constexpr Stagger cell() { return {0}; }
  static constexpr Stagger face(int axis) { return {static_cast<std::uint8_t>(1u << axis)}; }
  static constexpr Stagger edge(int a, int b) {
    return {static_cast<std::uint8_t>((1u << a) | (1u << b))};
  }
  constexpr bool along(int axis) const { return (mask >> axis) & 1u; }
  bool operator==(const Stagger&) const = default;
};

using Index3 = std::array<int, 3>;

/// Dense storage for one staggered location, first axis fastest.
class Array3 {
 public:
  Array3() = default;
  Array3(Stagger stagger, Index3 shape, double fill = 0.0);

  Stagger stagger() const { return stagger_; }
  const Index3& shape() const { return shape_; }
  int extent(int axis) const { return shape_[axis]; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(shape_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(shape_[1]) * k);
  }
  double& operator()(int i, int j, int k) { return data_[offset(i, j, k)]; }
  double operator()(int i, int j, int k) const { return data_[offset(i, j, k)]; }
  double& operator[](const Index3& q) { return data_[offset(q[0], q[1], q[2])]; }
  double operator[](const Index3& q) const { return data_[offset(q[0], q[1], q[2])]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double value);
  bool same_layout(const Array3& other) const {
    return stagger_ == other.stagger_ && shape_ == other.shape_;
  }
  bool operator==(const Array3& other) const = default;

 private:
  Stagger stagger_{};
  Index3 shape_{0, 0, 0};
  std::vector<double> data_;
};

/// Uniform structured grid for a channel slab or periodic box.
class Grid {
 public:
  explicit Grid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  bool is_channel() const { return spec_.mode == GeometryMode::channel; }
  /// Index of the wall-normal axis, or -1 in box mode.
  int wall_axis() const { return is_channel() ? spec_.dim - 1 : -1; }
  bool is_wall(int axis) const { return axis < spec_.dim && spec_.bc[axis] == AxisKind::wall; }

  int cells(int axis) const { return axis < spec_.dim ? spec_.cells[axis] : 1; }
  double spacing(int axis) const { return spacing_[axis]; }
  double extent(int axis) const { return axis < spec_.dim ? spec_.extents[axis] : 1.0; }
  /// Volume of one cell; every staggered control volume has the same size.
  double cell_volume() const { return cell_volume_; }
  double domain_volume() const;

  /// Number of stored samples of a location along one axis. Staggered samples
  /// along a wall axis include both wall planes.
  int points(Stagger s, int axis) const;
  Index3 shape(Stagger s) const;
  Array3 make_array(Stagger s, double fill = 0.0) const { return Array3(s, shape(s), fill); }

  /// Physical coordinate of sample `i` along `axis` for location `s`.
  double coordinate(Stagger s, int axis, int i) const;
  /// Distance to the nearer wall of a sample at wall-axis index `i`.
  double wall_distance_at(Stagger s, int i) const;
  /// Wall distance sampled at every point of the given location.
  Array3 wall_distance(Stagger s) const;
  /// Cell-centered wall distance (cached).
  const Array3& wall_distance() const { return cell_wall_distance_; }

  /// Quadrature weight factor of a sample: 1/2 on wall planes for staggered
  /// wall-axis locations, 1 elsewhere.
  double boundary_weight(Stagger s, const Index3& q) const;

  bool operator==(const Grid& other) const { return spec_ == other.spec_; }

 private:
  GridSpec spec_;
  std::array<double, 3> spacing_{1.0, 1.0, 1.0};
  double cell_volume_ = 1.0;
  Array3 cell_wall_distance_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Validates the spec and builds an immutable, shareable grid.
GridPtr build_grid(const GridSpec& spec);

/// Calls f(i, j, k) for every sample of an array shape.
template <class F>
inline void for_each_index(const Index3& shape, F&& f) {
  for (int k = 0; k < shape[2]; ++k)
    for (int j = 0; j < shape[1]; ++j)
      for (int i = 0; i < shape[0]; ++i) f(i, j, k);
}

}  // namespace kvflow
