#include "kvflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvflow {

namespace {

[[noreturn]] void reject(const std::string& field, const std::string& why) {
  throw std::invalid_argument("grid." + field + ": " + why);
}

}  // namespace

void GridSpec::validate() const {
  if (dim != 2 && dim != 3) reject("dim", "must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(extents[a] > 0.0) || !std::isfinite(extents[a]))
      reject("extents", "axis " + std::to_string(a) + " must have a positive finite length");
    if (cells[a] < 4) reject("cells", "axis " + std::to_string(a) + " needs at least 4 cells");
  }
  const int last = dim - 1;
  if (mode == GeometryMode::channel) {
    if (bc[last] != AxisKind::wall) reject("bc", "channel mode needs the last axis tagged wall");
    for (int a = 0; a < last; ++a)
      if (bc[a] != AxisKind::periodic)
        reject("bc", "channel mode supports walls only on the last axis");
  } else {
    for (int a = 0; a < dim; ++a)
      if (bc[a] != AxisKind::periodic) reject("bc", "box mode requires every axis periodic");
  }
}

GridSpec GridSpec::channel2d(double length, double height, int nx, int nz) {
  GridSpec s;
  s.dim = 2;
  s.mode = GeometryMode::channel;
  s.extents = {length, height, 1.0};
  s.cells = {nx, nz, 1};
  s.bc = {AxisKind::periodic, AxisKind::wall, AxisKind::periodic};
  return s;
}

GridSpec GridSpec::box2d(double length, double height, int nx, int nz) {
  GridSpec s;
  s.dim = 2;
  s.mode = GeometryMode::box;
  s.extents = {length, height, 1.0};
  s.cells = {nx, nz, 1};
  s.bc = {AxisKind::periodic, AxisKind::periodic, AxisKind::periodic};
  return s;
}

GridSpec GridSpec::channel3d(double lx, double ly, double height, int nx, int ny, int nz) {
  GridSpec s;
  s.dim = 3;
  s.mode = GeometryMode::channel;
  s.extents = {lx, ly, height};
  s.cells = {nx, ny, nz};
  s.bc = {AxisKind::periodic, AxisKind::periodic, AxisKind::wall};
  return s;
}

std::string to_string(AxisKind kind) { return kind == AxisKind::wall ? "wall" : "periodic"; }
std::string to_string(GeometryMode mode) { return mode == GeometryMode::channel ? "channel" : "box"; }

Array3::Array3(Stagger stagger, Index3 shape, double fill)
    : stagger_(stagger),
      shape_(shape),
      data_(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], fill) {}

void Array3::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

Grid::Grid(GridSpec spec) : spec_(spec) {
  spec_.validate();
  for (int a = 3 - 1; a >= spec_.dim; --a) {
    spec_.cells[a] = 1;
    spec_.extents[a] = 1.0;
    spec_.bc[a] = AxisKind::periodic;
  }
  cell_volume_ = 1.0;
  for (int a = 0; a < 3; ++a) {
    spacing_[a] = spec_.extents[a] / spec_.cells[a];
    if (a < spec_.dim) cell_volume_ *= spacing_[a];
  }
  cell_wall_distance_ = wall_distance(Stagger::cell());
}

double Grid::domain_volume() const {
  double v = 1.0;
  for (int a = 0; a < spec_.dim; ++a) v *= spec_.extents[a];
  return v;
}

int Grid::points(Stagger s, int axis) const {
  if (axis >= spec_.dim) return 1;
  const int n = spec_.cells[axis];
  return (s.along(axis) && is_wall(axis)) ? n + 1 : n;
}

Index3 Grid::shape(Stagger s) const { return {points(s, 0), points(s, 1), points(s, 2)}; }

double Grid::coordinate(Stagger s, int axis, int i) const {
  const double h = spacing_[axis];
  return s.along(axis) ? i * h : (i + 0.5) * h;
}

double Grid::wall_distance_at(Stagger s, int i) const {
  if (!is_channel()) return kNoWall;
  const int w = wall_axis();
  const double z = coordinate(s, w, i);
  const double height = spec_.extents[w];
  return std::max(0.0, std::min(z, height - z));
}

Array3 Grid::wall_distance(Stagger s) const {
  Array3 out = make_array(s);
  const int w = wall_axis();
  for_each_index(out.shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    out(i, j, k) = w < 0 ? kNoWall : wall_distance_at(s, q[w]);
  });
  return out;
}

double Grid::boundary_weight(Stagger s, const Index3& q) const {
  const int w = wall_axis();
  if (w < 0 || !s.along(w)) return 1.0;
  return (q[w] == 0 || q[w] == spec_.cells[w]) ? 0.5 : 1.0;
}

GridPtr build_grid(const GridSpec& spec) { return std::make_shared<const Grid>(spec); }

}  // namespace kvflow
