#include "kvflow/fields.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvflow {

namespace {

int wrap(int i, int n) { return ((i % n) + n) % n; }

/// Cell value at a possibly out-of-range index: wrap on periodic axes,
/// reflect across wall planes.
double cell_value(const ScalarField& f, Index3 q) {
  const Grid& g = *f.grid();
  double sign = 1.0;
  for (int a = 0; a < g.dim(); ++a) {
    const int n = g.cells(a);
    if (q[a] >= 0 && q[a] < n) continue;
    if (g.is_wall(a)) {
      q[a] = q[a] < 0 ? -q[a] - 1 : 2 * n - 1 - q[a];
      if (f.parity() == WallParity::odd) sign = -sign;
    } else {
      q[a] = wrap(q[a], n);
    }
  }
  return sign * f.values()[q];
}

template <class F>
double weighted_sum(const Grid& g, const Array3& layout, F&& term) {
  double total = 0.0;
  const Stagger s = layout.stagger();
  for_each_index(layout.shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    total += g.boundary_weight(s, q) * term(layout.offset(i, j, k));
  });
  return total;
}

}  // namespace

ScalarField::ScalarField(GridPtr grid, double fill, WallParity parity)
    : grid_(std::move(grid)), parity_(parity) {
  values_ = grid_->make_array(Stagger::cell(), fill);
}

double ScalarField::neighbor(Index3 q, int axis, int step) const {
  q[axis] += step;
  return cell_value(*this, q);
}

double ScalarField::min() const {
  const auto v = values_.values();
  return *std::min_element(v.begin(), v.end());
}

double ScalarField::max() const {
  const auto v = values_.values();
  return *std::max_element(v.begin(), v.end());
}

double ScalarField::integral() const {
  double s = 0.0;
  for (double x : values_.values()) s += x;
  return s * grid_->cell_volume();
}

bool ScalarField::all_finite() const {
  const auto v = values_.values();
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

VectorField::VectorField(GridPtr grid) : grid_(std::move(grid)) {
  for (int d = 0; d < grid_->dim(); ++d) comp_[d] = grid_->make_array(Stagger::face(d));
}

void VectorField::enforce_wall_bc() {
  const int w = grid_->wall_axis();
  if (w < 0) return;
  Array3& c = comp_[w];
  const int n = grid_->cells(w);
  for_each_index(c.shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    if (q[w] == 0 || q[w] == n) c(i, j, k) = 0.0;
  });
}

bool VectorField::all_finite() const {
  for (int d = 0; d < dim(); ++d)
    for (double x : comp_[d].values())
      if (!std::isfinite(x)) return false;
  return true;
}

void VectorField::set_zero() {
  for (int d = 0; d < dim(); ++d) comp_[d].fill(0.0);
}

VectorField& VectorField::operator+=(const VectorField& other) {
  axpy(1.0, other);
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  axpy(-1.0, other);
  return *this;
}

VectorField& VectorField::operator*=(double s) {
  for (int d = 0; d < dim(); ++d)
    for (double& x : comp_[d].values()) x *= s;
  return *this;
}

void VectorField::axpy(double a, const VectorField& x) {
  for (int d = 0; d < dim(); ++d) {
    auto dst = comp_[d].values();
    const auto src = x.comp_[d].values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += a * src[i];
  }
}

VectorField VectorField::sample(GridPtr grid,
                                const std::function<double(int, const std::array<double, 3>&)>& f) {
  VectorField v(grid);
  for (int d = 0; d < grid->dim(); ++d) {
    const Stagger s = Stagger::face(d);
    Array3& c = v.component(d);
    for_each_index(c.shape(), [&](int i, int j, int k) {
      const Index3 q{i, j, k};
      std::array<double, 3> x{0.0, 0.0, 0.0};
      for (int a = 0; a < grid->dim(); ++a) x[a] = grid->coordinate(s, a, q[a]);
      c(i, j, k) = f(d, x);
    });
  }
  v.enforce_wall_bc();
  return v;
}

bool VectorField::operator==(const VectorField& other) const {
  if (!same_grid(grid_, other.grid_)) return false;
  for (int d = 0; d < dim(); ++d)
    if (!(comp_[d] == other.comp_[d])) return false;
  return true;
}

TensorField::TensorField(GridPtr grid) : grid_(std::move(grid)) {
  const int dim = grid_->dim();
  for (int a = 0; a < dim; ++a) {
    diag_[a] = grid_->make_array(Stagger::cell());
    for (int b = a + 1; b < dim; ++b) off_[pair_slot(a, b)] = grid_->make_array(Stagger::edge(a, b));
  }
}

TensorField& TensorField::operator+=(const TensorField& other) {
  const int dim = grid_->dim();
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      auto dst = entry(a, b).values();
      const auto src = other.entry(a, b).values();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  return *this;
}

TensorField& TensorField::operator*=(double s) {
  const int dim = grid_->dim();
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b)
      for (double& x : entry(a, b).values()) x *= s;
  return *this;
}

ScalarField TensorField::frobenius_squared_at_cells() const {
  const Grid& g = *grid_;
  ScalarField out(grid_, 0.0);
  Array3& o = out.values();
  const int dim = g.dim();
  for_each_index(o.shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += diag_[a](i, j, k) * diag_[a](i, j, k);
    for (int a = 0; a < dim; ++a)
      for (int b = a + 1; b < dim; ++b) {
        const Array3& e = off_[pair_slot(a, b)];
        const int na = e.extent(a);
        const int nb = e.extent(b);
        double acc = 0.0;
        for (int sa = 0; sa < 2; ++sa)
          for (int sb = 0; sb < 2; ++sb) {
            Index3 r = q;
            r[a] = (q[a] + sa) % na;
            r[b] = (q[b] + sb) % nb;
            acc += e[r] * e[r];
          }
        s += 2.0 * 0.25 * acc;
      }
    o(i, j, k) = s;
  });
  return out;
}

ScalarField TensorField::trace() const {
  ScalarField out(grid_, 0.0);
  auto o = out.values().values();
  for (int a = 0; a < grid_->dim(); ++a) {
    const auto d = diag_[a].values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += d[i];
  }
  return out;
}

FluxCoefficient sample_flux_points(const ScalarField& c) {
  const Grid& g = *c.grid();
  FluxCoefficient out;
  out.cell = c.values();
  const int dim = g.dim();
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      Array3 e = g.make_array(Stagger::edge(a, b));
      for_each_index(e.shape(), [&](int i, int j, int k) {
        const Index3 q{i, j, k};
        double acc = 0.0;
        for (int sa = -1; sa <= 0; ++sa)
          for (int sb = -1; sb <= 0; ++sb) {
            Index3 r = q;
            r[a] += sa;
            r[b] += sb;
            acc += cell_value(c, r);
          }
        e(i, j, k) = 0.25 * acc;
      });
      out.edge[pair_slot(a, b)] = std::move(e);
    }
  return out;
}

FluxCoefficient constant_flux_coefficient(const Grid& grid, double value) {
  FluxCoefficient out;
  out.cell = grid.make_array(Stagger::cell(), value);
  for (int a = 0; a < grid.dim(); ++a)
    for (int b = a + 1; b < grid.dim(); ++b)
      out.edge[pair_slot(a, b)] = grid.make_array(Stagger::edge(a, b), value);
  return out;
}

FluxCoefficient combine(const FluxCoefficient& x, double a, const FluxCoefficient* y, double b,
                        double shift) {
  FluxCoefficient out = x;
  auto mix = [&](Array3& dst, const Array3* other) {
    auto d = dst.values();
    if (other == nullptr) {
      for (double& v : d) v = a * v + shift;
      return;
    }
    const auto o = other->values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a * d[i] + b * o[i] + shift;
  };
  mix(out.cell, y ? &y->cell : nullptr);
  for (int s = 0; s < 3; ++s)
    if (out.edge[s].size() > 0) mix(out.edge[s], y ? &y->edge[s] : nullptr);
  return out;
}

Array3 sample_faces(const ScalarField& c, int axis) {
  const Grid& g = *c.grid();
  Array3 out = g.make_array(Stagger::face(axis));
  for_each_index(out.shape(), [&](int i, int j, int k) {
    Index3 q{i, j, k};
    const double right = cell_value(c, q);
    q[axis] -= 1;
    out(i, j, k) = 0.5 * (right + cell_value(c, q));
  });
  return out;
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  return a && b && *a == *b;
}

void require_same_grid(const GridPtr& a, const GridPtr& b, const char* where) {
  if (!same_grid(a, b)) throw std::invalid_argument(std::string(where) + ": mismatched grid");
}

double dot(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  const Grid& g = *a.grid();
  double total = 0.0;
  for (int d = 0; d < a.dim(); ++d) {
    const double* x = a.component(d).data();
    const double* y = b.component(d).data();
    total += weighted_sum(g, a.component(d), [&](std::size_t o) { return x[o] * y[o]; });
  }
  return total * g.cell_volume();
}

double norm(const VectorField& v) { return std::sqrt(std::max(0.0, dot(v, v))); }

double dot(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  const auto x = a.values().values();
  const auto y = b.values().values();
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i] * y[i];
  return total * a.grid()->cell_volume();
}

double tensor_dot(const TensorField& s, const TensorField& t) {
  require_same_grid(s.grid(), t.grid(), "tensor_dot");
  const Grid& g = *s.grid();
  double total = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const auto x = s.diag(a).values();
    const auto y = t.diag(a).values();
    for (std::size_t i = 0; i < x.size(); ++i) total += x[i] * y[i];
    for (int b = a + 1; b < g.dim(); ++b) {
      const double* p = s.off(a, b).data();
      const double* r = t.off(a, b).data();
      total += 2.0 * weighted_sum(g, s.off(a, b), [&](std::size_t o) { return p[o] * r[o]; });
    }
  }
  return total * g.cell_volume();
}

double tensor_dot(const TensorField& s, const TensorField& t, const FluxCoefficient& weight) {
  require_same_grid(s.grid(), t.grid(), "tensor_dot");
  const Grid& g = *s.grid();
  double total = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const auto x = s.diag(a).values();
    const auto y = t.diag(a).values();
    const auto w = weight.cell.values();
    for (std::size_t i = 0; i < x.size(); ++i) total += w[i] * x[i] * y[i];
    for (int b = a + 1; b < g.dim(); ++b) {
      const double* p = s.off(a, b).data();
      const double* r = t.off(a, b).data();
      const double* c = weight.edge[pair_slot(a, b)].data();
      total += 2.0 * weighted_sum(g, s.off(a, b), [&](std::size_t o) { return c[o] * p[o] * r[o]; });
    }
  }
  return total * g.cell_volume();
}

double gradient_norm_squared(const VelocityGradient& grad) {
  const Grid& g = *grad.grid;
  double total = 0.0;
  for (int d = 0; d < g.dim(); ++d)
    for (int e = 0; e < g.dim(); ++e) {
      const Array3& a = grad.entry[d][e];
      const double* p = a.data();
      total += weighted_sum(g, a, [&](std::size_t o) { return p[o] * p[o]; });
    }
  return total * g.cell_volume();
}

double max_abs(const VectorField& v) {
  double m = 0.0;
  for (int d = 0; d < v.dim(); ++d)
    for (double x : v.component(d).values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const ScalarField& s) {
  double m = 0.0;
  for (double x : s.values().values()) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace kvflow
