#include "kvflow/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace kvflow {

namespace {

/// Index shifted by +1 along a cell-centered (or periodic staggered) axis.
inline int next(int i, int n, bool periodic) { return (periodic && i + 1 == n) ? 0 : i + 1; }
inline int prev(int i, int n, bool periodic) { return (periodic && i == 0) ? n - 1 : i - 1; }

/// d v_d / d x_e for e != d at edge(d, e). Along a wall axis e the missing
/// neighbor is the odd ghost -v (tangential no-slip).
void tangential_derivative(const Grid& g, const Array3& vd, int e, Array3& out) {
  const int n = g.cells(e);
  const bool wall = g.is_wall(e);
  const double inv_h = 1.0 / g.spacing(e);
  for_each_index(out.shape(), [&](int i, int j, int k) {
    Index3 q{i, j, k};
    const int qe = q[e];
    double above;
    double below;
    if (wall) {
      q[e] = qe < n ? qe : n - 1;
      above = qe < n ? vd[q] : -vd[q];
      q[e] = qe > 0 ? qe - 1 : 0;
      below = qe > 0 ? vd[q] : -vd[q];
    } else {
      above = vd[q];
      q[e] = prev(qe, n, true);
      below = vd[q];
    }
    out(i, j, k) = (above - below) * inv_h;
  });
}

/// d v_d / d x_d at the cells.
void normal_derivative(const Grid& g, const Array3& vd, int d, Array3& out) {
  const int n = g.cells(d);
  const bool periodic = !g.is_wall(d);
  const double inv_h = 1.0 / g.spacing(d);
  for_each_index(out.shape(), [&](int i, int j, int k) {
    Index3 q{i, j, k};
    const double left = vd[q];
    q[d] = next(q[d], n, periodic);
    out(i, j, k) = (vd[q] - left) * inv_h;
  });
}

/// out_d = sum_e D_e^- row[e] on the faces normal to d. row[d] lives at the
/// cells, row[e] (e != d) on edge(d, e). Wall-plane faces of the normal
/// component are left at zero.
void row_divergence(const Grid& g, int d, const std::array<const Array3*, 3>& row, Array3& out) {
  const int dim = g.dim();
  const int nd = g.cells(d);
  const bool wall_d = g.is_wall(d);
  for_each_index(out.shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    if (wall_d && (q[d] == 0 || q[d] == nd)) {
      out(i, j, k) = 0.0;
      return;
    }
    double acc = 0.0;
    for (int e = 0; e < dim; ++e) {
      const Array3& s = *row[e];
      const int n = g.cells(e);
      Index3 r = q;
      double hi;
      double lo;
      if (e == d) {
        hi = s[r];
        r[d] = prev(q[d], n, !wall_d);
        lo = s[r];
      } else {
        lo = s[r];
        r[e] = next(q[e], n, !g.is_wall(e));
        hi = s[r];
      }
      acc += (hi - lo) / g.spacing(e);
    }
    out(i, j, k) = acc;
  });
}

}  // namespace

ScalarField divergence(const VectorField& v) {
  const Grid& g = *v.grid();
  ScalarField out(v.grid(), 0.0);
  Array3 tmp = g.make_array(Stagger::cell());
  for (int d = 0; d < g.dim(); ++d) {
    normal_derivative(g, v.component(d), d, tmp);
    auto o = out.values().values();
    const auto t = tmp.values();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += t[i];
  }
  return out;
}

VectorField gradient(const ScalarField& p) {
  const Grid& g = *p.grid();
  VectorField out(p.grid());
  const Array3& c = p.values();
  for (int d = 0; d < g.dim(); ++d) {
    Array3& o = out.component(d);
    const int n = g.cells(d);
    const bool wall = g.is_wall(d);
    const double inv_h = 1.0 / g.spacing(d);
    for_each_index(o.shape(), [&](int i, int j, int k) {
      Index3 q{i, j, k};
      if (wall && (q[d] == 0 || q[d] == n)) {
        o(i, j, k) = 0.0;
        return;
      }
      const double right = c[q];
      q[d] = prev(q[d], n, !wall);
      o(i, j, k) = (right - c[q]) * inv_h;
    });
  }
  return out;
}

ScalarField cell_laplacian(const ScalarField& p) { return divergence(gradient(p)); }

VelocityGradient velocity_gradient(const VectorField& v) {
  const Grid& g = *v.grid();
  VelocityGradient out;
  out.grid = v.grid();
  const int dim = g.dim();
  for (int d = 0; d < dim; ++d)
    for (int e = 0; e < dim; ++e) {
      if (e == d) {
        out.entry[d][d] = g.make_array(Stagger::cell());
        normal_derivative(g, v.component(d), d, out.entry[d][d]);
      } else {
        out.entry[d][e] = g.make_array(Stagger::edge(d, e));
        tangential_derivative(g, v.component(d), e, out.entry[d][e]);
      }
    }
  return out;
}

TensorField deformation(const VectorField& v) {
  const Grid& g = *v.grid();
  TensorField out(v.grid());
  const int dim = g.dim();
  for (int a = 0; a < dim; ++a) {
    normal_derivative(g, v.component(a), a, out.diag(a));
    for (int b = a + 1; b < dim; ++b) {
      Array3& o = out.off(a, b);
      Array3 t = g.make_array(Stagger::edge(a, b));
      tangential_derivative(g, v.component(a), b, o);
      tangential_derivative(g, v.component(b), a, t);
      auto ov = o.values();
      const auto tv = t.values();
      for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = 0.5 * (ov[i] + tv[i]);
    }
  }
  return out;
}

VectorField divergence(const TensorField& sigma) {
  const Grid& g = *sigma.grid();
  VectorField out(sigma.grid());
  for (int d = 0; d < g.dim(); ++d) {
    std::array<const Array3*, 3> row{};
    for (int e = 0; e < g.dim(); ++e) row[e] = &sigma.entry(d, e);
    row_divergence(g, d, row, out.component(d));
  }
  return out;
}

VectorField stress_divergence(const FluxCoefficient& c, const VectorField& v) {
  TensorField s = deformation(v);
  const int dim = v.dim();
  auto scale = [](Array3& x, const Array3& w) {
    auto xv = x.values();
    const auto wv = w.values();
    for (std::size_t i = 0; i < xv.size(); ++i) xv[i] *= wv[i];
  };
  for (int a = 0; a < dim; ++a) {
    scale(s.diag(a), c.cell);
    for (int b = a + 1; b < dim; ++b) scale(s.off(a, b), c.edge[pair_slot(a, b)]);
  }
  return divergence(s);
}

VectorField vector_laplacian(const VectorField& v) {
  const Grid& g = *v.grid();
  const VelocityGradient grad = velocity_gradient(v);
  VectorField out(v.grid());
  for (int d = 0; d < g.dim(); ++d) {
    std::array<const Array3*, 3> row{};
    for (int e = 0; e < g.dim(); ++e) row[e] = &grad.entry[d][e];
    row_divergence(g, d, row, out.component(d));
  }
  return out;
}

VectorField voigt_apply(const ScalarField& ell, double alpha, const VectorField& v) {
  require_same_grid(ell.grid(), v.grid(), "voigt_apply");
  VectorField out = v;
  if (alpha != 0.0) out.axpy(-alpha, stress_divergence(sample_flux_points(ell), v));
  out.mark_solenoidal(false);
  return out;
}

double max_divergence(const VectorField& v) { return max_abs(divergence(v)); }

}  // namespace kvflow
