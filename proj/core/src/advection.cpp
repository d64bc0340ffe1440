#include "kvflow/advection.hpp"

namespace kvflow {

namespace {

inline int wrap_next(int i, int n) { return i + 1 == n ? 0 : i + 1; }
inline int wrap_prev(int i, int n) { return i == 0 ? n - 1 : i - 1; }

}  // namespace

VectorField advect(const VectorField& v, const VectorField& w) {
  require_same_grid(v.grid(), w.grid(), "advect");
  const Grid& g = *v.grid();
  const int dim = g.dim();
  VectorField out(v.grid());

  for (int d = 0; d < dim; ++d) {
    const Array3& wd = w.component(d);
    const Array3& vd = v.component(d);
    Array3& o = out.component(d);
    const int nd = g.cells(d);
    const bool wall_d = g.is_wall(d);

    for_each_index(o.shape(), [&](int i, int j, int k) {
      const Index3 q{i, j, k};
      if (wall_d && (q[d] == 0 || q[d] == nd)) return;
      double acc = 0.0;
      for (int e = 0; e < dim; ++e) {
        const int ne = g.cells(e);
        const bool wall_e = g.is_wall(e);
        const double inv_2h = 0.5 / g.spacing(e);
        if (e == d) {
          Index3 qp = q;
          Index3 qm = q;
          qp[d] = wall_d ? q[d] + 1 : wrap_next(q[d], nd);
          qm[d] = wall_d ? q[d] - 1 : wrap_prev(q[d], nd);
          const double fp = 0.5 * (vd[q] + vd[qp]);
          const double fm = 0.5 * (vd[qm] + vd[q]);
          acc += (fp * wd[qp] - fm * wd[qm]) * inv_2h;
          continue;
        }
        // Transport velocity v_e on the (d, e) edges above and below q,
        // averaged along d; v_e is cell-centered along d.
        const Array3& ve = v.component(e);
        Index3 a = q;
        Index3 b = q;
        b[d] = wall_d ? q[d] - 1 : wrap_prev(q[d], nd);
        // Edge above q along e sits at v_e face index q_e + 1.
        a[e] = wall_e ? q[e] + 1 : wrap_next(q[e], ne);
        b[e] = a[e];
        const double fp = 0.5 * (ve[a] + ve[b]);
        a[e] = q[e];
        b[e] = q[e];
        const double fm = 0.5 * (ve[a] + ve[b]);
        // On a wall edge the normal transport velocity vanishes, so the ghost
        // neighbor never contributes.
        double up = 0.0;
        double down = 0.0;
        Index3 r = q;
        if (!wall_e || q[e] + 1 < ne) {
          r[e] = wall_e ? q[e] + 1 : wrap_next(q[e], ne);
          up = fp * wd[r];
        }
        if (!wall_e || q[e] > 0) {
          r[e] = wall_e ? q[e] - 1 : wrap_prev(q[e], ne);
          down = fm * wd[r];
        }
        acc += (up - down) * inv_2h;
      }
      o(i, j, k) = acc;
    });
  }
  return out;
}

}  // namespace kvflow
