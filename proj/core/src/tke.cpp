#include "kvflow/tke.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>

namespace kvflow {

namespace {

/// Visits every face normal to `axis` with the indices of the cells on either
/// side. On a wall face one of them is a ghost (index -1 or n along `axis`).
template <class F>
void for_each_face(const Grid& g, int axis, F&& f) {
  const Index3 cells{g.cells(0), g.cells(1), g.cells(2)};
  const int n = cells[axis];
  const bool wall = g.is_wall(axis);
  Index3 shape = cells;
  shape[axis] = wall ? n + 1 : n;
  for_each_index(shape, [&](int i, int j, int k) {
    const Index3 face{i, j, k};
    Index3 left = face;
    Index3 right = face;
    left[axis] = face[axis] - 1;
    if (!wall && left[axis] < 0) left[axis] = n - 1;
    f(face, left, right, wall && (face[axis] == 0 || face[axis] == n));
  });
}

bool inside(const Grid& g, const Index3& q, int axis) { return q[axis] >= 0 && q[axis] < g.cells(axis); }

ScalarField truncated_root_law(const ScalarField& k, const ScalarField& ell, double scale, double n) {
  require_same_grid(k.grid(), ell.grid(), "eddy closure");
  if (!(n > 0.0)) throw std::invalid_argument("truncate: height must be positive");
  ScalarField out(k.grid(), 0.0, ell.parity());
  const auto kv = k.values().values();
  const auto lv = ell.values().values();
  auto ov = out.values().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = scale * lv[i] * truncate(std::sqrt(std::abs(kv[i])), n);
  return out;
}

}  // namespace

double truncate(double x, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("truncate: height must be positive");
  if (std::abs(x) <= n) return x;
  return x > 0.0 ? n : -n;
}

void TkeConfig::validate() const {
  if (!(n_visc >= 1.0)) throw std::invalid_argument("tke.n_visc: must be at least 1");
  if (!(n_diff >= 1.0)) throw std::invalid_argument("tke.n_diff: must be at least 1");
  if (!(n_src >= 1.0)) throw std::invalid_argument("tke.n_src: must be at least 1");
  if (!(c_diff > 0.0) || !std::isfinite(c_diff)) throw std::invalid_argument("tke.c_diff: must be positive");
  if (eta && (!(*eta > 0.0) || !std::isfinite(*eta))) throw std::invalid_argument("tke.eta: must be positive");
}

double TkeConfig::eta_for(const Grid& grid) const {
  if (eta) return *eta;
  return 1e-3 * grid.extent(grid.dim() - 1);
}

ScalarField make_k_field(const GridPtr& grid, double fill) { return ScalarField(grid, fill, WallParity::odd); }

ScalarField eddy_viscosity(const ScalarField& k, const ScalarField& ell, double n) {
  return truncated_root_law(k, ell, 1.0, n);
}

ScalarField eddy_diffusivity(const ScalarField& k, const ScalarField& ell, double c, double n_prime) {
  return truncated_root_law(k, ell, c, n_prime);
}

ScalarField smagorinsky_viscosity(const ScalarField& ell, double alpha, const TensorField& dv) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("smagorinsky_viscosity: alpha must be nonnegative");
  require_same_grid(ell.grid(), dv.grid(), "smagorinsky_viscosity");
  ScalarField out = dv.frobenius_squared_at_cells();
  out.set_parity(ell.parity());
  const auto lv = ell.values().values();
  auto ov = out.values().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = lv[i] * std::sqrt(alpha * lv[i]) * std::sqrt(ov[i]);
  return out;
}

ScalarField closure_k(double alpha, const ScalarField& ell, const TensorField& dv) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("closure_k: alpha must be nonnegative");
  require_same_grid(ell.grid(), dv.grid(), "closure_k");
  ScalarField out = dv.frobenius_squared_at_cells();
  out.set_parity(WallParity::odd);
  const auto lv = ell.values().values();
  auto ov = out.values().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= alpha * lv[i];
  return out;
}

double tke_courant(const VectorField& v, double dt) {
  const Grid& g = *v.grid();
  Array3 out = g.make_array(Stagger::cell());
  for (int d = 0; d < g.dim(); ++d) {
    const Array3& u = v.component(d);
    const double h = g.spacing(d);
    for_each_face(g, d, [&](const Index3& f, const Index3& l, const Index3& r, bool wall) {
      if (wall) return;
      const double uf = u[f];
      out[l] += std::max(uf, 0.0) / h;
      out[r] += std::max(-uf, 0.0) / h;
    });
  }
  double m = 0.0;
  for (double x : out.values()) m = std::max(m, x);
  return dt * m;
}

ScalarField tke_source(const ScalarField& k, const ScalarField& ell, const TensorField& dv,
                       const TkeConfig& cfg) {
  const ScalarField nu_t = eddy_viscosity(k, ell, cfg.n_visc);
  ScalarField s = dv.frobenius_squared_at_cells();
  const auto nv = nu_t.values().values();
  auto sv = s.values().values();
  for (std::size_t i = 0; i < sv.size(); ++i) sv[i] = truncate(nv[i] * sv[i], cfg.n_src);
  return s;
}

ScalarField tke_step(const ScalarField& k, const VectorField& v, const TensorField& dv, const ScalarField& ell,
                     const TkeConfig& cfg, double dt, TkeBudget* budget) {
  return tke_step_with_source(k, v, tke_source(k, ell, dv, cfg), ell, cfg, dt, budget);
}

ScalarField tke_step_with_source(const ScalarField& k, const VectorField& v, const ScalarField& source,
                                 const ScalarField& ell, const TkeConfig& cfg, double dt, TkeBudget* budget) {
  cfg.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("tke_step: dt must be positive");
  const GridPtr& grid = k.grid();
  require_same_grid(grid, v.grid(), "tke_step");
  require_same_grid(grid, source.grid(), "tke_step");
  require_same_grid(grid, ell.grid(), "tke_step");
  if (source.min() < 0.0) throw std::invalid_argument("tke_step: source must be nonnegative");
  const Grid& g = *grid;

  TkeBudget bud;
  bud.courant = tke_courant(v, dt);
  if (bud.courant > 1.0)
    throw CflError("tke_cfl: upwind Courant number " + std::to_string(bud.courant) + " exceeds 1", bud.courant);

  const Array3& kv = k.values();
  const Array3& lv = ell.values();
  const Index3 shape = kv.shape();
  const auto n_cells = static_cast<Eigen::Index>(kv.size());
  const double eta = cfg.eta_for(g);
  const ScalarField mu = eddy_diffusivity(k, ell, cfg.c_diff, cfg.n_diff);
  auto at = [&](const Index3& q) { return static_cast<Eigen::Index>(kv.offset(q[0], q[1], q[2])); };

  // Explicit upwind transport and the per-face diffusion weights mu_f / h^2.
  Array3 adv = g.make_array(Stagger::cell());
  struct Link {
    Eigen::Index a;
    Eigen::Index b;  // -1: wall face with the odd ghost of a
    double w;
  };
  std::vector<Link> links;
  for (int d = 0; d < g.dim(); ++d) {
    const Array3& u = v.component(d);
    const double h = g.spacing(d);
    for_each_face(g, d, [&](const Index3& f, const Index3& l, const Index3& r, bool wall) {
      if (wall) {
        const Index3& in = inside(g, l, d) ? l : r;
        const Index3& out = inside(g, l, d) ? r : l;
        const double mu_ghost = cfg.c_diff * ell.neighbor(in, d, out[d] - in[d]) *
                                truncate(std::sqrt(std::abs(kv[in])), cfg.n_diff);
        const double w = 0.5 * (mu.values()[in] + mu_ghost) / (h * h);
        if (w != 0.0) links.push_back({at(in), -1, w});
        return;
      }
      const double uf = u[f];
      const double flux = uf * (uf > 0.0 ? kv[l] : kv[r]) / h;
      adv[l] += flux;
      adv[r] -= flux;
      const double w = 0.5 * (mu.values()[l] + mu.values()[r]) / (h * h);
      if (w != 0.0 && at(l) != at(r)) links.push_back({at(l), at(r), w});
    });
  }

  // (1/dt + s) k^{n+1} - div(mu grad k^{n+1}) = k^n/dt - adv + S
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n_cells) + 4 * links.size());
  Eigen::VectorXd rhs(n_cells);
  std::vector<double> sink(static_cast<std::size_t>(n_cells));
  for_each_index(shape, [&](int i, int j, int kk) {
    const Index3 q{i, j, kk};
    const Eigen::Index c = at(q);
    sink[c] = std::sqrt(std::abs(kv[q])) / (lv[q] + eta);
    trip.emplace_back(c, c, 1.0 / dt + sink[c]);
    rhs[c] = kv[q] / dt - adv[q] + source.values()[q];
  });
  for (const Link& e : links) {
    if (e.b < 0) {
      trip.emplace_back(e.a, e.a, 2.0 * e.w);
      continue;
    }
    trip.emplace_back(e.a, e.a, e.w);
    trip.emplace_back(e.b, e.b, e.w);
    trip.emplace_back(e.a, e.b, -e.w);
    trip.emplace_back(e.b, e.a, -e.w);
  }
  Eigen::SparseMatrix<double> m(n_cells, n_cells);
  m.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("tke_step: factorization failed");
  const Eigen::VectorXd sol = ldlt.solve(rhs);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("tke_step: solve failed");

  // Budget of the unclipped solution, then the clip.
  const double vol = g.cell_volume();
  std::vector<double> diff(static_cast<std::size_t>(n_cells), 0.0);
  for (const Link& e : links) {
    if (e.b < 0) {
      diff[e.a] -= 2.0 * e.w * sol[e.a];
      continue;
    }
    const double flux = e.w * (sol[e.b] - sol[e.a]);
    diff[e.a] += flux;
    diff[e.b] -= flux;
  }
  ScalarField out(grid, 0.0, k.parity());
  Array3& ov = out.values();
  double before = 0.0, after = 0.0;
  for_each_index(shape, [&](int i, int j, int kk) {
    const Index3 q{i, j, kk};
    const Eigen::Index c = at(q);
    before += kv[q];
    bud.advection += adv[q];
    bud.diffusion += diff[c];
    bud.production += source.values()[q];
    bud.dissipation += sink[c] * sol[c];
    ov[q] = std::max(sol[c], 0.0);
    bud.clipped_mass += ov[q] - sol[c];
    after += ov[q];
  });
  bud.total_before = before * vol;
  bud.total_after = after * vol;
  bud.advection *= vol;
  bud.diffusion *= vol;
  bud.production *= vol;
  bud.dissipation *= vol;
  bud.clipped_mass *= vol;
  bud.residual = std::abs((bud.total_after - bud.total_before) / dt -
                          (-bud.advection + bud.diffusion + bud.production - bud.dissipation) -
                          bud.clipped_mass / dt);
  if (!out.all_finite()) throw std::runtime_error("fields_finite: non-finite k after step");
  if (budget) *budget = bud;
  return out;
}

double gradient_lp_norm(const ScalarField& k, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("gradient_lp_norm: p must be at least 1");
  const Grid& g = *k.grid();
  double total = 0.0;
  for (int d = 0; d < g.dim(); ++d) {
    const double h = g.spacing(d);
    for_each_face(g, d, [&](const Index3&, const Index3& l, const Index3& r, bool wall) {
      const double kl = inside(g, l, d) ? k.values()[l] : k.neighbor(r, d, -1);
      const double kr = inside(g, r, d) ? k.values()[r] : k.neighbor(l, d, 1);
      total += (wall ? 0.5 : 1.0) * std::pow(std::abs(kr - kl) / h, p);
    });
  }
  return std::pow(total * g.cell_volume(), 1.0 / p);
}

}  // namespace kvflow
