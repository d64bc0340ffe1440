#include "kvflow/spectral.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "kvflow/operators.hpp"

namespace kvflow {

namespace {

AxisBasis build_basis(BasisKind kind, int n, double h) {
  const int m = kind == BasisKind::dirichlet_face ? n - 1 : n;
  if (m < 1) throw std::invalid_argument("axis_basis: too few cells");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    a(i, i) += 2.0;
    if (i > 0) a(i, i - 1) -= 1.0;
    if (i + 1 < m) a(i, i + 1) -= 1.0;
  }
  switch (kind) {
    case BasisKind::periodic:
      if (m == 1) {
        a(0, 0) = 0.0;
      } else {
        a(0, m - 1) -= 1.0;
        a(m - 1, 0) -= 1.0;
      }
      break;
    case BasisKind::dirichlet_cell:
      a(0, 0) += 1.0;
      a(m - 1, m - 1) += 1.0;
      break;
    case BasisKind::dirichlet_face:
      break;
    case BasisKind::neumann_cell:
      a(0, 0) -= 1.0;
      a(m - 1, m - 1) -= 1.0;
      break;
  }
  a /= h * h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  AxisBasis b{es.eigenvectors(), es.eigenvalues()};
  if (kind == BasisKind::periodic || kind == BasisKind::neumann_cell) {
    // The constant mode is exact; pin it so mean removal is exact too.
    b.lambda(0) = 0.0;
    b.q.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
  }
  return b;
}

std::size_t product(const Index3& s) {
  return static_cast<std::size_t>(s[0]) * static_cast<std::size_t>(s[1]) *
         static_cast<std::size_t>(s[2]);
}

/// Index shape of the unknowns of component d.
Index3 unknown_shape(const Grid& g, int d, const Array3& c) {
  Index3 s = c.shape();
  if (g.is_wall(d)) s[d] = g.cells(d) - 1;
  return s;
}

void thomas(std::vector<double>& x, const std::vector<double>& a, const std::vector<double>& b,
            const std::vector<double>& c, std::vector<double>& work) {
  const std::size_t n = x.size();
  work.resize(n);
  double beta = b[0];
  x[0] /= beta;
  for (std::size_t i = 1; i < n; ++i) {
    work[i] = c[i - 1] / beta;
    beta = b[i] - a[i] * work[i];
    x[i] = (x[i] - a[i] * x[i - 1]) / beta;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= work[i + 1] * x[i + 1];
}

}  // namespace

const AxisBasis& axis_basis(BasisKind kind, int n, double h) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, double>, std::unique_ptr<AxisBasis>> cache;
  const std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(static_cast<int>(kind), n, h);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<AxisBasis>(build_basis(kind, n, h))).first;
  return *it->second;
}

void apply_along_axis(SpectralBlock& block, int axis, const Eigen::MatrixXd& m) {
  const Index3& s = block.shape;
  const Eigen::Index na = s[axis];
  if (m.rows() != na || m.cols() != na) throw std::logic_error("apply_along_axis: size mismatch");
  Eigen::Index inner = 1;
  for (int a = 0; a < axis; ++a) inner *= s[a];
  Eigen::Index outer = 1;
  for (int a = axis + 1; a < 3; ++a) outer *= s[a];
  if (inner == 1) {
    Eigen::Map<Eigen::MatrixXd> x(block.data.data(), na, outer);
    x = (m * x).eval();
    return;
  }
  for (Eigen::Index o = 0; o < outer; ++o) {
    Eigen::Map<Eigen::MatrixXd> x(block.data.data() + o * inner * na, inner, na);
    x = (x * m.transpose()).eval();
  }
}

std::array<BasisKind, 3> velocity_basis_kinds(const Grid& grid, int d) {
  std::array<BasisKind, 3> k{BasisKind::periodic, BasisKind::periodic, BasisKind::periodic};
  for (int a = 0; a < grid.dim(); ++a)
    if (grid.is_wall(a)) k[a] = a == d ? BasisKind::dirichlet_face : BasisKind::dirichlet_cell;
  return k;
}

SpectralBlock extract_unknowns(const Grid& grid, int d, const Array3& component) {
  SpectralBlock b;
  b.shape = unknown_shape(grid, d, component);
  b.data.resize(product(b.shape));
  const int shift = grid.is_wall(d) ? 1 : 0;
  std::size_t o = 0;
  for_each_index(b.shape, [&](int i, int j, int k) {
    Index3 q{i, j, k};
    q[d] += shift;
    b.data[o++] = component[q];
  });
  return b;
}

void scatter_unknowns(const Grid& grid, int d, const SpectralBlock& block, Array3& component) {
  const int shift = grid.is_wall(d) ? 1 : 0;
  if (shift) component.fill(0.0);
  std::size_t o = 0;
  for_each_index(block.shape, [&](int i, int j, int k) {
    Index3 q{i, j, k};
    q[d] += shift;
    component[q] = block.data[o++];
  });
}

void to_modes(const Grid& grid, const std::array<BasisKind, 3>& kinds, SpectralBlock& block) {
  for (int a = 0; a < grid.dim(); ++a)
    apply_along_axis(block, a, axis_basis(kinds[a], grid.cells(a), grid.spacing(a)).q.transpose());
}

void from_modes(const Grid& grid, const std::array<BasisKind, 3>& kinds, SpectralBlock& block) {
  for (int a = 0; a < grid.dim(); ++a)
    apply_along_axis(block, a, axis_basis(kinds[a], grid.cells(a), grid.spacing(a)).q);
}

std::vector<double> mode_eigenvalues(const Grid& grid, const std::array<BasisKind, 3>& kinds,
                                     const Index3& shape) {
  std::array<const Eigen::VectorXd*, 3> lam{};
  for (int a = 0; a < grid.dim(); ++a)
    lam[a] = &axis_basis(kinds[a], grid.cells(a), grid.spacing(a)).lambda;
  std::vector<double> out(product(shape));
  std::size_t o = 0;
  for_each_index(shape, [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    double s = 0.0;
    for (int a = 0; a < grid.dim(); ++a) s += (*lam[a])(q[a]);
    out[o++] = s;
  });
  return out;
}

PressureSolver::PressureSolver(GridPtr grid) : grid_(std::move(grid)) {
  for (int a = 0; a < 3; ++a)
    kinds_[a] = grid_->is_wall(a) ? BasisKind::neumann_cell : BasisKind::periodic;
  eig_ = mode_eigenvalues(*grid_, kinds_, grid_->shape(Stagger::cell()));
}

ScalarField PressureSolver::solve(const ScalarField& rhs) const {
  require_same_grid(grid_, rhs.grid(), "PressureSolver::solve");
  SpectralBlock b;
  b.shape = rhs.values().shape();
  b.data.assign(rhs.values().values().begin(), rhs.values().values().end());
  to_modes(*grid_, kinds_, b);
  b.data[0] = 0.0;
  for (std::size_t i = 1; i < b.data.size(); ++i) b.data[i] = -b.data[i] / eig_[i];
  from_modes(*grid_, kinds_, b);
  ScalarField phi(grid_, 0.0);
  std::copy(b.data.begin(), b.data.end(), phi.values().values().begin());
  return phi;
}

void PressureSolver::project(VectorField& v) const {
  const ScalarField phi = solve(divergence(v));
  v -= gradient(phi);
  v.enforce_wall_bc();
  v.mark_solenoidal(true);
}

VectorField PressureSolver::projected(const VectorField& v) const {
  VectorField out = v;
  project(out);
  return out;
}

VelocityPreconditioner::VelocityPreconditioner(GridPtr grid, const FluxCoefficient& c, double sigma,
                                               double extra)
    : grid_(std::move(grid)), sigma_(sigma) {
  const Grid& g = *grid_;
  const int dim = g.dim();
  const int w = g.wall_axis();

  if (w < 0) {
    double mean = 0.0;
    for (double x : c.cell.values()) mean += x;
    mean = mean / static_cast<double>(c.cell.size()) + extra;
    for (int d = 0; d < dim; ++d) {
      Component& cp = comp_[d];
      cp.kinds = velocity_basis_kinds(g, d);
      cp.full_eig = mode_eigenvalues(g, cp.kinds, g.shape(Stagger::face(d)));
      for (double& x : cp.full_eig) x = sigma_ + 0.5 * mean * x;
    }
    return;
  }

  const int n = g.cells(w);
  const double inv_h2 = 1.0 / (g.spacing(w) * g.spacing(w));
  // Plane averages of the coefficient at cell levels and at edge levels.
  auto level_mean = [&](const Array3& a) {
    const int levels = a.extent(w);
    std::vector<double> m(levels, 0.0);
    for_each_index(a.shape(), [&](int i, int j, int k) {
      const Index3 q{i, j, k};
      m[q[w]] += a(i, j, k);
    });
    const double plane = static_cast<double>(a.size()) / levels;
    for (double& x : m) x = x / plane + extra;
    return m;
  };
  const std::vector<double> cc = level_mean(c.cell);
  std::array<std::vector<double>, 3> ce;
  std::vector<double> ce_avg(n + 1, 0.0);
  for (int e = 0; e < w; ++e) {
    ce[e] = level_mean(c.edge[pair_slot(e, w)]);
    for (int m = 0; m <= n; ++m) ce_avg[m] += ce[e][m] / w;
  }

  for (int d = 0; d < dim; ++d) {
    Component& cp = comp_[d];
    cp.kinds = velocity_basis_kinds(g, d);
    Index3 hshape{1, 1, 1};
    for (int a = 0; a < w; ++a) hshape[a] = g.cells(a);
    cp.horizontal_eig.assign(static_cast<std::size_t>(hshape[0]) * hshape[1], 0.0);
    for (int j = 0; j < hshape[1]; ++j)
      for (int i = 0; i < hshape[0]; ++i) {
        double lam = axis_basis(BasisKind::periodic, hshape[0], g.spacing(0)).lambda(i);
        if (w == 2) lam += axis_basis(BasisKind::periodic, hshape[1], g.spacing(1)).lambda(j);
        cp.horizontal_eig[static_cast<std::size_t>(i) + static_cast<std::size_t>(hshape[0]) * j] = lam;
      }
    if (d != w) {
      const std::vector<double>& e = ce[d];
      cp.diag.resize(n);
      cp.lower.resize(n);
      cp.upper.resize(n);
      cp.line_coef = cc;
      for (int m = 0; m < n; ++m) {
        cp.lower[m] = -e[m] * inv_h2;
        cp.upper[m] = -e[m + 1] * inv_h2;
        cp.diag[m] = (e[m] + e[m + 1]) * inv_h2;
      }
      cp.diag[0] += e[0] * inv_h2;
      cp.diag[n - 1] += e[n] * inv_h2;
    } else {
      const int u = n - 1;
      cp.diag.resize(u);
      cp.lower.resize(u);
      cp.upper.resize(u);
      cp.line_coef.resize(u);
      for (int m = 1; m < n; ++m) {
        cp.lower[m - 1] = -cc[m - 1] * inv_h2;
        cp.upper[m - 1] = -cc[m] * inv_h2;
        cp.diag[m - 1] = (cc[m - 1] + cc[m]) * inv_h2;
        cp.line_coef[m - 1] = ce_avg[m];
      }
    }
  }
}

VectorField VelocityPreconditioner::apply(const VectorField& r) const {
  require_same_grid(grid_, r.grid(), "VelocityPreconditioner::apply");
  const Grid& g = *grid_;
  const int w = g.wall_axis();
  VectorField out(grid_);
  std::vector<double> line, a, b, c, work;
  for (int d = 0; d < g.dim(); ++d) {
    const Component& cp = comp_[d];
    SpectralBlock blk = extract_unknowns(g, d, r.component(d));
    if (w < 0) {
      to_modes(g, cp.kinds, blk);
      for (std::size_t i = 0; i < blk.data.size(); ++i) blk.data[i] /= cp.full_eig[i];
      from_modes(g, cp.kinds, blk);
    } else {
      for (int ax = 0; ax < w; ++ax)
        apply_along_axis(blk, ax, axis_basis(BasisKind::periodic, g.cells(ax), g.spacing(ax)).q.transpose());
      const std::size_t plane = cp.horizontal_eig.size();
      const std::size_t len = static_cast<std::size_t>(blk.shape[w]);
      line.resize(len);
      a.resize(len);
      b.resize(len);
      c.resize(len);
      for (std::size_t p = 0; p < plane; ++p) {
        const double lam = cp.horizontal_eig[p];
        for (std::size_t m = 0; m < len; ++m) {
          line[m] = blk.data[p + m * plane];
          a[m] = 0.5 * cp.lower[m];
          c[m] = 0.5 * cp.upper[m];
          b[m] = sigma_ + 0.5 * (cp.line_coef[m] * lam + cp.diag[m]);
        }
        thomas(line, a, b, c, work);
        for (std::size_t m = 0; m < len; ++m) blk.data[p + m * plane] = line[m];
      }
      for (int ax = 0; ax < w; ++ax)
        apply_along_axis(blk, ax, axis_basis(BasisKind::periodic, g.cells(ax), g.spacing(ax)).q);
    }
    scatter_unknowns(g, d, blk, out.component(d));
  }
  return out;
}

VectorField laplacian_power(const VectorField& v, double s) {
  const Grid& g = *v.grid();
  VectorField out(v.grid());
  for (int d = 0; d < g.dim(); ++d) {
    const auto kinds = velocity_basis_kinds(g, d);
    SpectralBlock blk = extract_unknowns(g, d, v.component(d));
    const std::vector<double> eig = mode_eigenvalues(g, kinds, blk.shape);
    to_modes(g, kinds, blk);
    for (std::size_t i = 0; i < blk.data.size(); ++i)
      blk.data[i] *= eig[i] > 0.0 ? std::pow(eig[i], s) : 0.0;
    from_modes(g, kinds, blk);
    scatter_unknowns(g, d, blk, out.component(d));
  }
  return out;
}

double laplacian_power_form(const VectorField& v, double s) {
  const Grid& g = *v.grid();
  double total = 0.0;
  for (int d = 0; d < g.dim(); ++d) {
    const auto kinds = velocity_basis_kinds(g, d);
    SpectralBlock blk = extract_unknowns(g, d, v.component(d));
    const std::vector<double> eig = mode_eigenvalues(g, kinds, blk.shape);
    to_modes(g, kinds, blk);
    double scale = 0.0;
    for (double x : blk.data) scale = std::max(scale, std::abs(x));
    for (std::size_t i = 0; i < blk.data.size(); ++i) {
      if (eig[i] > 0.0) {
        total += std::pow(eig[i], s) * blk.data[i] * blk.data[i];
      } else if (s < 0.0 && std::abs(blk.data[i]) > 1e-12 * scale) {
        return std::numeric_limits<double>::infinity();
      }
    }
  }
  return total * g.cell_volume();
}

}  // namespace kvflow
