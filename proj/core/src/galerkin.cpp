#include "kvflow/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "kvflow/energy.hpp"
#include "kvflow/flow_solver.hpp"
#include "kvflow/mixing_length.hpp"

namespace kvflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ModeGeometry {
  double kx, kz;
  double px, pz;  // k_perp / |k|
  double amp;
};

ModeGeometry geometry(const GalerkinMode& mode, const std::array<double, 2>& ext) {
  ModeGeometry g;
  g.kx = kTwoPi * mode.m[0] / ext[0];
  g.kz = kTwoPi * mode.m[1] / ext[1];
  const double kk = std::hypot(g.kx, g.kz);
  g.px = -g.kz / kk;
  g.pz = g.kx / kk;
  g.amp = std::sqrt(2.0 / (ext[0] * ext[1]));
  return g;
}

/// Value, and derivative of the profile, of cos or sin at theta.
std::pair<double, double> profile(bool sine, double theta) {
  return sine ? std::pair{std::sin(theta), std::cos(theta)} : std::pair{std::cos(theta), -std::sin(theta)};
}

}  // namespace

std::vector<GalerkinMode> galerkin_modes(int n) {
  if (n < 1) throw std::invalid_argument("galerkin.n: must be at least 1");
  const int r = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))) + 2;
  std::vector<std::array<int, 2>> waves;
  for (int m1 = 0; m1 <= r; ++m1)
    for (int m2 = -r; m2 <= r; ++m2)
      if (m1 > 0 || m2 > 0) waves.push_back({m1, m2});
  std::sort(waves.begin(), waves.end(), [](const auto& a, const auto& b) {
    const int na = a[0] * a[0] + a[1] * a[1];
    const int nb = b[0] * b[0] + b[1] * b[1];
    return std::tie(na, a[0], a[1]) < std::tie(nb, b[0], b[1]);
  });
  std::vector<GalerkinMode> out;
  for (const auto& w : waves) {
    for (bool sine : {false, true}) {
      if (static_cast<int>(out.size()) == n) return out;
      out.push_back({w, sine});
    }
  }
  return out;
}

std::array<double, 2> GalerkinSystem::basis(int j, double x, double z) const {
  const ModeGeometry g = geometry(modes[j], extents);
  const double phi = profile(modes[j].sine, g.kx * x + g.kz * z).first;
  return {g.amp * g.px * phi, g.amp * g.pz * phi};
}

Eigen::VectorXd GalerkinSystem::nonlinear(const Eigen::VectorXd& c) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (c[j] == 0.0) continue;
    for (int l = 0; l < n; ++l) {
      const double cjl = c[j] * c[l];
      if (cjl == 0.0) continue;
      const double* row = &gamma[(static_cast<std::size_t>(j) * n + l) * n];
      for (int m = 0; m < n; ++m) out[m] += cjl * row[m];
    }
  }
  return out;
}

double GalerkinSystem::energy(const Eigen::VectorXd& c) const { return 0.5 * (c.squaredNorm() + c.dot(a * c)); }

VectorField GalerkinSystem::to_grid(const Eigen::VectorXd& c, const GridPtr& grid) const {
  if (grid->dim() != 2 || grid->is_channel())
    throw std::invalid_argument("galerkin: the grid must be a 2D periodic box");
  return VectorField::sample(grid, [&](int d, const std::array<double, 3>& x) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += c[j] * basis(j, x[0], x[1])[d];
    return s;
  });
}

GalerkinSystem build_galerkin(const GalerkinConfig& cfg) {
  if (!(cfg.nu > 0.0)) throw std::invalid_argument("galerkin.nu: must be positive");
  if (!(cfg.alpha >= 0.0)) throw std::invalid_argument("galerkin.alpha: must be nonnegative");
  GalerkinSystem sys;
  sys.n = cfg.n;
  sys.extents = cfg.extents;
  sys.modes = galerkin_modes(cfg.n);
  const int n = cfg.n;

  int mmax = 0;
  for (const GalerkinMode& m : sys.modes) mmax = std::max({mmax, std::abs(m.m[0]), std::abs(m.m[1])});
  const int q = cfg.quadrature > 0 ? cfg.quadrature : std::max(32, 6 * mmax + 16);
  const auto nq = static_cast<std::size_t>(q) * q;
  const double w = cfg.extents[0] * cfg.extents[1] / static_cast<double>(nq);

  // Values, gradients and deformations of every mode at every node.
  std::vector<double> vx(n * nq), vz(n * nq);
  std::vector<double> gxx(n * nq), gxz(n * nq), gzx(n * nq), gzz(n * nq);
  std::vector<double> ell(nq), fx(nq, 0.0), fz(nq, 0.0);
  for (int iz = 0; iz < q; ++iz)
    for (int ix = 0; ix < q; ++ix) {
      const std::size_t p = static_cast<std::size_t>(iz) * q + ix;
      const double x = (ix + 0.5) * cfg.extents[0] / q;
      const double z = (iz + 0.5) * cfg.extents[1] / q;
      ell[p] = cfg.ell(x, z);
      if (ell[p] < 0.0) throw std::invalid_argument("galerkin.ell: must be nonnegative");
      if (cfg.forcing) {
        const std::array<double, 2> fv = cfg.forcing(x, z);
        fx[p] = fv[0];
        fz[p] = fv[1];
      }
      for (int j = 0; j < n; ++j) {
        const ModeGeometry g = geometry(sys.modes[j], cfg.extents);
        const auto [phi, dphi] = profile(sys.modes[j].sine, g.kx * x + g.kz * z);
        const std::size_t o = static_cast<std::size_t>(j) * nq + p;
        vx[o] = g.amp * g.px * phi;
        vz[o] = g.amp * g.pz * phi;
        // d psi_d / d x_e
        gxx[o] = g.amp * g.px * dphi * g.kx;
        gxz[o] = g.amp * g.px * dphi * g.kz;
        gzx[o] = g.amp * g.pz * dphi * g.kx;
        gzz[o] = g.amp * g.pz * dphi * g.kz;
      }
    }

  sys.a = Eigen::MatrixXd::Zero(n, n);
  sys.b = Eigen::MatrixXd::Zero(n, n);
  sys.f = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j)
    for (int m = j; m < n; ++m) {
      double dd = 0.0, ld = 0.0;
      for (std::size_t p = 0; p < nq; ++p) {
        const std::size_t oj = static_cast<std::size_t>(j) * nq + p;
        const std::size_t om = static_cast<std::size_t>(m) * nq + p;
        const double sxz_j = 0.5 * (gxz[oj] + gzx[oj]);
        const double sxz_m = 0.5 * (gxz[om] + gzx[om]);
        const double prod = gxx[oj] * gxx[om] + gzz[oj] * gzz[om] + 2.0 * sxz_j * sxz_m;
        dd += prod;
        ld += ell[p] * prod;
      }
      sys.a(j, m) = sys.a(m, j) = cfg.alpha * ld * w;
      sys.b(j, m) = sys.b(m, j) = 2.0 * cfg.nu * dd * w;
    }
  for (int m = 0; m < n; ++m) {
    double s = 0.0;
    for (std::size_t p = 0; p < nq; ++p) {
      const std::size_t o = static_cast<std::size_t>(m) * nq + p;
      s += fx[p] * vx[o] + fz[p] * vz[o];
    }
    sys.f[m] = s * w;
  }

  sys.gamma.assign(static_cast<std::size_t>(n) * n * n, 0.0);
  std::vector<double> adv_x(nq), adv_z(nq);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      for (std::size_t p = 0; p < nq; ++p) {
        const std::size_t oj = static_cast<std::size_t>(j) * nq + p;
        const std::size_t ol = static_cast<std::size_t>(l) * nq + p;
        adv_x[p] = vx[oj] * gxx[ol] + vz[oj] * gxz[ol];
        adv_z[p] = vx[oj] * gzx[ol] + vz[oj] * gzz[ol];
      }
      for (int m = 0; m < n; ++m) {
        double s = 0.0;
        for (std::size_t p = 0; p < nq; ++p) {
          const std::size_t om = static_cast<std::size_t>(m) * nq + p;
          s += adv_x[p] * vx[om] + adv_z[p] * vz[om];
        }
        sys.gamma[(static_cast<std::size_t>(j) * n + l) * n + m] = s * w;
      }
    }
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m)
        sys.skew_defect = std::max(sys.skew_defect, std::abs(sys.gamma_at(j, l, m) + sys.gamma_at(j, m, l)));

  const Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd::Identity(n, n) + sys.a);
  if (llt.info() != Eigen::Success) throw std::runtime_error("galerkin_spd: Cholesky of I + A failed");
  return sys;
}

GalerkinTrajectory integrate_galerkin(const GalerkinSystem& sys, const Eigen::VectorXd& c0,
                                      const GalerkinIntegration& opts) {
  if (c0.size() != sys.n) throw std::invalid_argument("integrate_galerkin: c0 has the wrong size");
  if (!c0.allFinite()) throw std::invalid_argument("integrate_galerkin: c0 must be finite");
  if (!(opts.dt > 0.0)) throw std::invalid_argument("integrate_galerkin: dt must be positive");
  const Eigen::LLT<Eigen::MatrixXd> mass(Eigen::MatrixXd::Identity(sys.n, sys.n) + sys.a);
  if (mass.info() != Eigen::Success) throw std::runtime_error("galerkin_spd: Cholesky of I + A failed");

  GalerkinTrajectory tr;
  const auto steps = static_cast<int>(std::llround(opts.t_end / opts.dt));
  Eigen::VectorXd c = c0;
  tr.t.push_back(0.0);
  tr.c.push_back(c);
  tr.energy.push_back(sys.energy(c));
  for (int s = 0; s < steps; ++s) {
    Eigen::VectorXd next = c;
    bool converged = false;
    int it = 1;
    for (; it <= opts.max_iter; ++it) {
      const Eigen::VectorXd mid = 0.5 * (c + next);
      Eigen::VectorXd rhs = sys.f - sys.b * mid;
      if (!opts.linear) rhs -= sys.nonlinear(mid);
      const Eigen::VectorXd updated = c + opts.dt * mass.solve(rhs);
      const double change = (updated - next).norm() / std::max(1.0, updated.norm());
      next = updated;
      if (it >= 2 && change <= opts.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) throw ConvergenceError("Galerkin Picard iteration did not converge", opts.max_iter, 0.0);
    tr.max_picard = std::max(tr.max_picard, it);
    const Eigen::VectorXd mid = 0.5 * (c + next);
    const double e_new = sys.energy(next);
    tr.step_residual.push_back(e_new - tr.energy.back() + opts.dt * mid.dot(sys.b * mid) -
                               opts.dt * mid.dot(sys.f));
    c = next;
    tr.t.push_back((s + 1) * opts.dt);
    tr.c.push_back(c);
    tr.energy.push_back(e_new);
  }
  return tr;
}

namespace {

struct GridRun {
  std::vector<double> energy;
  double max_residual = 0.0;
};

GridRun run_grid(const GalerkinSystem& sys, const Eigen::VectorXd& c0, const GalerkinAgreementConfig& cfg,
                 int cells, const PlaneVector& forcing) {
  const GridPtr grid = build_grid(GridSpec::box2d(sys.extents[0], sys.extents[1], cells, cells));
  std::vector<double> table(2049);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double z = sys.extents[1] * static_cast<double>(i) / static_cast<double>(table.size() - 1);
    table[i] = cfg.ell0 * (1.0 + cfg.ell_amp * std::cos(kTwoPi * z / sys.extents[1]));
  }
  PhysicsConfig phys;
  phys.nu = cfg.nu;
  phys.alpha = cfg.alpha;
  phys.profile = MixingLengthProfile::tabulated(table);
  phys.forcing = Forcing::constant(
      VectorField::sample(grid, [&](int d, const std::array<double, 3>& x) { return forcing(x[0], x[1])[d]; }));
  SchemeConfig sch;
  sch.dt = cfg.dt;
  sch.t_end = cfg.t_end;
  const FlowSolver solver(grid, phys, sch);
  State s = solver.initial_state(sys.to_grid(c0, grid));
  EnergyLedger ledger = start_ledger(solver, s);
  for (std::int64_t i = 0; i < sch.step_count(); ++i) {
    State next = solver.step(s);
    energy_update(ledger, solver, s, next);
    s = std::move(next);
  }
  GridRun run;
  for (const LedgerEntry& e : ledger.entries) run.energy.push_back(e.energy);
  run.max_residual = std::max(ledger.max_step_residual(), ledger.back().balance_residual);
  return run;
}

}  // namespace

GalerkinAgreementReport galerkin_agreement(const GalerkinAgreementConfig& cfg) {
  if (cfg.n_ref < cfg.n) throw std::invalid_argument("galerkin.n_ref: must be at least galerkin.n");
  if (cfg.grid_cells < 8 || cfg.grid_cells % 2 != 0)
    throw std::invalid_argument("galerkin.grid_cells: must be even and at least 8");
  GalerkinConfig gc;
  gc.nu = cfg.nu;
  gc.alpha = cfg.alpha;
  const double lz = gc.extents[1];
  gc.ell = [&cfg, lz](double, double z) { return cfg.ell0 * (1.0 + cfg.ell_amp * std::cos(kTwoPi * z / lz)); };

  // Forcing and initial data live in the span of the small basis.
  gc.n = cfg.n;
  const std::vector<GalerkinMode> small = galerkin_modes(cfg.n);
  GalerkinSystem probe;
  probe.n = cfg.n;
  probe.modes = small;
  const std::array<double, 2> f_coef{0.4, 0.25};
  const PlaneVector forcing = [probe, f_coef](double x, double z) {
    const auto a = probe.basis(0, x, z);
    const auto b = probe.basis(std::min(3, probe.n - 1), x, z);
    return std::array<double, 2>{f_coef[0] * a[0] + f_coef[1] * b[0], f_coef[0] * a[1] + f_coef[1] * b[1]};
  };
  gc.forcing = forcing;

  GalerkinAgreementReport rep;
  const GalerkinSystem sys = build_galerkin(gc);
  gc.n = cfg.n_ref;
  const GalerkinSystem ref = build_galerkin(gc);
  rep.spd_ok = true;
  rep.skew_defect = std::max(sys.skew_defect, ref.skew_defect);

  Eigen::VectorXd c0(cfg.n);
  for (int j = 0; j < cfg.n; ++j) c0[j] = 0.5 * ((j % 2 == 0) ? 1.0 : -1.0) / (1.0 + j);
  Eigen::VectorXd c0_ref = Eigen::VectorXd::Zero(cfg.n_ref);
  c0_ref.head(cfg.n) = c0;

  GalerkinIntegration gi;
  gi.t_end = cfg.t_end;
  gi.dt = cfg.dt;
  const GalerkinTrajectory gal = integrate_galerkin(sys, c0, gi);
  const GalerkinTrajectory gal_ref = integrate_galerkin(ref, c0_ref, gi);
  gi.dt = 2.0 * cfg.dt;
  const GalerkinTrajectory gal_ref_coarse = integrate_galerkin(ref, c0_ref, gi);

  const GridRun fine = run_grid(sys, c0, cfg, cfg.grid_cells, forcing);
  const GridRun coarse = run_grid(sys, c0, cfg, cfg.grid_cells / 2, forcing);

  double time_est = 0.0;
  for (std::size_t i = 0; i < gal_ref_coarse.energy.size() && 2 * i < gal_ref.energy.size(); ++i)
    time_est = std::max(time_est, std::abs(gal_ref.energy[2 * i] - gal_ref_coarse.energy[i]));
  for (double r : gal.step_residual) rep.galerkin_residual += std::abs(r);
  rep.grid_residual = fine.max_residual;

  const std::size_t ns = std::min(gal.energy.size(), fine.energy.size());
  rep.agree = true;
  for (std::size_t i = 0; i < ns; ++i) {
    rep.t.push_back(gal.t[i]);
    rep.e_galerkin.push_back(gal.energy[i]);
    rep.e_grid.push_back(fine.energy[i]);
    const double bound = rep.galerkin_residual + rep.grid_residual +
                         3.0 * std::abs(fine.energy[i] - coarse.energy[i]) + 3.0 * time_est +
                         3.0 * std::abs(gal.energy[i] - gal_ref.energy[i]);
    rep.bound.push_back(bound);
    const double gap = std::abs(gal.energy[i] - fine.energy[i]);
    rep.max_gap = std::max(rep.max_gap, gap);
    if (bound > 0.0) rep.max_ratio = std::max(rep.max_ratio, gap / bound);
    if (gap > bound) rep.agree = false;
  }
  return rep;
}

}  // namespace kvflow
