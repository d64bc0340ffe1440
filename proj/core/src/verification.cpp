#include "kvflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "kvflow/advection.hpp"
#include "kvflow/flow_solver.hpp"
#include "kvflow/mixing_length.hpp"
#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"
#include "kvflow/spectral.hpp"

namespace kvflow {

namespace {

ScalarField random_scalar(const GridPtr& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField p(grid, 0.0);
  for (double& x : p.values().values()) x = u(rng);
  return p;
}

TensorField random_tensor(const GridPtr& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TensorField t(grid);
  for (int a = 0; a < grid->dim(); ++a)
    for (int b = a; b < grid->dim(); ++b)
      for (double& x : t.entry(a, b).values()) x = u(rng);
  return t;
}

double relative_gap(double a, double b, double scale) { return std::abs(a - b) / std::max(scale, 1e-300); }

VerifyItem item(std::string name, double value, double limit) {
  return {std::move(name), value, limit, std::isfinite(value) && value <= limit};
}

}  // namespace

ReduceNsvReport reduce_nsv_check(const ReduceNsvConfig& cfg) {
  const GridPtr grid = build_grid(GridSpec::box2d(1.0, 1.0, cfg.cells, cfg.cells));
  auto make = [&](VoigtForm form) {
    PhysicsConfig phys;
    phys.nu = cfg.nu;
    phys.alpha = cfg.alpha;
    phys.profile = MixingLengthProfile::constant_length(2.0 * cfg.alpha);
    phys.voigt_form = form;
    phys.forcing = Forcing::constant(smooth_random_field(grid, cfg.seed + 1));
    SchemeConfig sch;
    sch.dt = cfg.dt;
    sch.t_end = cfg.dt * cfg.steps;
    sch.tol_picard = 1e-14;
    return FlowSolver(grid, phys, sch);
  };
  const FlowSolver general = make(VoigtForm::deformation);
  const FlowSolver classical = make(VoigtForm::laplacian);
  const VectorField v0 = smooth_random_field(grid, cfg.seed);
  State a = general.initial_state(v0);
  State b = classical.initial_state(v0);

  ReduceNsvReport rep;
  for (int i = 0; i < cfg.steps; ++i) {
    a = general.step(a);
    b = classical.step(b);
    VectorField d = a.v;
    d -= b.v;
    rep.max_diff = std::max(rep.max_diff, norm(d));
    ++rep.steps;
  }
  rep.final_energy = general.energy(a.v);
  rep.passed = rep.max_diff <= cfg.tolerance;
  return rep;
}

bool VerifyReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const VerifyItem& i) { return i.passed; });
}

VerifyReport verify_suite(const VerifyConfig& cfg) {
  VerifyReport rep;
  const GridPtr coarse = build_grid(GridSpec::channel2d(1.0, 1.0, cfg.coarse, cfg.coarse));
  const GridPtr fine = build_grid(GridSpec::channel2d(1.0, 1.0, cfg.fine, cfg.fine));

  const VectorField v = smooth_random_field(coarse, cfg.seed);
  const VectorField w = smooth_random_field(coarse, cfg.seed + 1);
  const ScalarField p = random_scalar(coarse, cfg.seed + 2);
  const TensorField s = random_tensor(coarse, cfg.seed + 3);

  const double gd = dot(gradient(p), v), pd = -dot(p, divergence(v));
  rep.items.push_back(item("adjoint_grad_div", relative_gap(gd, pd, norm(gradient(p)) * norm(v)), 1e-12));
  const double td = dot(divergence(s), v), sd = -tensor_dot(s, deformation(v));
  rep.items.push_back(
      item("adjoint_div_deformation", relative_gap(td, sd, std::sqrt(tensor_dot(s, s)) * norm(v)), 1e-12));

  const PressureSolver ps(coarse);
  VectorField pv = w;
  pv += gradient(p);
  ps.project(pv);
  rep.items.push_back(item("projection_divergence", max_divergence(pv), SchemeConfig{}.tol_proj));

  const VectorField a = advect(pv, v);
  rep.items.push_back(item("advection_skew", std::abs(dot(a, v)) / (norm(a) * norm(v)), 1e-12));

  rep.korn_coarse = korn_check(cfg.samples, coarse, cfg.seed).worst_ratio;
  rep.korn_fine = korn_check(cfg.samples, fine, cfg.seed).worst_ratio;
  rep.items.push_back(item("korn_refinement", relative_gap(rep.korn_fine, rep.korn_coarse, rep.korn_coarse),
                           cfg.stability));

  const MixingLengthProfile profile = MixingLengthProfile::van_driest();
  rep.h_half_coarse =
      h_half_estimate_check(cfg.samples, coarse, eval_mixing_length(profile, coarse), cfg.seed).worst_ratio;
  rep.h_half_fine = h_half_estimate_check(cfg.samples, fine, eval_mixing_length(profile, fine), cfg.seed).worst_ratio;
  rep.items.push_back(item("h_half_refinement",
                           relative_gap(rep.h_half_fine, rep.h_half_coarse, rep.h_half_coarse), cfg.stability));
  return rep;
}

}  // namespace kvflow
