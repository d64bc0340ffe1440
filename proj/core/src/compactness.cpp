#include "kvflow/compactness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kvflow/energy.hpp"
#include "kvflow/flow_solver.hpp"
#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"

namespace kvflow {

namespace {

struct MemberRun {
  std::vector<VectorField> v;
  double i_one = 0.0;
  double i_bump = 0.0;
  double weighted = 0.0;
};

GridPtr plan_grid(const CompactnessPlan& plan) {
  return build_grid(GridSpec::channel2d(1.0, 1.0, plan.cells, plan.cells));
}

ScalarField shape_of_ell(const ScalarField& ell) {
  ScalarField s = ell;
  const double top = ell.max();
  if (top > 0.0)
    for (double& x : s.values().values()) x /= top;
  return s;
}

MemberRun run_member(const CompactnessPlan& plan, const GridPtr& grid, const ScalarField& nu_t,
                     const ScalarField& bump) {
  PhysicsConfig phys;
  phys.nu = plan.nu;
  phys.alpha = plan.alpha;
  phys.profile = plan.profile;
  phys.forcing = Forcing::uniform(grid, plan.forcing);
  phys.eddy_bound = compactness_bound(plan) * (1.0 + 1e-12);
  SchemeConfig sch;
  sch.dt = plan.dt;
  sch.t_end = plan.t_end;
  const FlowSolver solver(grid, phys, sch);

  MemberRun run;
  State s = solver.initial_state(smooth_random_field(grid, plan.seed));
  EnergyLedger ledger = start_ledger(solver, s);
  run.v.push_back(s.v);
  const double vol = grid->cell_volume();
  const auto nv = nu_t.values().values();
  const auto bv = bump.values().values();
  for (std::int64_t i = 0; i < sch.step_count(); ++i) {
    State next = solver.step(s, &nu_t);
    energy_update(ledger, solver, s, next, &nu_t);
    VectorField mid = s.v;
    mid += next.v;
    mid *= 0.5;
    const ScalarField d2 = deformation(mid).frobenius_squared_at_cells();
    const auto dv = d2.values().values();
    double one = 0.0, bumped = 0.0;
    for (std::size_t c = 0; c < dv.size(); ++c) {
      one += nv[c] * dv[c];
      bumped += nv[c] * dv[c] * bv[c];
    }
    run.i_one += plan.dt * vol * one;
    run.i_bump += plan.dt * vol * bumped;
    const double t_mid = s.t + 0.5 * plan.dt;
    run.weighted += plan.dt * (plan.t_end - t_mid) * solver.dissipation_rate(mid, &nu_t);
    s = std::move(next);
    run.v.push_back(s.v);
  }
  if (ledger.max_step_residual() > 10.0 * sch.tol_picard)
    throw std::runtime_error("energy_identity: per-step residual " + std::to_string(ledger.max_step_residual()));
  return run;
}

double trajectory_distance(const std::vector<VectorField>& a, const std::vector<VectorField>& b, double dt) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    VectorField d = a[i];
    d -= b[i];
    const double w = (i == 0 || i + 1 == a.size()) ? 0.5 : 1.0;
    s += w * dt * dot(d, d);
  }
  return std::sqrt(s);
}

double ratio(double last, double first) {
  if (first == 0.0) return last == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return last / first;
}

}  // namespace

std::string to_string(PerturbationFamily family) {
  switch (family) {
    case PerturbationFamily::identical: return "identical";
    case PerturbationFamily::amplitude_decay: return "amplitude_decay";
    case PerturbationFamily::shrinking_support: return "shrinking_support";
    case PerturbationFamily::oscillatory_decay: return "oscillatory_decay";
  }
  return "identical";
}

PerturbationFamily perturbation_family_from_string(const std::string& name) {
  for (PerturbationFamily f : {PerturbationFamily::identical, PerturbationFamily::amplitude_decay,
                               PerturbationFamily::shrinking_support, PerturbationFamily::oscillatory_decay})
    if (to_string(f) == name) return f;
  throw std::invalid_argument("compactness.family: unknown family '" + name + "'");
}

void CompactnessPlan::validate() const {
  if (n_list.empty()) throw std::invalid_argument("compactness.n_list: must not be empty");
  for (int n : n_list)
    if (n < 1) throw std::invalid_argument("compactness.n_list: entries must be at least 1");
  if (cells < 4) throw std::invalid_argument("compactness.cells: must be at least 4");
  if (!(base_scale >= 0.0)) throw std::invalid_argument("compactness.base_scale: must be nonnegative");
  if (!(perturbation >= 0.0)) throw std::invalid_argument("compactness.perturbation: must be nonnegative");
  if (!(dt > 0.0) || !(t_end >= dt)) throw std::invalid_argument("compactness.dt: needs 0 < dt <= t_end");
}

double compactness_bound(const CompactnessPlan& plan) {
  switch (plan.family) {
    case PerturbationFamily::identical: return plan.base_scale;
    case PerturbationFamily::amplitude_decay:
    case PerturbationFamily::shrinking_support: return plan.base_scale + plan.perturbation;
    case PerturbationFamily::oscillatory_decay: return 2.0 * plan.base_scale;
  }
  return plan.base_scale;
}

ScalarField perturbed_viscosity(const CompactnessPlan& plan, const GridPtr& grid, int n) {
  if (n < 1) throw std::invalid_argument("perturbed_viscosity: n must be at least 1");
  const ScalarField shape = shape_of_ell(eval_mixing_length(plan.profile, grid));
  ScalarField out = shape;
  const Array3& sv = shape.values();
  Array3& ov = out.values();
  const double lx = grid->extent(0);
  for_each_index(ov.shape(), [&](int i, int j, int k) {
    const double x = grid->coordinate(Stagger::cell(), 0, i);
    const double base = plan.base_scale * sv(i, j, k);
    double value = base;
    switch (plan.family) {
      case PerturbationFamily::identical: break;
      case PerturbationFamily::amplitude_decay:
        value += plan.perturbation * sv(i, j, k) * 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * x / lx)) / n;
        break;
      case PerturbationFamily::shrinking_support:
        if (x < lx / n) value += plan.perturbation * sv(i, j, k);
        break;
      case PerturbationFamily::oscillatory_decay:
        value *= 1.0 + std::sin(2.0 * std::numbers::pi * n * x / lx) / n;
        break;
    }
    ov(i, j, k) = value;
  });
  return out;
}

CompactnessReport run_compactness(const CompactnessPlan& plan) {
  plan.validate();
  const GridPtr grid = plan_grid(plan);
  CompactnessReport rep;
  rep.bound = compactness_bound(plan);

  ScalarField bump(grid, 0.0);
  const int axis = grid->dim() - 1;
  for_each_index(bump.values().shape(), [&](int i, int j, int k) {
    const Index3 q{i, j, k};
    const double x = grid->coordinate(Stagger::cell(), 0, i) / grid->extent(0);
    const double z = grid->coordinate(Stagger::cell(), axis, q[axis]) / grid->extent(axis);
    bump(i, j, k) = std::pow(std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * z), 2);
  });

  CompactnessPlan limit_plan = plan;
  limit_plan.family = PerturbationFamily::identical;
  const ScalarField nu_limit = perturbed_viscosity(limit_plan, grid, 1);

  // Members are independent; results are keyed by position in n_list.
  auto launch = [&](const ScalarField& nu_t) {
    return std::async(std::launch::async, [&plan, &grid, &bump, nu_t] { return run_member(plan, grid, nu_t, bump); });
  };
  std::future<MemberRun> limit_future = launch(nu_limit);
  std::vector<std::future<MemberRun>> futures;
  for (int n : plan.n_list) futures.push_back(launch(perturbed_viscosity(plan, grid, n)));

  const MemberRun limit = limit_future.get();
  rep.weighted_limit = limit.weighted;
  for (std::size_t i = 0; i < plan.n_list.size(); ++i) {
    MemberRun run;
    try {
      run = futures[i].get();
    } catch (const std::exception& e) {
      throw std::runtime_error("compactness: member n=" + std::to_string(plan.n_list[i]) + " failed: " + e.what());
    }
    CompactnessRow row;
    row.n = plan.n_list[i];
    row.m_one = std::abs(run.i_one - limit.i_one);
    row.m_bump = std::abs(run.i_bump - limit.i_bump);
    row.w = trajectory_distance(run.v, limit.v, plan.dt);
    row.weighted = run.weighted;
    rep.rows.push_back(row);
  }

  auto check = [&](auto metric, double& out_ratio) {
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      if (metric(rep.rows[i]) > (1.0 + plan.wiggle) * metric(rep.rows[i - 1])) rep.monotone = false;
    out_ratio = ratio(metric(rep.rows.back()), metric(rep.rows.front()));
    if (!(out_ratio <= plan.final_ratio)) rep.ratio_ok = false;
  };
  check([](const CompactnessRow& r) { return r.m_one; }, rep.ratio_m_one);
  check([](const CompactnessRow& r) { return r.m_bump; }, rep.ratio_m_bump);
  check([](const CompactnessRow& r) { return r.w; }, rep.ratio_w);
  return rep;
}

}  // namespace kvflow
