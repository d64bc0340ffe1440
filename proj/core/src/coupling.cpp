#include "kvflow/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kvflow/operators.hpp"

namespace kvflow {

namespace {

double sq_distance(const VectorField& a, const VectorField& b) {
  VectorField d = a;
  d -= b;
  return dot(d, d);
}

double sq_distance(const ScalarField& a, const ScalarField& b) {
  ScalarField d = a;
  auto dv = d.values().values();
  const auto bv = b.values().values();
  for (std::size_t i = 0; i < dv.size(); ++i) dv[i] -= bv[i];
  return dot(d, d);
}

VectorField midpoint(const VectorField& a, const VectorField& b) {
  VectorField m = a;
  m += b;
  m *= 0.5;
  return m;
}

}  // namespace

std::string to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::picard: return "picard";
    case CouplingMode::paper_lagged: return "paper_lagged";
    case CouplingMode::frozen_k: return "frozen_k";
  }
  return "picard";
}

CouplingMode coupling_mode_from_string(const std::string& name) {
  if (name == "picard") return CouplingMode::picard;
  if (name == "paper_lagged") return CouplingMode::paper_lagged;
  if (name == "frozen_k") return CouplingMode::frozen_k;
  throw std::invalid_argument("scheme.coupling: expected 'picard', 'paper_lagged' or 'frozen_k', got '" + name +
                              "'");
}

void CouplingConfig::validate() const {
  if (!(tol_couple > 0.0)) throw std::invalid_argument("scheme.tol_couple: must be positive");
  if (max_couple_iters < 1) throw std::invalid_argument("scheme.max_couple_iters: must be at least 1");
}

CoupledSolver::CoupledSolver(FlowSolver flow, TkeConfig tke, CouplingConfig coupling)
    : flow_(std::move(flow)), tke_(tke), coupling_(coupling) {
  tke_.validate();
  coupling_.validate();
  if (flow_.physics().eddy_viscosity)
    throw std::invalid_argument("physics.eddy_viscosity: a coupled run derives nu_t from k");
}

ScalarField CoupledSolver::eddy_viscosity(const ScalarField& k) const {
  return kvflow::eddy_viscosity(k, mixing_length(), tke_.n_visc);
}

ScalarField CoupledSolver::k_midpoint(const ScalarField& a, const ScalarField& b) const {
  ScalarField m = a;
  auto mv = m.values().values();
  const auto bv = b.values().values();
  for (std::size_t i = 0; i < mv.size(); ++i) mv[i] = 0.5 * (mv[i] + bv[i]);
  return m;
}

CoupledState CoupledSolver::initial_state(const VectorField& v0, const ScalarField& k0) const {
  require_same_grid(flow_.grid(), k0.grid(), "CoupledSolver::initial_state");
  if (k0.min() < 0.0) throw std::invalid_argument("initial_state: k0 must be nonnegative");
  CoupledState cs;
  cs.flow = flow_.initial_state(v0);
  cs.k = make_k_field(flow_.grid());
  const auto in = k0.values().values();
  auto out = cs.k.values().values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = truncate(in[i], tke_.n_src);
  return cs;
}

CoupledState CoupledSolver::step(const CoupledState& cs, CoupledStepReport* report) const {
  const double dt = flow_.scheme().dt;
  const ScalarField& ell = mixing_length();
  CoupledStepReport rep;
  CoupledState out;

  switch (coupling_.mode) {
    case CouplingMode::frozen_k: {
      rep.nu_t = eddy_viscosity(cs.k);
      out.flow = flow_.step(cs.flow, &rep.nu_t, &rep.flow);
      out.k = cs.k;
      out.picard_iters = 1;
      rep.tke.total_before = rep.tke.total_after = cs.k.integral();
      break;
    }
    case CouplingMode::paper_lagged: {
      const TensorField dv = deformation(cs.flow.v);
      out.k = tke_step(cs.k, cs.flow.v, dv, ell, tke_, dt, &rep.tke);
      rep.nu_t = eddy_viscosity(k_midpoint(cs.k, out.k));
      out.flow = flow_.step(cs.flow, &rep.nu_t, &rep.flow);
      out.picard_iters = 1;
      break;
    }
    case CouplingMode::picard: {
      ScalarField k_guess = cs.k;
      bool have_prev = false;
      out.converged = false;
      for (int j = 1; j <= coupling_.max_couple_iters; ++j) {
        CoupledStepReport trial;
        trial.nu_t = eddy_viscosity(k_midpoint(cs.k, k_guess));
        State next = flow_.step(cs.flow, &trial.nu_t, &trial.flow);
        const VectorField vm = midpoint(cs.flow.v, next.v);
        ScalarField k_next = tke_step(cs.k, vm, deformation(vm), ell, tke_, dt, &trial.tke);

        double residual = 0.0;
        if (have_prev) {
          const double change = std::sqrt(sq_distance(next.v, out.flow.v) + sq_distance(k_next, out.k));
          const double size = std::sqrt(dot(next.v, next.v) + dot(k_next, k_next));
          residual = change / std::max(1.0, size);
        }
        out.flow = std::move(next);
        out.k = std::move(k_next);
        out.picard_iters = j;
        out.picard_residual = have_prev ? residual : 0.0;
        rep = std::move(trial);
        if (have_prev && residual <= coupling_.tol_couple) {
          out.converged = true;
          break;
        }
        have_prev = true;
        k_guess = out.k;
      }
      break;
    }
  }
  rep.transfer = transfer_monitor(rep.tke);
  if (report) *report = std::move(rep);
  return out;
}

TensorField reynolds_stress(const VectorField& v_t, const TensorField& dv, const ScalarField& k, double alpha,
                            const ScalarField& ell, const ScalarField& nu_t) {
  const GridPtr& grid = dv.grid();
  require_same_grid(grid, v_t.grid(), "reynolds_stress");
  require_same_grid(grid, k.grid(), "reynolds_stress");
  require_same_grid(grid, ell.grid(), "reynolds_stress");
  require_same_grid(grid, nu_t.grid(), "reynolds_stress");
  const TensorField dvt = deformation(v_t);
  const FluxCoefficient lf = sample_flux_points(ell);
  const FluxCoefficient nf = sample_flux_points(nu_t);
  const int dim = grid->dim();
  const double iso = 2.0 / dim;

  TensorField r(grid);
  for (int a = 0; a < dim; ++a) {
    const auto rt = dvt.diag(a).values();
    const auto rv = dv.diag(a).values();
    const auto kv = k.values().values();
    const auto lv = lf.cell.values();
    const auto nv = nf.cell.values();
    auto out = r.diag(a).values();
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = -alpha * lv[i] * rt[i] - nv[i] * rv[i] + iso * kv[i];
    for (int b = a + 1; b < dim; ++b) {
      const int slot = pair_slot(a, b);
      const auto et = dvt.off(a, b).values();
      const auto ev = dv.off(a, b).values();
      const auto le = lf.edge[slot].values();
      const auto ne = nf.edge[slot].values();
      auto eo = r.off(a, b).values();
      for (std::size_t i = 0; i < eo.size(); ++i) eo[i] = -alpha * le[i] * et[i] - ne[i] * ev[i];
    }
  }
  return r;
}

BudgetReport transfer_monitor(const CoupledSolver& solver, const CoupledState& cs) {
  const Grid& g = *cs.k.grid();
  const ScalarField nu_t = solver.eddy_viscosity(cs.k);
  const ScalarField dv2 = deformation(cs.flow.v).frobenius_squared_at_cells();
  const ScalarField& ell = solver.mixing_length();
  const double eta = solver.tke().eta_for(g);
  const auto kv = cs.k.values().values();
  const auto nv = nu_t.values().values();
  const auto dvv = dv2.values().values();
  const auto lv = ell.values().values();
  BudgetReport rep;
  for (std::size_t i = 0; i < kv.size(); ++i) {
    rep.production += nv[i] * dvv[i];
    rep.dissipation += kv[i] * std::sqrt(std::abs(kv[i])) / (lv[i] + eta);
    rep.total_k += kv[i];
  }
  const double vol = g.cell_volume();
  rep.production *= vol;
  rep.dissipation *= vol;
  rep.total_k *= vol;
  rep.transfer_ok = rep.production <= rep.dissipation;
  return rep;
}

BudgetReport transfer_monitor(const TkeBudget& applied) {
  BudgetReport rep;
  rep.production = applied.production;
  rep.dissipation = applied.dissipation;
  rep.total_k = applied.total_after;
  rep.transfer_ok = rep.production <= rep.dissipation;
  return rep;
}

void TransferTrend::record(double t, const BudgetReport& report) {
  if (!armed && report.transfer_ok) {
    armed = true;
    armed_at = t;
  }
  if (armed && has_last && report.total_k > last_total) {
    ++violations;
    worst_increase = std::max(worst_increase, report.total_k - last_total);
  }
  last_total = report.total_k;
  has_last = true;
}

double closure_integral(double alpha, const ScalarField& ell, const VectorField& v) {
  return closure_k(alpha, ell, deformation(v)).integral();
}

ClosureConsistency closure_consistency(const std::vector<ClosureSample>& samples) {
  ClosureConsistency out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.level_deviation.push_back(std::abs(samples[i].total_k - samples[i].closure));
    if (i == 0) continue;
    const double dt = samples[i].t - samples[i - 1].t;
    if (!(dt > 0.0)) throw std::invalid_argument("closure_consistency: times must increase");
    const double dk = (samples[i].total_k - samples[i - 1].total_k) / dt;
    const double dc = (samples[i].closure - samples[i - 1].closure) / dt;
    out.rate_deviation.push_back(std::abs(dk - dc));
  }
  return out;
}

}  // namespace kvflow
