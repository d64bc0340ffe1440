#include "kvflow/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"

namespace kvflow {

namespace {

const char* const kNamedInvariants[] = {"divergence_free", "fields_finite",  "eddy_viscosity_bounded",
                                        "energy_identity", "tke_cfl",        "galerkin_spd"};

std::string step_checkpoint_path(const std::string& base, std::int64_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ".step%06lld", static_cast<long long>(step));
  return base + buf;
}

CsvRow ledger_row(const LedgerEntry& e, double div_max, int picard_iters) {
  CsvRow row;
  row.step = e.step;
  row.t = e.t;
  row.energy = e.energy;
  row.dissipation_cum = e.dissipation_cum;
  row.work_cum = e.work_cum;
  row.balance_residual = e.balance_residual;
  row.div_max = div_max;
  row.picard_iters = picard_iters;
  return row;
}

bool finite_field(const VectorField& v) { return std::isfinite(norm(v)); }

VectorField initial_velocity(const RunConfig& cfg, const GridPtr& grid) {
  VectorField v0 = smooth_random_field(grid, cfg.init.seed, cfg.init.max_mode);
  v0 *= cfg.init.amplitude;
  return v0;
}

/// Shared bookkeeping of the two run kinds.
class RunRecorder {
 public:
  RunRecorder(const RunConfig& cfg, const std::string& command, bool with_tke) : cfg_(cfg), with_tke_(with_tke) {
    cfg.validate();
    cfg.validate_paths();
    start_ = std::chrono::steady_clock::now();
    result_.summary.command = command;
    result_.summary.config_echo = echo_config(cfg);
    if (!cfg.output.csv.empty()) csv_.emplace(cfg.output.csv, with_tke);
  }

  RunResult& result() { return result_; }

  void row(const CsvRow& r, bool force) {
    if (csv_ && (force || r.step % cfg_.output.csv_every == 0)) csv_->push(r);
    max_div_ = std::max(max_div_, r.div_max);
  }

  void checkpoint(const State& s, const ScalarField* k) {
    if (cfg_.output.checkpoint.empty() || cfg_.output.checkpoint_every == 0) return;
    if (s.step % cfg_.output.checkpoint_every == 0)
      save_checkpoint(step_checkpoint_path(cfg_.output.checkpoint, s.step), cfg_, s, k);
  }

  void fail(const std::exception& e) {
    result_.summary.flag(invariant_of(e), false);
    if (result_.summary.failure.empty()) result_.summary.failure = e.what();
  }

  /// Flags, metrics, final checkpoint, CSV close and summary.
  RunResult finish(bool completed) {
    RunSummary& sum = result_.summary;
    const EnergyLedger& ledger = result_.ledger;
    if (completed && !cfg_.output.checkpoint.empty()) {
      try {
        save_checkpoint(cfg_.output.checkpoint, cfg_, result_.final_state,
                        result_.final_k ? &*result_.final_k : nullptr);
      } catch (const std::exception& e) {
        fail(e);
        completed = false;
      }
    }
    if (csv_) {
      try {
        csv_->close();
      } catch (const std::exception& e) {
        fail(e);
        completed = false;
      }
    }
    sum.flag("run_completed", completed);
    if (!ledger.empty()) {
      double balance = 0.0;
      for (const LedgerEntry& e : ledger.entries) balance = std::max(balance, e.balance_residual);
      sum.flag("energy_identity_step", ledger.max_step_residual() <= cfg_.checks.energy_step);
      sum.flag("energy_identity_cumulative", balance <= cfg_.checks.energy_cumulative);
      sum.metric("steps", static_cast<double>(ledger.back().step));
      sum.metric("t", ledger.back().t);
      sum.metric("energy", ledger.back().energy);
      sum.metric("dissipation_cum", ledger.back().dissipation_cum);
      sum.metric("work_cum", ledger.back().work_cum);
      sum.metric("max_step_residual", ledger.max_step_residual());
      sum.metric("max_balance_residual", balance);
    }
    sum.flag("divergence_free", max_div_ <= cfg_.scheme.tol_proj);
    sum.metric("max_div", max_div_);
    sum.passed = std::all_of(sum.invariants.begin(), sum.invariants.end(), [](const auto& f) { return f.second; });
    sum.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (!cfg_.output.summary.empty()) write_summary(sum, cfg_.output.summary);
    return std::move(result_);
  }

 private:
  const RunConfig& cfg_;
  bool with_tke_;
  RunResult result_;
  std::optional<CsvWriter> csv_;
  double max_div_ = 0.0;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::string invariant_of(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return "picard_converged";
  if (dynamic_cast<const CflError*>(&e)) return "tke_cfl";
  const std::string what = e.what();
  for (const char* name : kNamedInvariants) {
    const std::string prefix = std::string(name) + ":";
    if (what.rfind(prefix, 0) == 0) return name;
  }
  return "run_completed";
}

RunResult run_flow(const RunConfig& cfg) {
  RunRecorder rec(cfg, "run", false);
  RunResult& r = rec.result();
  bool completed = false;
  try {
    const FlowSolver solver = make_flow_solver(cfg);
    State s = solver.initial_state(initial_velocity(cfg, solver.grid()));
    r.ledger = start_ledger(solver, s);
    rec.row(ledger_row(r.ledger.back(), max_divergence(s.v), 0), true);
    rec.checkpoint(s, nullptr);
    const std::int64_t steps = cfg.scheme.step_count();
    for (std::int64_t i = 0; i < steps; ++i) {
      StepStats st;
      State next = solver.step(s, &st);
      if (!finite_field(next.v)) throw std::runtime_error("fields_finite: velocity is not finite");
      energy_update(r.ledger, solver, s, next);
      s = std::move(next);
      rec.row(ledger_row(r.ledger.back(), st.div_max, st.picard_iters), i + 1 == steps);
      rec.checkpoint(s, nullptr);
    }
    r.final_state = std::move(s);
    r.summary.flag("fields_finite", true);
    completed = true;
  } catch (const std::exception& e) {
    rec.fail(e);
  }
  return rec.finish(completed);
}

RunResult run_nstke(const RunConfig& cfg) {
  if (cfg.eddy != EddyKind::none)
    throw std::invalid_argument("physics.eddy: coupled runs derive nu_t from k; set it to none");
  RunRecorder rec(cfg, "nstke", true);
  RunResult& r = rec.result();
  bool completed = false;
  int unconverged = 0;
  r.min_k = std::numeric_limits<double>::infinity();
  try {
    const CoupledSolver solver(make_flow_solver(cfg), cfg.tke, cfg.coupling);
    const GridPtr& grid = solver.flow().grid();
    CoupledState cs = solver.initial_state(initial_velocity(cfg, grid), make_k_field(grid, cfg.init.k0));
    r.ledger = start_ledger(solver.flow(), cs.flow);
    r.min_k = cs.k.min();

    CsvRow first = ledger_row(r.ledger.back(), max_divergence(cs.flow.v), 0);
    const BudgetReport b0 = transfer_monitor(solver, cs);
    first.tke = TkeColumns{b0.total_k, b0.production, b0.dissipation, 0.0, b0.transfer_ok};
    rec.row(first, true);
    rec.checkpoint(cs.flow, &cs.k);

    const std::int64_t steps = cfg.scheme.step_count();
    for (std::int64_t i = 0; i < steps; ++i) {
      CoupledStepReport rep;
      CoupledState next = solver.step(cs, &rep);
      if (!finite_field(next.flow.v) || !std::isfinite(next.k.integral()))
        throw std::runtime_error("fields_finite: velocity or k is not finite");
      energy_update(r.ledger, solver.flow(), cs.flow, next.flow, &rep.nu_t);
      r.trend.record(next.flow.t, rep.transfer);
      r.max_budget_residual = std::max(r.max_budget_residual, rep.tke.residual);
      if (rep.tke.clipped_mass > 0.0)
        r.max_clipped_fraction = std::max(r.max_clipped_fraction,
                                          rep.tke.clipped_mass / std::max(rep.tke.total_after, 1e-300));
      r.min_k = std::min(r.min_k, next.k.min());
      if (!next.converged) ++unconverged;

      CsvRow row = ledger_row(r.ledger.back(), rep.flow.div_max, next.picard_iters);
      row.tke = TkeColumns{rep.tke.total_after, rep.tke.production, rep.tke.dissipation, rep.tke.clipped_mass,
                           rep.transfer.transfer_ok};
      cs = std::move(next);
      rec.row(row, i + 1 == steps);
      rec.checkpoint(cs.flow, &cs.k);
    }
    r.final_state = cs.flow;
    r.final_k = cs.k;
    r.summary.flag("fields_finite", true);
    completed = true;
  } catch (const std::exception& e) {
    rec.fail(e);
  }

  RunSummary& sum = r.summary;
  sum.flag("k_nonnegative", r.min_k >= 0.0);
  sum.flag("tke_budget", r.max_budget_residual <= cfg.checks.tke_budget);
  sum.flag("clipped_mass", r.max_clipped_fraction <= cfg.checks.clipped_fraction);
  if (cfg.coupling.mode == CouplingMode::picard) sum.flag("coupling_converged", unconverged == 0);
  if (cfg.forcing == std::array<double, 3>{0.0, 0.0, 0.0}) sum.flag("transfer_trend", r.trend.holds());
  sum.metric("min_k", r.min_k);
  sum.metric("max_budget_residual", r.max_budget_residual);
  sum.metric("max_clipped_fraction", r.max_clipped_fraction);
  sum.metric("unconverged_steps", unconverged);
  sum.metric("transfer_armed_at", r.trend.armed ? r.trend.armed_at : -1.0);
  sum.metric("transfer_violations", r.trend.violations);
  return rec.finish(completed);
}

}  // namespace kvflow
