#pragma once

#include <cstdint>
#include <vector>

#include "kvflow/flow_solver.hpp"

namespace kvflow {

/// One ledger sample, taken after each accepted step (and once at t = 0).
struct LedgerEntry {
  std::int64_t step = 0;
  double t = 0.0;
  /// E = (1/2)(||v||^2 + alpha ||sqrt(l) D v||^2).
  double energy = 0.0;
  double dissipation_cum = 0.0;
  double work_cum = 0.0;
  /// E^{n+1} - E^n + dt (dissipation - work) for the last step.
  double step_residual = 0.0;
  /// |E(t) + dissipation - E(0) - work|.
  double balance_residual = 0.0;
  /// ||grad v||^2 at the sample.
  double grad_sq = 0.0;
  /// ||v||_{1/2}^2 at the sample.
  double h_half_sq = 0.0;
  /// alpha ||sqrt(l) D v_t||^2 with the backward difference of the last step.
  double voigt_rate_sq = 0.0;
};

struct EnergyLedger {
  std::vector<LedgerEntry> entries;

  bool empty() const { return entries.empty(); }
  const LedgerEntry& back() const { return entries.back(); }
  double max_step_residual() const;
};

/// Starts a ledger at the initial state.
EnergyLedger start_ledger(const FlowSolver& solver, const State& s0);

/// Appends the sample for the step old -> next. `nu_t` is the midpoint eddy
/// viscosity the step used (nullptr: none, or the config's function).
void energy_update(EnergyLedger& ledger, const FlowSolver& solver, const State& old, const State& next,
                   const ScalarField* nu_t = nullptr);

/// g(t) exp(int_0^t lambda) with the integral by the trapezoidal rule.
/// Rejects negative lambda, decreasing g and mismatched lengths.
std::vector<double> gronwall_envelope(const std::vector<double>& t, const std::vector<double>& lambda,
                                      const std::vector<double>& g);

struct AprioriOptions {
  /// Random fields used for the observed H^{1/2} constant.
  int samples = 32;
  std::uint64_t seed = 1;
};

/// Observed-constant check of the three a-priori estimates of the model.
///
/// F = ||f||_{-1}^2 (discrete dual norm of the steady forcing).
/// (a) ||v(s)||_{1/2}^2 + nu int ||grad v||^2 <= C_a (F s / nu + E(0)) with
///     C_a = 2 + 2 C_H^2 / alpha and C_H the observed constant of
///     ||v||_{1/2} <= C_H ||sqrt(l) D v||.
/// (b) nu ||grad v(s)||^2 <= g(s) exp(int lambda), g = nu ||grad v0||^2 + F s,
///     lambda = c ||grad v||^2 / nu, with c the smallest constant for which
///     I(s) + nu ||grad v(s)||^2 <= g(s) + c int ||grad v||^4 holds on the
///     samples, I(s) = alpha int ||sqrt(l) D v_t||^2.
/// (c) I(s) stays below the closed-form envelope built from (a) and (b).
struct AprioriReport {
  double F = 0.0;
  double c_half = 0.0;
  double c_a = 0.0;
  double observed_a = 0.0;
  bool a_holds = true;
  /// Least-squares line through the (a) left-hand side.
  double a_slope = 0.0;
  double a_intercept = 0.0;
  double a_r2 = 1.0;

  double c_gronwall = 0.0;
  std::vector<double> times;
  std::vector<double> f_b;
  std::vector<double> envelope_b;
  std::vector<double> closed_envelope_b;
  bool b_holds = true;
  double b_min_margin = 0.0;

  std::vector<double> lhs_c;
  std::vector<double> envelope_c;
  bool c_holds = true;
};

AprioriReport apriori_check(const EnergyLedger& ledger, const FlowSolver& solver,
                            const AprioriOptions& options = {});

}  // namespace kvflow
