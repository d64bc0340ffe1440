#pragma once

#include <string>
#include <vector>

#include "kvflow/flow_solver.hpp"
#include "kvflow/tke.hpp"

namespace kvflow {

/// How the flow and k sub-steps are combined within a time step.
///
/// picard:       iterate flow(nu_t(k mid)) and k(v mid) to a fixed point
/// paper_lagged: one pass, k first with the old velocity, then the flow
/// frozen_k:     k is held fixed, the flow uses nu_t(k)
enum class CouplingMode { picard, paper_lagged, frozen_k };

std::string to_string(CouplingMode mode);
CouplingMode coupling_mode_from_string(const std::string& name);

struct CouplingConfig {
  CouplingMode mode = CouplingMode::picard;
  double tol_couple = 1e-8;
  int max_couple_iters = 20;

  void validate() const;
};

struct CoupledState {
  State flow;
  ScalarField k;
  int picard_iters = 0;
  double picard_residual = 0.0;
  /// False when the coupling iteration hit max_couple_iters.
  bool converged = true;
};

/// Production and dissipation of k, with the transfer condition.
struct BudgetReport {
  double production = 0.0;
  double dissipation = 0.0;
  double total_k = 0.0;
  bool transfer_ok = true;
};

struct CoupledStepReport {
  StepStats flow;
  TkeBudget tke;
  /// Midpoint eddy viscosity used by the accepted flow step.
  ScalarField nu_t;
  /// Transfer condition from the production and sink actually applied.
  BudgetReport transfer;
};

class CoupledSolver {
 public:
  /// The flow solver must not carry its own eddy-viscosity function.
  CoupledSolver(FlowSolver flow, TkeConfig tke, CouplingConfig coupling);

  const FlowSolver& flow() const { return flow_; }
  const TkeConfig& tke() const { return tke_; }
  const CouplingConfig& coupling() const { return coupling_; }
  const ScalarField& mixing_length() const { return flow_.mixing_length(); }

  /// Projects v0 and truncates k0 at n_src.
  CoupledState initial_state(const VectorField& v0, const ScalarField& k0) const;
  CoupledState step(const CoupledState& cs, CoupledStepReport* report = nullptr) const;

  ScalarField eddy_viscosity(const ScalarField& k) const;

 private:
  ScalarField k_midpoint(const ScalarField& a, const ScalarField& b) const;

  FlowSolver flow_;
  TkeConfig tke_;
  CouplingConfig coupling_;
};

/// r = -alpha l D v_t - nu_t D v + (2/d) k I, so that trace r = 2k for
/// solenoidal fields in any dimension d.
TensorField reynolds_stress(const VectorField& v_t, const TensorField& dv, const ScalarField& k, double alpha,
                            const ScalarField& ell, const ScalarField& nu_t);

/// Pointwise production ||sqrt(nu_t(k)) D v||^2 against the dissipation
/// surrogate int k sqrt|k| / (l + eta) of a state.
BudgetReport transfer_monitor(const CoupledSolver& solver, const CoupledState& cs);
/// The same comparison for the terms one k step actually applied.
BudgetReport transfer_monitor(const TkeBudget& applied);

/// Tracks whether int k keeps decreasing once the transfer condition holds.
struct TransferTrend {
  bool armed = false;
  double armed_at = 0.0;
  int violations = 0;
  /// Largest increase of int k between consecutive samples after arming.
  double worst_increase = 0.0;
  double last_total = 0.0;
  bool has_last = false;

  void record(double t, const BudgetReport& report);
  bool holds() const { return violations == 0; }
};

/// alpha int l |D v|^2.
double closure_integral(double alpha, const ScalarField& ell, const VectorField& v);

struct ClosureSample {
  double t = 0.0;
  double total_k = 0.0;
  double closure = 0.0;
};

struct ClosureConsistency {
  /// |d/dt int k - d/dt closure| by forward differences, one per interval.
  std::vector<double> rate_deviation;
  /// |int k - closure| at every sample.
  std::vector<double> level_deviation;
};

ClosureConsistency closure_consistency(const std::vector<ClosureSample>& samples);

}  // namespace kvflow
