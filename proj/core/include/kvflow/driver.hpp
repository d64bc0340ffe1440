#pragma once

#include <optional>

#include "kvflow/coupling.hpp"
#include "kvflow/energy.hpp"
#include "kvflow/output.hpp"

namespace kvflow {

struct RunResult {
  /// Invariant flags, metrics and the failure message, if any.
  RunSummary summary;
  EnergyLedger ledger;
  State final_state;
  /// Coupled runs only.
  std::optional<ScalarField> final_k;
  TransferTrend trend;
  double max_budget_residual = 0.0;
  double max_clipped_fraction = 0.0;
  double min_k = 0.0;
};

/// Voigt flow (with the prescribed eddy viscosity of the config). Writes the
/// CSV, checkpoints and summary named in the config. Invariant failures end
/// the run with the flag cleared; the summary is written either way. Invalid
/// configs throw std::invalid_argument before anything is written.
RunResult run_flow(const RunConfig& cfg);

/// The coupled flow and k system; same output contract as run_flow.
RunResult run_nstke(const RunConfig& cfg);

/// Name of the invariant a failure message refers to ("divergence_free: ..."
/// gives "divergence_free"); "run_completed" for anything else.
std::string invariant_of(const std::exception& e);

}  // namespace kvflow
