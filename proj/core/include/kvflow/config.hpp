#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "kvflow/coupling.hpp"
#include "kvflow/flow_solver.hpp"
#include "kvflow/grid.hpp"
#include "kvflow/tke.hpp"

namespace kvflow {

/// Prescribed eddy viscosity for plain flow runs.
/// none: nu_t = 0; uniform: nu_t = scale; ell_shape: nu_t = scale * l / max l.
enum class EddyKind { none, uniform, ell_shape };

std::string to_string(EddyKind kind);
EddyKind eddy_kind_from_string(const std::string& name);

struct InitConfig {
  std::uint64_t seed = 1;
  /// Scale of the smooth random initial velocity.
  double amplitude = 1.0;
  int max_mode = 3;
  /// Uniform initial k in the cells (coupled runs).
  double k0 = 0.01;
};

struct OutputConfig {
  /// Empty paths disable the corresponding artifact.
  std::string csv;
  std::string summary;
  std::string checkpoint;
  /// Extra checkpoints every this many steps (0: final state only).
  int checkpoint_every = 0;
  /// CSV row cadence in steps; the final step is always written.
  int csv_every = 1;
};

/// Thresholds of the invariants checked during a run.
struct ChecksConfig {
  double energy_step = 1e-9;
  double energy_cumulative = 1e-7;
  double tke_budget = 1e-10;
  /// Clipped mass relative to int k, per step.
  double clipped_fraction = 1e-12;
};

struct RunConfig {
  GridSpec grid = GridSpec::channel2d(1.0, 1.0, 32, 32);
  PhysicsConfig physics;
  std::array<double, 3> forcing{0.0, 0.0, 0.0};
  EddyKind eddy = EddyKind::none;
  double eddy_scale = 0.0;
  SchemeConfig scheme;
  TkeConfig tke;
  CouplingConfig coupling;
  InitConfig init;
  OutputConfig output;
  ChecksConfig checks;

  /// Throws std::invalid_argument naming the offending key.
  void validate() const;
  /// Checks that the directories of the output paths exist.
  void validate_paths() const;
};

/// Parses `section.key = value` lines; `#` starts a comment. Keys left out keep
/// their defaults. Unknown keys, repeated keys and malformed values are
/// reported with the key path (or the line number for malformed lines).
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Every key in canonical order with round-trip exact values.
std::string echo_config(const RunConfig& cfg);

/// Grid, physics (with forcing and eddy viscosity) and scheme of a config.
FlowSolver make_flow_solver(const RunConfig& cfg);

}  // namespace kvflow
