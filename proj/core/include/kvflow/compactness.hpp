#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kvflow/fields.hpp"
#include "kvflow/mixing_length.hpp"

namespace kvflow {

/// Sequences nu_t^n -> nu_t (a.e.) with a common bound, built on the base
/// nu_t = base_scale * l / max l.
///
/// identical:         nu_t^n = nu_t
/// amplitude_decay:   nu_t + psi / n, psi = perturbation * l/max l * (1 + cos(2 pi x/Lx))/2
/// shrinking_support: nu_t + perturbation * l/max l on the strip x < Lx/n
/// oscillatory_decay: nu_t (1 + sin(2 pi n x/Lx) / n)
enum class PerturbationFamily { identical, amplitude_decay, shrinking_support, oscillatory_decay };

std::string to_string(PerturbationFamily family);
PerturbationFamily perturbation_family_from_string(const std::string& name);

struct CompactnessPlan {
  PerturbationFamily family = PerturbationFamily::amplitude_decay;
  std::vector<int> n_list{1, 2, 4, 8, 16};
  int cells = 32;
  double nu = 0.01;
  double alpha = 0.01;
  MixingLengthProfile profile = MixingLengthProfile::van_driest();
  double base_scale = 0.02;
  double perturbation = 0.02;
  std::array<double, 3> forcing{1.0, 0.0, 0.0};
  double t_end = 0.5;
  double dt = 0.01;
  std::uint64_t seed = 1;
  /// Allowed growth between consecutive members (relative).
  double wiggle = 0.1;
  /// Required final/initial ratio of every metric.
  double final_ratio = 0.1;

  void validate() const;
};

/// Member n of the family on the grid of a plan.
ScalarField perturbed_viscosity(const CompactnessPlan& plan, const GridPtr& grid, int n);
/// Common L-infinity bound of every member.
double compactness_bound(const CompactnessPlan& plan);

struct CompactnessRow {
  int n = 0;
  /// |int int (nu_t^n |D v^n|^2 - nu_t |D v|^2) phi| for phi = 1 and an interior bump.
  double m_one = 0.0;
  double m_bump = 0.0;
  /// ||v^n - v||_{L^2(Q_T)}.
  double w = 0.0;
  /// int_0^T (T - t) ||(2 nu + nu_t^n)^{1/2} D v^n||^2 dt.
  double weighted = 0.0;
};

struct CompactnessReport {
  std::vector<CompactnessRow> rows;
  double bound = 0.0;
  /// Weighted integral of the limit run.
  double weighted_limit = 0.0;
  double ratio_m_one = 0.0;
  double ratio_m_bump = 0.0;
  double ratio_w = 0.0;
  bool monotone = true;
  bool ratio_ok = true;
  bool passed() const { return monotone && ratio_ok; }
};

/// Runs the limit and every member from the same data and tabulates the
/// convergence metrics. Throws naming the member whose run fails.
CompactnessReport run_compactness(const CompactnessPlan& plan);

}  // namespace kvflow
