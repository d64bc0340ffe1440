#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kvflow/fields.hpp"

namespace kvflow {

/// With l = 2 alpha the general Voigt term equals alpha^2 Laplacian v_t on
/// solenoidal fields; both forms are run side by side from the same data.
struct ReduceNsvConfig {
  int cells = 32;
  int steps = 100;
  double nu = 0.01;
  double alpha = 0.05;
  double dt = 0.01;
  std::uint64_t seed = 3;
  double tolerance = 1e-10;
};

struct ReduceNsvReport {
  int steps = 0;
  /// max over steps of ||v_deformation - v_laplacian||.
  double max_diff = 0.0;
  double final_energy = 0.0;
  bool passed = false;
};

ReduceNsvReport reduce_nsv_check(const ReduceNsvConfig& cfg = {});

struct VerifyItem {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct VerifyConfig {
  int coarse = 32;
  int fine = 64;
  int samples = 100;
  std::uint64_t seed = 1;
  /// Allowed relative change of an inequality constant under refinement.
  double stability = 0.10;
};

struct VerifyReport {
  std::vector<VerifyItem> items;
  double korn_coarse = 0.0;
  double korn_fine = 0.0;
  double h_half_coarse = 0.0;
  double h_half_fine = 0.0;
  bool passed() const;
};

/// Operator identities, projection, skew advection, and the Korn and
/// H^{1/2} constants on a channel at two resolutions.
VerifyReport verify_suite(const VerifyConfig& cfg = {});

}  // namespace kvflow
