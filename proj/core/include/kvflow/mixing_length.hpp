#pragma once

#include <string>
#include <vector>

#include "kvflow/fields.hpp"

namespace kvflow {

/// Prandtl mixing length l(x).
///
/// Obukhov:    l = kappa * rho
/// Van Driest: l = kappa * rho * (1 - exp(-rho / A))
/// Constant:   l = l0
/// Tabulated:  piecewise-linear samples along the last axis at uniformly
///             spaced coordinates 0, H/(m-1), ..., H (both ends included)
///
/// rho is the distance to the nearer wall, so the wall laws are mirrored about
/// mid-channel.
struct MixingLengthProfile {
  enum class Kind { obukhov, van_driest, constant, tabulated };

  Kind kind = Kind::van_driest;
  double kappa = 0.40;
  /// Van Driest damping length. Non-positive selects the default, the length
  /// at which l reaches 95% of the Obukhov value at rho = H/4.
  double damping = 0.0;
  double constant = 0.0;
  std::vector<double> samples;
  /// Allows kappa outside the usual von Karman range [0.35, 0.42].
  bool allow_kappa_override = false;

  static MixingLengthProfile obukhov(double kappa = 0.40);
  static MixingLengthProfile van_driest(double kappa = 0.40, double damping = 0.0);
  static MixingLengthProfile constant_length(double l0);
  static MixingLengthProfile tabulated(std::vector<double> samples);

  bool wall_based() const { return kind == Kind::obukhov || kind == Kind::van_driest; }
  void validate() const;

  /// Damping length A for a channel of height `height`.
  double damping_length(double height) const;
  /// Evaluation at wall distance `rho` and wall-normal coordinate `z` on an
  /// axis of length `height`.
  double evaluate(double rho, double z, double height) const;

  bool operator==(const MixingLengthProfile&) const = default;
};

std::string to_string(MixingLengthProfile::Kind kind);
MixingLengthProfile::Kind mixing_length_kind_from_string(const std::string& name);

/// Default Van Driest damping: 1 - exp(-(H/4)/A) = 0.95.
double default_van_driest_damping(double height);

/// Cell-centered mixing length. Wall-based profiles come back with odd wall
/// parity so that flux-point averages vanish on the walls.
ScalarField eval_mixing_length(const MixingLengthProfile& profile, const GridPtr& grid);

/// Boundary-layer length scale alpha = nu / u_star.
double boundary_layer_scale(double nu, double u_star);

}  // namespace kvflow
