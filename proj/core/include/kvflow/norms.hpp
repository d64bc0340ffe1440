#pragma once

#include <cstdint>

#include "kvflow/fields.hpp"

namespace kvflow {

/// Discrete norms of a velocity field.
///
/// h_half = <A^{1/2} v, v>^{1/2} + l2 with A the component-wise Dirichlet
/// (periodic in box mode) Laplacian, so h_half^2 <= 2 l2 (l2 + h1_semi).
struct NormReport {
  double l2 = 0.0;
  double h1_semi = 0.0;
  double h_half = 0.0;
  double weighted_sqrt_ell_D = 0.0;
  /// +inf when v is nonzero somewhere l vanishes.
  double weighted_ell_inv_half = 0.0;
};

NormReport norms(const VectorField& v, const ScalarField& ell);

/// Constant of the interpolation bound h_half^2 <= C l2 (l2 + h1_semi).
inline constexpr double kInterpolationConstant = 2.0;

/// Smooth random zero-bc field: low Fourier modes in the periodic directions
/// times sin(q pi z / H) across the channel. The coefficients depend only on
/// the seed, so the same seed gives the same continuum field on every grid.
VectorField smooth_random_field(const GridPtr& grid, std::uint64_t seed, int max_mode = 3);

struct InequalityReport {
  double worst_ratio = 0.0;
  int samples = 0;
  /// Samples skipped because D v vanished (rigid motions, box mode only).
  int kernel_hits = 0;
};

/// Korn: worst ||v||_{H^1} / ||D v|| over `sample_count` smooth random fields.
/// In box mode component means are removed first.
InequalityReport korn_check(int sample_count, const GridPtr& grid, std::uint64_t seed = 1);

/// Worst ||v||_{H^{1/2}} / ||sqrt(l) D v|| over smooth random zero-bc fields.
InequalityReport h_half_estimate_check(int sample_count, const GridPtr& grid, const ScalarField& ell,
                                       std::uint64_t seed = 1);

}  // namespace kvflow
