#include "kvflow/norms.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "kvflow/operators.hpp"
#include "kvflow/spectral.hpp"

namespace kvflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

double ell_inverse_norm(const VectorField& v, const ScalarField& ell) {
  const Grid& g = *v.grid();
  double total = 0.0;
  for (int d = 0; d < g.dim(); ++d) {
    const Array3 lf = sample_faces(ell, d);
    const Array3& c = v.component(d);
    // Only interior samples can be nonzero, and those carry unit weight.
    for (std::size_t o = 0; o < c.size(); ++o) {
      const double x = c.data()[o];
      if (x == 0.0) continue;
      const double l = lf.data()[o];
      if (!(l > 0.0)) return std::numeric_limits<double>::infinity();
      total += x * x / l;
    }
  }
  return std::sqrt(total * g.cell_volume());
}

void remove_means(VectorField& v) {
  for (int d = 0; d < v.dim(); ++d) {
    auto c = v.component(d).values();
    double m = 0.0;
    for (double x : c) m += x;
    m /= static_cast<double>(c.size());
    for (double& x : c) x -= m;
  }
}

}  // namespace

NormReport norms(const VectorField& v, const ScalarField& ell) {
  require_same_grid(v.grid(), ell.grid(), "norms");
  if (!v.all_finite()) throw std::invalid_argument("norms: non-finite velocity");
  NormReport r;
  r.l2 = norm(v);
  r.h1_semi = std::sqrt(gradient_norm_squared(velocity_gradient(v)));
  r.h_half = std::sqrt(std::max(0.0, laplacian_power_form(v, 0.5))) + r.l2;
  const TensorField dv = deformation(v);
  r.weighted_sqrt_ell_D = std::sqrt(std::max(0.0, tensor_dot(dv, dv, sample_flux_points(ell))));
  r.weighted_ell_inv_half = ell_inverse_norm(v, ell);
  return r;
}

VectorField smooth_random_field(const GridPtr& grid, std::uint64_t seed, int max_mode) {
  const Grid& g = *grid;
  const int dim = g.dim();
  const int w = g.wall_axis();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  // Wavenumbers per axis: wall-normal ones in 1..max_mode, periodic ones
  // signed except on axis 0 (cos/sin are folded into a random phase).
  struct Mode {
    std::array<int, 3> m{0, 0, 0};
    double phase = 0.0;
    std::array<double, 3> amp{0.0, 0.0, 0.0};
  };
  std::vector<Mode> modes;
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};
  for (int a = 0; a < dim; ++a) {
    lo[a] = (a == w) ? 1 : (a == 0 ? 0 : -max_mode);
    hi[a] = max_mode;
  }
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        Mode md;
        md.m = {i, j, k};
        double m2 = 0.0;
        for (int a = 0; a < dim; ++a) m2 += static_cast<double>(md.m[a]) * md.m[a];
        if (m2 == 0.0) continue;
        md.phase = kPi * u(rng);
        for (int d = 0; d < dim; ++d) md.amp[d] = u(rng) / (1.0 + m2);
        modes.push_back(md);
      }

  return VectorField::sample(grid, [&](int d, const std::array<double, 3>& x) {
    double s = 0.0;
    for (const Mode& md : modes) {
      double arg = md.phase;
      double env = 1.0;
      for (int a = 0; a < dim; ++a) {
        if (a == w)
          env *= std::sin(md.m[a] * kPi * x[a] / g.extent(a));
        else
          arg += 2.0 * kPi * md.m[a] * x[a] / g.extent(a);
      }
      s += md.amp[d] * env * std::cos(arg);
    }
    return s;
  });
}

InequalityReport korn_check(int sample_count, const GridPtr& grid, std::uint64_t seed) {
  InequalityReport rep;
  for (int s = 0; s < sample_count; ++s) {
    VectorField v = smooth_random_field(grid, seed + static_cast<std::uint64_t>(s));
    if (!grid->is_channel()) remove_means(v);
    const double l2 = norm(v);
    if (l2 == 0.0) continue;
    const TensorField dv = deformation(v);
    const double dnorm = std::sqrt(tensor_dot(dv, dv));
    if (dnorm <= 1e-12 * l2) {
      ++rep.kernel_hits;
      continue;
    }
    const double h1 = std::sqrt(l2 * l2 + gradient_norm_squared(velocity_gradient(v)));
    rep.worst_ratio = std::max(rep.worst_ratio, h1 / dnorm);
    ++rep.samples;
  }
  return rep;
}

InequalityReport h_half_estimate_check(int sample_count, const GridPtr& grid, const ScalarField& ell,
                                       std::uint64_t seed) {
  require_same_grid(grid, ell.grid(), "h_half_estimate_check");
  InequalityReport rep;
  const FluxCoefficient lf = sample_flux_points(ell);
  for (int s = 0; s < sample_count; ++s) {
    VectorField v = smooth_random_field(grid, seed + static_cast<std::uint64_t>(s));
    if (!grid->is_channel()) remove_means(v);
    const double l2 = norm(v);
    if (l2 == 0.0) continue;
    const TensorField dv = deformation(v);
    const double weighted = std::sqrt(std::max(0.0, tensor_dot(dv, dv, lf)));
    if (weighted <= 1e-12 * l2) {
      ++rep.kernel_hits;
      continue;
    }
    const double h_half = std::sqrt(std::max(0.0, laplacian_power_form(v, 0.5))) + l2;
    rep.worst_ratio = std::max(rep.worst_ratio, h_half / weighted);
    ++rep.samples;
  }
  return rep;
}

}  // namespace kvflow
