#pragma once

#include <cmath>
#include <random>

#include "kvflow/fields.hpp"

namespace kvtest {

inline kvflow::GridPtr channel(int nx, int nz, double lx = 1.0, double h = 1.0) {
  return kvflow::build_grid(kvflow::GridSpec::channel2d(lx, h, nx, nz));
}

inline kvflow::GridPtr box(int nx, int nz, double lx = 1.0, double lz = 1.0) {
  return kvflow::build_grid(kvflow::GridSpec::box2d(lx, lz, nx, nz));
}

/// Uniform random values on every stored sample; walls zeroed.
inline kvflow::VectorField random_field(const kvflow::GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  kvflow::VectorField v(g);
  for (int d = 0; d < g->dim(); ++d)
    for (double& x : v.component(d).values()) x = u(rng);
  v.enforce_wall_bc();
  return v;
}

inline kvflow::TensorField random_tensor(const kvflow::GridPtr& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  kvflow::TensorField t(g);
  for (int a = 0; a < g->dim(); ++a)
    for (int b = a; b < g->dim(); ++b)
      for (double& x : t.entry(a, b).values()) x = u(rng);
  return t;
}

inline kvflow::ScalarField random_scalar(const kvflow::GridPtr& g, unsigned seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  kvflow::ScalarField s(g);
  for (double& x : s.values().values()) x = u(rng);
  return s;
}

}  // namespace kvtest
