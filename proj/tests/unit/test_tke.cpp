#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kvflow/mixing_length.hpp"
#include "kvflow/operators.hpp"
#include "kvflow/spectral.hpp"
#include "kvflow/tke.hpp"
#include "test_support.hpp"

using namespace kvflow;

namespace {

ScalarField constant_scalar(const GridPtr& g, double value) { return ScalarField(g, value); }

VectorField uniform_velocity(const GridPtr& g, double ux, double uz) {
  return VectorField::sample(g, [&](int d, const auto&) { return d == 0 ? ux : uz; });
}

}  // namespace

TEST_CASE("truncation") {
  CHECK(truncate(3.0, 5.0) == 3.0);
  CHECK(truncate(-7.0, 5.0) == -5.0);
  CHECK(truncate(0.0, 5.0) == 0.0);
  CHECK(truncate(9.0, std::numeric_limits<double>::infinity()) == 9.0);
  CHECK_THROWS_AS(truncate(1.0, 0.0), std::invalid_argument);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 2000; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(truncate(a, 5.0)) <= 5.0);
    CHECK(truncate(-a, 5.0) == -truncate(a, 5.0));
    CHECK(std::abs(truncate(a, 5.0) - truncate(b, 5.0)) <= std::abs(a - b));
    if (a <= b) CHECK(truncate(a, 5.0) <= truncate(b, 5.0));
  }
}

TEST_CASE("eddy viscosity and diffusivity") {
  const GridPtr g = kvtest::box(4, 4);
  const ScalarField ell = constant_scalar(g, 0.1);
  CHECK(eddy_viscosity(ScalarField(g, 0.0), ell, 10.0).max() == 0.0);
  CHECK(eddy_viscosity(ScalarField(g, 4.0), ell, 10.0).max() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(eddy_viscosity(ScalarField(g, 400.0), ell, 10.0).max() == doctest::Approx(1.0).epsilon(1e-15));

  const ScalarField ell2 = constant_scalar(g, 0.05);
  CHECK(eddy_diffusivity(ScalarField(g, 1.0), ell2, 2.0, 10.0).max() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(eddy_diffusivity(ScalarField(g, 0.0), ell2, 2.0, 10.0).max() == 0.0);
  CHECK(eddy_diffusivity(ScalarField(g, 1e6), ell2, 2.0, 10.0).max() == doctest::Approx(1.0).epsilon(1e-15));

  const GridPtr c = kvtest::channel(16, 16);
  const ScalarField lvd = eval_mixing_length(MixingLengthProfile::van_driest(), c);
  const ScalarField k = kvtest::random_scalar(c, 3, 0.0, 500.0);
  const ScalarField nu = eddy_viscosity(k, lvd, 10.0);
  const ScalarField mu = eddy_diffusivity(k, lvd, 1.5, 7.0);
  CHECK(nu.min() >= 0.0);
  CHECK(nu.max() <= 10.0 * lvd.max());
  CHECK(mu.max() <= 1.5 * 7.0 * lvd.max());
  CHECK(nu.parity() == WallParity::odd);
}

TEST_CASE("smagorinsky viscosity") {
  const GridPtr g = kvtest::box(6, 6);
  const ScalarField ell = constant_scalar(g, 0.1);
  CHECK(smagorinsky_viscosity(ell, 0.01, TensorField(g)).max() == 0.0);

  // Pure shear v = (z, 0): D_xz = 1/2, |Dv| = sqrt(2)/2.
  TensorField shear(g);
  shear.off(0, 1).fill(0.5);
  const double expected = 0.1 * std::sqrt(0.001) * 0.5 * std::sqrt(2.0);
  const ScalarField nu = smagorinsky_viscosity(ell, 0.01, shear);
  CHECK(nu.min() == doctest::Approx(expected).epsilon(1e-14));
  CHECK(nu.max() == doctest::Approx(expected).epsilon(1e-14));

  TensorField twice = shear;
  twice *= 2.0;
  CHECK(smagorinsky_viscosity(ell, 0.01, twice).max() == doctest::Approx(2.0 * expected).epsilon(1e-14));
}

TEST_CASE("closure identity links the TKE and Smagorinsky laws") {
  const GridPtr g = kvtest::channel(12, 10);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  const double inf = std::numeric_limits<double>::infinity();
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const TensorField dv = kvtest::random_tensor(g, seed);
    const ScalarField k = closure_k(0.03, ell, dv);
    CHECK(k.min() >= 0.0);
    const ScalarField a = eddy_viscosity(k, ell, inf);
    const ScalarField b = smagorinsky_viscosity(ell, 0.03, dv);
    for (std::size_t i = 0; i < a.values().size(); ++i)
      CHECK(a.values().values()[i] == doctest::Approx(b.values().values()[i]).epsilon(1e-14));
  }
  CHECK(closure_k(0.0, ell, kvtest::random_tensor(g, 9)).max() == 0.0);
  CHECK(closure_k(0.1, ell, TensorField(g)).max() == 0.0);
}

TEST_CASE("tke config validation") {
  TkeConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.n_visc = 0.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tke.n_visc"), std::invalid_argument);
  cfg = {};
  cfg.eta = 0.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tke.eta"), std::invalid_argument);
  cfg = {};
  cfg.c_diff = -1.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tke.c_diff"), std::invalid_argument);
  cfg = {};
  CHECK(cfg.eta_for(*kvtest::channel(4, 4, 2.0, 3.0)) == doctest::Approx(3e-3));
}

TEST_CASE("zero k with zero strain stays zero") {
  const GridPtr g = kvtest::channel(10, 10);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  TkeBudget b;
  const ScalarField k = tke_step(make_k_field(g), VectorField(g), TensorField(g), ell, {}, 0.01, &b);
  CHECK(k.max() == 0.0);
  CHECK(b.residual == 0.0);
}

TEST_CASE("pure dissipation matches the per-cell scalar recursion") {
  const GridPtr g = kvtest::box(8, 8);
  const ScalarField ell = constant_scalar(g, 0.2);
  TkeConfig cfg;
  cfg.eta = 0.01;
  const double dt = 0.05;
  ScalarField k(g, 0.7);
  double oracle = 0.7;
  for (int n = 0; n < 20; ++n) {
    const ScalarField next = tke_step_with_source(k, VectorField(g), ScalarField(g), ell, cfg, dt);
    oracle = oracle / (1.0 + dt * std::sqrt(oracle) / (0.2 + 0.01));
    CHECK(next.max() <= k.max());
    k = next;
  }
  CHECK(k.min() == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(k.max() == doctest::Approx(oracle).epsilon(1e-13));
}

TEST_CASE("constant source reaches the equilibrium k* = (S (l + eta))^(2/3)") {
  const GridPtr g = kvtest::box(6, 6);
  const ScalarField ell = constant_scalar(g, 0.1);
  TkeConfig cfg;
  cfg.eta = 0.005;
  const double s = 0.8;
  const double k_star = std::pow(s * 0.105, 2.0 / 3.0);
  ScalarField k(g, 0.0);
  for (int n = 0; n < 400; ++n) k = tke_step_with_source(k, VectorField(g), ScalarField(g, s), ell, cfg, 0.02);
  CHECK(std::abs(k.max() - k_star) <= 0.01 * k_star);
  CHECK(std::abs(k.min() - k_star) <= 0.01 * k_star);
}

TEST_CASE("upwind transport matches the explicit donor-cell formula") {
  // l = 0 switches off diffusion; the sink stays and is applied implicitly.
  const GridPtr g = kvtest::box(16, 4);
  const ScalarField ell = constant_scalar(g, 0.0);
  TkeConfig cfg;
  cfg.eta = 0.05;
  const double u = 0.8, dt = 0.05, h = 1.0 / 16.0;
  ScalarField k(g);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 4; ++j) k(i, j, 0) = 1.0 + std::sin(2.0 * std::acos(-1.0) * i / 16.0) + 0.1 * j;
  const ScalarField next = tke_step_with_source(k, uniform_velocity(g, u, 0.0), ScalarField(g), ell, cfg, dt);
  const double c = u * dt / h;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 4; ++j) {
      const double up = k((i + 15) % 16, j, 0);
      const double expect = (k(i, j, 0) - c * (k(i, j, 0) - up)) / (1.0 + dt * std::sqrt(k(i, j, 0)) / 0.05);
      CHECK(next(i, j, 0) == doctest::Approx(expect).epsilon(1e-13));
    }
}

TEST_CASE("CFL violation is reported before stepping") {
  const GridPtr g = kvtest::box(8, 8);
  const VectorField v = uniform_velocity(g, 1.0, 1.0);
  CHECK(tke_courant(v, 0.05) == doctest::Approx(0.8));
  CHECK_THROWS_AS(tke_step_with_source(ScalarField(g, 1.0), v, ScalarField(g), ScalarField(g, 0.1), {}, 0.07),
                  CflError);
}

TEST_CASE("positivity and budget closure under transport, diffusion and production") {
  const GridPtr g = kvtest::channel(24, 24);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  const PressureSolver ps(g);
  VectorField v = ps.projected(kvtest::random_field(g, 4));
  const double dt = 0.01;
  v *= 0.9 / tke_courant(v, dt);
  const TensorField dv = deformation(v);
  ScalarField k = make_k_field(g);
  // Sharp, partly empty initial data stresses the positivity mechanism.
  const ScalarField r = kvtest::random_scalar(g, 8, -1.0, 1.0);
  for (std::size_t i = 0; i < k.values().size(); ++i) k.values().data()[i] = std::max(0.0, r.values().data()[i]);
  TkeConfig cfg;
  cfg.c_diff = 3.0;
  for (int n = 0; n < 20; ++n) {
    TkeBudget b;
    k = tke_step(k, v, dv, ell, cfg, dt, &b);
    CHECK(k.min() >= 0.0);
    CHECK(b.clipped_mass <= 1e-12 * b.total_after);
    CHECK(b.residual <= 1e-10);
    CHECK(std::abs(b.advection) <= 1e-12);
    CHECK(b.production >= 0.0);
    CHECK(b.dissipation >= 0.0);
  }
}

TEST_CASE("without a source the total k never increases") {
  const GridPtr g = kvtest::channel(16, 16);
  const ScalarField ell = ScalarField(g, 0.05);  // even parity: diffusive flux leaves through the walls
  const PressureSolver ps(g);
  VectorField v = ps.projected(kvtest::random_field(g, 6));
  v *= 0.5 / tke_courant(v, 0.01);
  ScalarField k = make_k_field(g);
  const ScalarField r = kvtest::random_scalar(g, 2, 0.0, 2.0);
  k.values() = r.values();
  TkeConfig cfg;
  cfg.c_diff = 5.0;
  double total = k.integral();
  for (int n = 0; n < 20; ++n) {
    TkeBudget b;
    k = tke_step_with_source(k, v, ScalarField(g), ell, cfg, 0.01, &b);
    CHECK(b.diffusion <= 1e-14);
    CHECK(k.integral() <= total);
    total = k.integral();
  }
}

TEST_CASE("gradient Lp norm") {
  const GridPtr g = kvtest::box(8, 8);
  CHECK(gradient_lp_norm(ScalarField(g, 3.0), 1.2) == 0.0);
  const GridPtr c = kvtest::channel(8, 8);
  const ScalarField one = make_k_field(c, 1.0);
  // Only the two wall layers contribute: |2/h|^p with half weight on 2 * 8 faces.
  const double h = 1.0 / 8.0;
  const double expect = std::pow(2.0 * 8.0 * 0.5 * std::pow(2.0 / h, 1.5) * h * h, 1.0 / 1.5);
  CHECK(gradient_lp_norm(one, 1.5) == doctest::Approx(expect).epsilon(1e-13));
}
