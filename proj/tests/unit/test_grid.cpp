#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kvflow/mixing_length.hpp"
#include "test_support.hpp"

using namespace kvflow;

TEST_CASE("grid spacing and wall distance") {
  const GridPtr g = kvtest::channel(8, 4);
  CHECK(g->spacing(0) == doctest::Approx(0.125));
  CHECK(g->spacing(1) == doctest::Approx(0.25));
  // Cell centers along z sit at 0.125, 0.375, 0.625, 0.875.
  CHECK(g->wall_distance()(0, 0, 0) == doctest::Approx(0.125));
  CHECK(g->wall_distance()(0, 3, 0) == doctest::Approx(0.125));
  CHECK(g->wall_distance()(0, 1, 0) == doctest::Approx(0.375));

  const Array3 rho_face = g->wall_distance(Stagger::face(1));
  CHECK(rho_face(0, 0, 0) == 0.0);
  CHECK(rho_face(0, 4, 0) == 0.0);
  CHECK(rho_face(0, 1, 0) == doctest::Approx(0.25));
  CHECK(rho_face(0, 3, 0) == doctest::Approx(0.25));  // z = 0.75 mirrors z = 0.25
  for (double r : g->wall_distance(Stagger::face(0)).values()) CHECK(r > 0.0);
}

TEST_CASE("box grid reports no wall") {
  const GridPtr g = kvtest::box(8, 8);
  for (double r : g->wall_distance().values()) CHECK(r == kNoWall);
}

TEST_CASE("grid spec rejects bad input with a field path") {
  GridSpec s = GridSpec::channel2d(1.0, 1.0, 8, 8);
  s.cells[0] = 3;
  CHECK_THROWS_WITH_AS(build_grid(s), doctest::Contains("grid.cells"), std::invalid_argument);
  s = GridSpec::channel2d(0.0, 1.0, 8, 8);
  CHECK_THROWS_WITH_AS(build_grid(s), doctest::Contains("grid.extents"), std::invalid_argument);
  s = GridSpec::channel2d(1.0, 1.0, 8, 8);
  s.bc[1] = AxisKind::periodic;
  CHECK_THROWS_WITH_AS(build_grid(s), doctest::Contains("grid.bc"), std::invalid_argument);
  s = GridSpec::box2d(1.0, 1.0, 8, 8);
  s.bc[1] = AxisKind::wall;
  CHECK_THROWS_AS(build_grid(s), std::invalid_argument);
}

TEST_CASE("staggered shapes") {
  const GridPtr g = kvtest::channel(8, 4);
  CHECK(g->shape(Stagger::face(0)) == Index3{8, 4, 1});
  CHECK(g->shape(Stagger::face(1)) == Index3{8, 5, 1});
  CHECK(g->shape(Stagger::edge(0, 1)) == Index3{8, 5, 1});
  CHECK(g->boundary_weight(Stagger::face(1), {0, 0, 0}) == 0.5);
  CHECK(g->boundary_weight(Stagger::face(1), {0, 2, 0}) == 1.0);
}

TEST_CASE("mixing length closed forms") {
  const MixingLengthProfile ob = MixingLengthProfile::obukhov(0.40);
  CHECK(ob.evaluate(0.1, 0.1, 1.0) == doctest::Approx(0.04));

  const MixingLengthProfile vd = MixingLengthProfile::van_driest(0.40, 0.05);
  const double rho = 1e-5;
  CHECK(vd.evaluate(rho, rho, 1.0) == doctest::Approx(0.40 * rho * rho / 0.05).epsilon(1e-4));

  // Default damping: 95% of the Obukhov value at a quarter height.
  const MixingLengthProfile vd_default = MixingLengthProfile::van_driest();
  CHECK(vd_default.evaluate(0.25, 0.25, 1.0) == doctest::Approx(0.95 * 0.40 * 0.25));

  const GridPtr g = kvtest::channel(8, 16);
  const ScalarField c = eval_mixing_length(MixingLengthProfile::constant_length(0.02), g);
  for (double x : c.values().values()) CHECK(x == 0.02);
}

TEST_CASE("mixing length invariants on the channel") {
  const GridPtr g = kvtest::channel(4, 32);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  const Array3& rho = g->wall_distance();
  const int n = g->cells(1);
  for (int k = 0; k < n; ++k) {
    CHECK(ell(0, k, 0) > 0.0);
    CHECK(ell(0, k, 0) <= 0.40 * rho(0, k, 0));
    CHECK(ell(0, k, 0) <= 0.40 * 0.5);
    CHECK(ell(0, k, 0) == doctest::Approx(ell(0, n - 1 - k, 0)).epsilon(1e-14));
  }
  // Flux-point samples vanish on the wall planes.
  const FluxCoefficient f = sample_flux_points(ell);
  CHECK(f.edge[pair_slot(0, 1)](0, 0, 0) == doctest::Approx(0.0).epsilon(1e-16));
  CHECK(std::abs(f.edge[pair_slot(0, 1)](2, n, 0)) < 1e-16);
  CHECK(ell.parity() == WallParity::odd);
}

TEST_CASE("mixing length errors") {
  const GridPtr b = kvtest::box(8, 8);
  CHECK_THROWS_AS(eval_mixing_length(MixingLengthProfile::obukhov(), b), std::invalid_argument);
  CHECK_THROWS_AS(MixingLengthProfile::obukhov(0.5).validate(), std::invalid_argument);
  MixingLengthProfile p = MixingLengthProfile::obukhov(0.5);
  p.allow_kappa_override = true;
  CHECK_NOTHROW(p.validate());
  CHECK(mixing_length_kind_from_string("van_driest") == MixingLengthProfile::Kind::van_driest);
  CHECK_THROWS_AS(mixing_length_kind_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("tabulated profile interpolates linearly") {
  const MixingLengthProfile t = MixingLengthProfile::tabulated({0.0, 0.1, 0.0});
  CHECK(t.evaluate(0.0, 0.25, 1.0) == doctest::Approx(0.05));
  CHECK(t.evaluate(0.0, 0.5, 1.0) == doctest::Approx(0.1));
  CHECK(t.evaluate(0.0, 1.0, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("boundary layer scale") {
  CHECK(boundary_layer_scale(1e-3, 0.1) == doctest::Approx(0.01));
  CHECK(boundary_layer_scale(1e-3, 1.0) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(boundary_layer_scale(1e-3, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(boundary_layer_scale(0.0, 1.0), std::invalid_argument);
}
