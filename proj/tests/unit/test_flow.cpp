#include <doctest.h>

#include <cmath>

#include "kvflow/advection.hpp"
#include "kvflow/energy.hpp"
#include "kvflow/flow_solver.hpp"
#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"
#include "test_support.hpp"

using namespace kvflow;

namespace {

FlowSolver channel_solver(int n, double alpha, double dt, Forcing forcing = {}) {
  const GridPtr g = kvtest::channel(n, n);
  PhysicsConfig phys;
  phys.nu = 0.01;
  phys.alpha = alpha;
  phys.profile = MixingLengthProfile::van_driest();
  phys.forcing = std::move(forcing);
  SchemeConfig sch;
  sch.dt = dt;
  sch.t_end = dt;
  return FlowSolver(g, phys, sch);
}

}  // namespace

TEST_CASE("advection is skew-symmetric") {
  for (const GridPtr& g : {kvtest::channel(8, 6), kvtest::box(6, 8),
                           build_grid(GridSpec::channel3d(1.0, 1.0, 1.0, 5, 6, 4))}) {
    const VectorField v = kvtest::random_field(g, 1);
    const VectorField w = kvtest::random_field(g, 2);
    const VectorField n = advect(v, w);
    CHECK(std::abs(dot(n, w)) < 1e-12 * norm(n) * norm(w));
  }
}

TEST_CASE("advection trivial cases") {
  const GridPtr g = kvtest::box(8, 8);
  const PressureSolver ps(g);
  const VectorField v = ps.projected(kvtest::random_field(g, 3));
  const VectorField c = VectorField::sample(g, [](int d, const auto&) { return d == 0 ? 1.5 : -0.5; });
  CHECK(max_abs(advect(v, c)) < 1e-12);
  VectorField zero(g);
  CHECK(max_abs(advect(zero, v)) == 0.0);
}

TEST_CASE("advection is second-order accurate for a solenoidal field") {
  auto error = [](int n) {
    const GridPtr g = kvtest::box(n, n);
    const double k = 2.0 * std::acos(-1.0);
    // Taylor-Green field: (v . grad) v = -grad(cos 2kx + cos 2kz)/4.
    const VectorField v = VectorField::sample(g, [&](int d, const auto& x) {
      return d == 0 ? std::sin(k * x[0]) * std::cos(k * x[1]) : -std::cos(k * x[0]) * std::sin(k * x[1]);
    });
    const VectorField exact = VectorField::sample(g, [&](int d, const auto& x) {
      return d == 0 ? 0.5 * k * std::sin(2 * k * x[0]) : 0.5 * k * std::sin(2 * k * x[1]);
    });
    VectorField e = advect(v, v);
    e -= exact;
    return norm(e);
  };
  CHECK(std::log2(error(16) / error(32)) > 1.9);
}

TEST_CASE("zero state stays zero") {
  const FlowSolver solver = channel_solver(16, 0.01, 0.01);
  State s = solver.initial_state(VectorField(solver.grid()));
  for (int i = 0; i < 3; ++i) s = solver.step(s);
  CHECK(max_abs(s.v) == 0.0);
  CHECK(s.step == 3);
}

TEST_CASE("energy identity per step") {
  const GridPtr g = kvtest::channel(24, 24);
  const FlowSolver solver = channel_solver(24, 0.01, 0.005, Forcing::uniform(g, {1.0, 0.0, 0.0}));
  State s = solver.initial_state(smooth_random_field(solver.grid(), 7));
  EnergyLedger ledger = start_ledger(solver, s);
  for (int i = 0; i < 10; ++i) {
    StepStats st;
    const State next = solver.step(s, &st);
    energy_update(ledger, solver, s, next);
    CHECK(st.div_max < 1e-10);
    CHECK(st.picard_residual <= 1e-10);
    s = next;
  }
  CHECK(ledger.max_step_residual() < 1e-9);
  CHECK(ledger.back().balance_residual < 1e-9);
}

TEST_CASE("unforced energy decays monotonically") {
  const FlowSolver solver = channel_solver(16, 0.02, 0.01);
  State s = solver.initial_state(smooth_random_field(solver.grid(), 3));
  EnergyLedger ledger = start_ledger(solver, s);
  for (int i = 0; i < 10; ++i) {
    const State next = solver.step(s);
    energy_update(ledger, solver, s, next);
    s = next;
  }
  for (std::size_t i = 1; i < ledger.entries.size(); ++i)
    CHECK(ledger.entries[i].energy <= ledger.entries[i - 1].energy);
}

TEST_CASE("dissipation of a solenoidal no-slip field equals the gradient form") {
  // 2 ||D v||^2 = ||grad v||^2 when div v = 0 and v vanishes on the walls.
  const GridPtr g = kvtest::channel(12, 10);
  const PressureSolver ps(g);
  const VectorField v = ps.projected(kvtest::random_field(g, 5));
  const TensorField dv = deformation(v);
  CHECK(2.0 * tensor_dot(dv, dv) ==
        doctest::Approx(gradient_norm_squared(velocity_gradient(v))).epsilon(1e-10));
}

TEST_CASE("configuration validation names the field") {
  SchemeConfig sch;
  sch.dt = 0.0;
  CHECK_THROWS_WITH_AS(sch.validate(), doctest::Contains("scheme.dt"), std::invalid_argument);
  PhysicsConfig phys;
  phys.nu = -1.0;
  CHECK_THROWS_WITH_AS(phys.validate(), doctest::Contains("physics.nu"), std::invalid_argument);
  phys.nu = 0.01;
  phys.alpha = -0.1;
  CHECK_THROWS_WITH_AS(phys.validate(), doctest::Contains("physics.alpha"), std::invalid_argument);
}

TEST_CASE("gronwall envelope") {
  const std::vector<double> t{0.0, 0.5, 1.0};
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const std::vector<double> g{1.0, 2.0, 3.0};
  CHECK(gronwall_envelope(t, zero, g) == g);

  std::vector<double> tt, lam, gg;
  for (int i = 0; i <= 100; ++i) {
    tt.push_back(i * 0.01);
    lam.push_back(2.0);
    gg.push_back(1.5);
  }
  const auto env = gronwall_envelope(tt, lam, gg);
  CHECK(env.back() == doctest::Approx(1.5 * std::exp(2.0)).epsilon(1e-12));

  CHECK_THROWS_AS(gronwall_envelope(t, zero, {3.0, 2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(gronwall_envelope(t, {0.0, -1.0, 0.0}, g), std::invalid_argument);
}

TEST_CASE("gronwall envelope dominates a linear ODE") {
  // f' = lambda(t) f with g = f(0): f(t) = f0 exp(int lambda) exactly, and the
  // trapezoid of a convex lambda over-estimates the integral.
  std::vector<double> t, lam, g, f;
  for (int i = 0; i <= 200; ++i) {
    const double s = i * 0.01;
    t.push_back(s);
    lam.push_back(1.0 + s * s);
    g.push_back(2.0);
    f.push_back(2.0 * std::exp(s + s * s * s / 3.0));
  }
  const auto env = gronwall_envelope(t, lam, g);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(env[i] >= f[i] * (1.0 - 1e-14));
}
