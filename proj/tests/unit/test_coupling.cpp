#include <doctest.h>

#include <cmath>

#include "kvflow/coupling.hpp"
#include "kvflow/energy.hpp"
#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"
#include "test_support.hpp"

using namespace kvflow;

namespace {

CoupledSolver make_solver(int n, CouplingMode mode, Forcing forcing = {}, double dt = 0.005) {
  const GridPtr g = kvtest::channel(n, n);
  PhysicsConfig phys;
  phys.nu = 0.01;
  phys.alpha = 0.01;
  phys.profile = MixingLengthProfile::van_driest();
  phys.forcing = std::move(forcing);
  SchemeConfig sch;
  sch.dt = dt;
  sch.t_end = dt;
  CouplingConfig cc;
  cc.mode = mode;
  return CoupledSolver(FlowSolver(g, phys, sch), TkeConfig{}, cc);
}

ScalarField bump_k(const GridPtr& g, double amp) {
  ScalarField k = make_k_field(g);
  const int axis = g->dim() - 1;
  for_each_index(k.values().shape(), [&](int i, int j, int kk) {
    const Index3 q{i, j, kk};
    const double z = g->coordinate(Stagger::cell(), axis, q[axis]);
    const double x = g->coordinate(Stagger::cell(), 0, i);
    k(i, j, kk) = amp * std::sin(std::acos(-1.0) * z) * (1.2 + std::cos(2.0 * std::acos(-1.0) * x));
  });
  return k;
}

}  // namespace

TEST_CASE("coupling config") {
  CHECK(coupling_mode_from_string("paper_lagged") == CouplingMode::paper_lagged);
  CHECK(to_string(CouplingMode::frozen_k) == "frozen_k");
  CHECK_THROWS_WITH_AS(coupling_mode_from_string("both"), doctest::Contains("scheme.coupling"),
                       std::invalid_argument);
  CouplingConfig cc;
  cc.tol_couple = 0.0;
  CHECK_THROWS_WITH_AS(cc.validate(), doctest::Contains("scheme.tol_couple"), std::invalid_argument);
}

TEST_CASE("zero coupled state stays zero") {
  const CoupledSolver s = make_solver(12, CouplingMode::picard);
  CoupledState cs = s.initial_state(VectorField(s.flow().grid()), make_k_field(s.flow().grid()));
  for (int i = 0; i < 3; ++i) cs = s.step(cs);
  CHECK(max_abs(cs.flow.v) == 0.0);
  CHECK(cs.k.max() == 0.0);
  CHECK(cs.converged);
}

TEST_CASE("initial k is truncated at the source height") {
  const CoupledSolver s = make_solver(8, CouplingMode::picard);
  const ScalarField k0 = make_k_field(s.flow().grid(), 50.0);
  const CoupledState cs = s.initial_state(VectorField(s.flow().grid()), k0);
  CHECK(cs.k.max() == 10.0);
}

TEST_CASE("frozen k reproduces the flow step bitwise") {
  const CoupledSolver s = make_solver(16, CouplingMode::frozen_k, {});
  const GridPtr g = s.flow().grid();
  CoupledState cs = s.initial_state(smooth_random_field(g, 3), bump_k(g, 0.5));
  State ref = cs.flow;
  const ScalarField nu_t = s.eddy_viscosity(cs.k);
  for (int i = 0; i < 4; ++i) {
    cs = s.step(cs);
    ref = s.flow().step(ref, &nu_t);
    CHECK(cs.flow.v == ref.v);
  }
}

TEST_CASE("lagged ordering uses the old velocity in the k equation") {
  const CoupledSolver s = make_solver(16, CouplingMode::paper_lagged);
  const GridPtr g = s.flow().grid();
  const CoupledState cs = s.initial_state(smooth_random_field(g, 5), bump_k(g, 0.3));
  const CoupledState next = s.step(cs);
  const ScalarField k_ref =
      tke_step(cs.k, cs.flow.v, deformation(cs.flow.v), s.mixing_length(), s.tke(), s.flow().scheme().dt);
  CHECK(next.k.values() == k_ref.values());
}

TEST_CASE("picard coupling converges with positive k, closed budgets and energy identity") {
  const GridPtr g0 = kvtest::channel(20, 20);
  const CoupledSolver s = make_solver(20, CouplingMode::picard, Forcing::uniform(g0, {1.0, 0.0, 0.0}));
  const GridPtr g = s.flow().grid();
  CoupledState cs = s.initial_state(smooth_random_field(g, 2), bump_k(g, 0.2));
  EnergyLedger ledger = start_ledger(s.flow(), cs.flow);
  for (int i = 0; i < 8; ++i) {
    CoupledStepReport rep;
    const CoupledState next = s.step(cs, &rep);
    CHECK(next.converged);
    CHECK(next.picard_residual <= 1e-8);
    CHECK(next.k.min() >= 0.0);
    CHECK(rep.tke.residual <= 1e-10);
    CHECK(rep.tke.clipped_mass <= 1e-12 * rep.tke.total_after);
    energy_update(ledger, s.flow(), cs.flow, next.flow, &rep.nu_t);
    cs = next;
  }
  CHECK(ledger.max_step_residual() < 1e-9);
}

TEST_CASE("reynolds stress") {
  const GridPtr g = kvtest::box(10, 10);
  const ScalarField zero(g);
  CHECK(max_abs(reynolds_stress(VectorField(g), TensorField(g), zero, 0.1, zero, zero).trace()) == 0.0);

  const PressureSolver ps(g);
  const VectorField v = ps.projected(kvtest::random_field(g, 1));
  const VectorField vt = ps.projected(kvtest::random_field(g, 2));
  const ScalarField k = kvtest::random_scalar(g, 3, 0.0, 1.0);
  const ScalarField ell = kvtest::random_scalar(g, 4, 0.0, 0.2);
  const ScalarField nu = kvtest::random_scalar(g, 5, 0.0, 0.1);
  const TensorField dv = deformation(v);
  const ScalarField tr = reynolds_stress(vt, dv, k, 0.05, ell, nu).trace();
  for (std::size_t i = 0; i < tr.values().size(); ++i)
    CHECK(tr.values().data()[i] == doctest::Approx(2.0 * k.values().data()[i]).epsilon(1e-10));

  // alpha = 0, k = 0: Boussinesq law -nu_t D v on every entry.
  const ScalarField nu_c(g, 0.07);
  const TensorField r = reynolds_stress(vt, dv, zero, 0.0, ell, nu_c);
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b)
      for (std::size_t i = 0; i < r.entry(a, b).size(); ++i)
        CHECK(r.entry(a, b).data()[i] == doctest::Approx(-0.07 * dv.entry(a, b).data()[i]).epsilon(1e-14));
}

TEST_CASE("reynolds stress trace in three dimensions") {
  const GridPtr g = build_grid(GridSpec::channel3d(1.0, 1.0, 1.0, 6, 5, 6));
  const PressureSolver ps(g);
  const VectorField v = ps.projected(kvtest::random_field(g, 7));
  const ScalarField k = kvtest::random_scalar(g, 8, 0.0, 1.0);
  const ScalarField nu = kvtest::random_scalar(g, 9, 0.0, 0.1);
  const ScalarField tr = reynolds_stress(v, deformation(v), k, 0.02, nu, nu).trace();
  for (std::size_t i = 0; i < tr.values().size(); ++i)
    CHECK(tr.values().data()[i] == doctest::Approx(2.0 * k.values().data()[i]).epsilon(1e-10));
}

TEST_CASE("transfer monitor and trend") {
  const CoupledSolver s = make_solver(8, CouplingMode::picard);
  const CoupledState cs = s.initial_state(smooth_random_field(s.flow().grid(), 1), make_k_field(s.flow().grid()));
  const BudgetReport r = transfer_monitor(s, cs);
  CHECK(r.production == 0.0);
  CHECK(r.dissipation == 0.0);
  CHECK(r.transfer_ok);

  TransferTrend trend;
  trend.record(0.0, {2.0, 1.0, 1.0, false});
  trend.record(1.0, {2.0, 1.0, 1.5, false});  // growth before arming is allowed
  CHECK(!trend.armed);
  trend.record(2.0, {1.0, 2.0, 1.4, true});
  trend.record(3.0, {1.0, 2.0, 1.3, true});
  CHECK(trend.holds());
  trend.record(4.0, {3.0, 2.0, 1.35, false});
  CHECK(!trend.holds());
  CHECK(trend.worst_increase == doctest::Approx(0.05));
  CHECK(trend.armed_at == 2.0);
}

TEST_CASE("closure consistency") {
  const ClosureConsistency zero = closure_consistency({{0.0, 0.0, 0.0}, {0.1, 0.0, 0.0}});
  CHECK(zero.rate_deviation.at(0) == 0.0);
  CHECK(zero.level_deviation.at(1) == 0.0);

  const CoupledSolver s = make_solver(12, CouplingMode::picard);
  const GridPtr g = s.flow().grid();
  const State s0 = s.flow().initial_state(smooth_random_field(g, 4));
  const ScalarField k0 = closure_k(0.01, s.mixing_length(), deformation(s0.v));
  const CoupledState cs = s.initial_state(s0.v, k0);
  const ClosureSample first{0.0, cs.k.integral(), closure_integral(0.01, s.mixing_length(), cs.flow.v)};
  const CoupledState next = s.step(cs);
  const ClosureSample second{s.flow().scheme().dt, next.k.integral(),
                             closure_integral(0.01, s.mixing_length(), next.flow.v)};
  const ClosureConsistency c = closure_consistency({first, second});
  CHECK(c.level_deviation.at(0) <= 1e-14 * std::max(1.0, first.total_k));
  CHECK(std::isfinite(c.rate_deviation.at(0)));
}
