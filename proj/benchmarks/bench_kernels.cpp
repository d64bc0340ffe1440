#include <benchmark/benchmark.h>

#include "kvflow/advection.hpp"
#include "kvflow/coupling.hpp"
#include "kvflow/galerkin.hpp"
#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"
#include "kvflow/spectral.hpp"
#include "kvflow/tke.hpp"

using namespace kvflow;

namespace {

GridPtr channel(int n) { return build_grid(GridSpec::channel2d(1.0, 1.0, n, n)); }

void BM_Deformation(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  const VectorField v = smooth_random_field(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(deformation(v));
}
BENCHMARK(BM_Deformation)->Arg(32)->Arg(64)->Arg(128);

void BM_VoigtApply(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  const VectorField v = smooth_random_field(g, 1);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  for (auto _ : state) benchmark::DoNotOptimize(voigt_apply(ell, 0.01, v));
}
BENCHMARK(BM_VoigtApply)->Arg(32)->Arg(64)->Arg(128);

void BM_Advection(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  const VectorField v = smooth_random_field(g, 1);
  for (auto _ : state) benchmark::DoNotOptimize(advect(v, v));
}
BENCHMARK(BM_Advection)->Arg(32)->Arg(64)->Arg(128);

void BM_Projection(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  const PressureSolver ps(g);
  VectorField v = smooth_random_field(g, 1);
  v.component(0).fill(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(ps.projected(v));
}
BENCHMARK(BM_Projection)->Arg(32)->Arg(64)->Arg(128);

void BM_FlowStep(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  PhysicsConfig phys;
  phys.alpha = 0.01;
  phys.profile = MixingLengthProfile::van_driest();
  phys.forcing = Forcing::uniform(g, {1.0, 0.0, 0.0});
  SchemeConfig sch;
  sch.dt = 0.005;
  sch.t_end = 1.0;
  const FlowSolver solver(g, phys, sch);
  const State s = solver.initial_state(smooth_random_field(g, 1));
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(s));
}
BENCHMARK(BM_FlowStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TkeStep(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  const VectorField v = smooth_random_field(g, 1);
  const TensorField dv = deformation(v);
  const ScalarField ell = eval_mixing_length(MixingLengthProfile::van_driest(), g);
  const ScalarField k = make_k_field(g, 0.01);
  const TkeConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tke_step(k, v, dv, ell, cfg, 0.002, nullptr));
}
BENCHMARK(BM_TkeStep)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_CoupledStep(benchmark::State& state) {
  const GridPtr g = channel(static_cast<int>(state.range(0)));
  PhysicsConfig phys;
  phys.alpha = 0.01;
  phys.profile = MixingLengthProfile::van_driest();
  phys.forcing = Forcing::uniform(g, {1.0, 0.0, 0.0});
  SchemeConfig sch;
  sch.dt = 0.005;
  sch.t_end = 1.0;
  const CoupledSolver solver(FlowSolver(g, phys, sch), TkeConfig{}, CouplingConfig{});
  const CoupledState cs = solver.initial_state(smooth_random_field(g, 1), make_k_field(g, 0.01));
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(cs));
}
BENCHMARK(BM_CoupledStep)->Arg(32)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_GalerkinNonlinear(benchmark::State& state) {
  GalerkinConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  const GalerkinSystem sys = build_galerkin(cfg);
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(cfg.n, 0.1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(sys.nonlinear(c));
}
BENCHMARK(BM_GalerkinNonlinear)->Arg(8)->Arg(24)->Arg(48);

}  // namespace
BENCHMARK_MAIN();
