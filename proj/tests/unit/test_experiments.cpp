#include <cmath>
#include <numbers>

#include "doctest.h"
#include "kvflow/compactness.hpp"
#include "kvflow/galerkin.hpp"
#include "kvflow/mms.hpp"
#include "kvflow/operators.hpp"
#include "kvflow/verification.hpp"
#include "test_support.hpp"

using namespace kvflow;

namespace {

constexpr double kPi = std::numbers::pi;

GalerkinConfig constant_ell(int n, double alpha, double ell0) {
  GalerkinConfig cfg;
  cfg.n = n;
  cfg.nu = 0.03;
  cfg.alpha = alpha;
  cfg.ell = [ell0](double, double) { return ell0; };
  return cfg;
}

}  // namespace

TEST_CASE("galerkin single mode matrices") {
  const GalerkinSystem sys = build_galerkin(constant_ell(1, 0.2, 0.3));
  const double k2 = 4.0 * kPi * kPi;
  CHECK(sys.a(0, 0) == doctest::Approx(0.2 * 0.3 * k2 / 2.0).epsilon(1e-12));
  CHECK(sys.b(0, 0) == doctest::Approx(0.03 * k2).epsilon(1e-12));
}

TEST_CASE("galerkin basis is orthonormal and divergence-free") {
  const GalerkinSystem sys = build_galerkin(constant_ell(6, 0.0, 0.0));
  const int q = 64;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(6, 6);
  for (int i = 0; i < q; ++i)
    for (int j = 0; j < q; ++j) {
      const double x = (i + 0.5) / q, z = (j + 0.5) / q;
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const auto pa = sys.basis(a, x, z), pb = sys.basis(b, x, z);
          gram(a, b) += (pa[0] * pb[0] + pa[1] * pb[1]) / (q * q);
        }
    }
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
  // Finite-difference divergence of psi_3.
  const double e = 1e-5, x = 0.31, z = 0.77;
  const double div = (sys.basis(3, x + e, z)[0] - sys.basis(3, x - e, z)[0]) / (2 * e) +
                     (sys.basis(3, x, z + e)[1] - sys.basis(3, x, z - e)[1]) / (2 * e);
  CHECK(std::abs(div) < 1e-8);
}

TEST_CASE("galerkin trivial cases") {
  const GalerkinSystem zero_ell = build_galerkin(constant_ell(8, 0.5, 0.0));
  CHECK(zero_ell.a.cwiseAbs().maxCoeff() == 0.0);

  GalerkinConfig cfg = constant_ell(8, 0.1, 0.2);
  const GalerkinSystem sys = build_galerkin(cfg);
  CHECK(sys.skew_defect < 1e-12);
  CHECK((sys.a - sys.a.transpose()).cwiseAbs().maxCoeff() < 1e-14);

  GalerkinIntegration opts;
  opts.t_end = 0.2;
  const GalerkinTrajectory tr = integrate_galerkin(sys, Eigen::VectorXd::Zero(8), opts);
  for (const auto& c : tr.c) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("galerkin linear decay matches the closed form") {
  const GalerkinSystem sys = build_galerkin(constant_ell(1, 0.1, 0.2));
  const double lambda = sys.b(0, 0) / (1.0 + sys.a(0, 0));
  GalerkinIntegration opts;
  opts.t_end = 1.0;
  opts.dt = 0.05;
  opts.linear = true;
  Eigen::VectorXd c0(1);
  c0 << 1.0;
  const GalerkinTrajectory tr = integrate_galerkin(sys, c0, opts);
  const double amp = (1.0 - 0.5 * lambda * opts.dt) / (1.0 + 0.5 * lambda * opts.dt);
  const double c_end = tr.c.back()(0);
  CHECK(c_end == doctest::Approx(std::pow(amp, 20)).epsilon(1e-12));
  const double bound = std::pow(lambda, 3) * opts.dt * opts.dt * opts.t_end / 12.0;
  CHECK(std::abs(c_end - std::exp(-lambda * opts.t_end)) <= bound);
}

TEST_CASE("galerkin energy identity per step") {
  GalerkinConfig cfg = constant_ell(8, 0.05, 0.1);
  cfg.forcing = [](double x, double z) { return std::array<double, 2>{std::sin(2 * kPi * z), 0.3 * std::cos(2 * kPi * x)}; };
  const GalerkinSystem sys = build_galerkin(cfg);
  Eigen::VectorXd c0(8);
  for (int j = 0; j < 8; ++j) c0(j) = 0.3 / (1 + j);
  GalerkinIntegration opts;
  opts.t_end = 0.5;
  opts.dt = 0.02;
  const GalerkinTrajectory tr = integrate_galerkin(sys, c0, opts);
  for (double r : tr.step_residual) CHECK(std::abs(r) < 1e-13);
}

TEST_CASE("galerkin coefficients sampled on the grid keep the energy") {
  const GalerkinSystem sys = build_galerkin(constant_ell(4, 0.0, 0.0));
  const GridPtr g = kvtest::box(64, 64);
  Eigen::VectorXd c(4);
  c << 0.5, -0.2, 0.1, 0.3;
  const VectorField v = sys.to_grid(c, g);
  CHECK(0.5 * dot(v, v) == doctest::Approx(0.5 * c.squaredNorm()).epsilon(1e-12));
  CHECK(max_divergence(v) < 1e-10);
}

TEST_CASE("compactness identical family gives zero metrics") {
  CompactnessPlan plan;
  plan.family = PerturbationFamily::identical;
  plan.cells = 8;
  plan.n_list = {1, 2};
  plan.t_end = 0.05;
  const CompactnessReport rep = run_compactness(plan);
  for (const auto& row : rep.rows) {
    CHECK(row.m_one == 0.0);
    CHECK(row.m_bump == 0.0);
    CHECK(row.w == 0.0);
  }
  CHECK(rep.passed());
}

TEST_CASE("compactness members respect the common bound") {
  CompactnessPlan plan;
  plan.cells = 8;
  for (PerturbationFamily f : {PerturbationFamily::amplitude_decay, PerturbationFamily::shrinking_support,
                               PerturbationFamily::oscillatory_decay}) {
    plan.family = f;
    const GridPtr g = kvtest::channel(8, 8);
    for (int n : {1, 3, 16}) {
      const ScalarField nu = perturbed_viscosity(plan, g, n);
      CHECK(nu.min() >= 0.0);
      CHECK(nu.max() <= compactness_bound(plan) * (1 + 1e-14));
    }
  }
  CHECK(perturbation_family_from_string("shrinking_support") == PerturbationFamily::shrinking_support);
  CHECK_THROWS_WITH(perturbation_family_from_string("nope"), doctest::Contains("compactness.family"));
  plan.n_list = {};
  CHECK_THROWS_WITH(plan.validate(), doctest::Contains("compactness.n_list"));
}

TEST_CASE("manufactured flow is solenoidal and vanishes on the walls") {
  const ManufacturedFlow flow(MmsCase::voigt_van_driest(), TimeFactor::linear(1.0));
  const GridPtr g = kvtest::channel(32, 32);
  const VectorField v = flow.sample_velocity(g, 0.3);
  CHECK(max_divergence(v) < 1e-12);
  for (double x : {0.1, 0.6}) {
    CHECK(std::abs(flow.velocity(0, x, 0.0, 0.3)) < 1e-15);
    CHECK(std::abs(flow.velocity(1, x, 1.0, 0.3)) < 1e-15);
  }
}

TEST_CASE("mixing length slope matches a finite difference") {
  for (const MixingLengthProfile& p :
       {MixingLengthProfile::van_driest(), MixingLengthProfile::obukhov(), MixingLengthProfile::constant_length(0.3)})
    for (double z : {0.05, 0.3, 0.8}) {
      const double e = 1e-6;
      const double fd = (mixing_length_with_slope(p, z + e, 1.0).first - mixing_length_with_slope(p, z - e, 1.0).first) /
                        (2 * e);
      CHECK(mixing_length_with_slope(p, z, 1.0).second == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("manufactured error drops by four per refinement") {
  const double e16 = mms_error(MmsCase::newtonian(), TimeFactor::linear(1.0), 16, 0.02, 0.002);
  const double e32 = mms_error(MmsCase::newtonian(), TimeFactor::linear(1.0), 32, 0.02, 0.002);
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("constant mixing length reproduces the classical Voigt trajectory") {
  ReduceNsvConfig cfg;
  cfg.cells = 12;
  cfg.steps = 10;
  const ReduceNsvReport rep = reduce_nsv_check(cfg);
  CHECK(rep.passed);
  CHECK(rep.final_energy > 0.0);
}

TEST_CASE("verification suite on small grids") {
  VerifyConfig cfg;
  cfg.coarse = 16;
  cfg.fine = 32;
  cfg.samples = 10;
  const VerifyReport rep = verify_suite(cfg);
  for (const auto& it : rep.items) CHECK_MESSAGE(it.passed, it.name);
}
