#include "kvflow/mms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kvflow/flow_solver.hpp"

namespace kvflow {

namespace {

constexpr double kPi = std::numbers::pi;

VectorField final_velocity(const ManufacturedFlow& flow, const TimeFactor& time, int cells, double t_end,
                           double dt) {
  const MmsCase& c = flow.mms_case();
  const GridPtr grid = build_grid(GridSpec::channel2d(c.length, c.height, cells, cells));
  PhysicsConfig phys;
  phys.nu = c.nu;
  phys.alpha = c.alpha;
  phys.profile = c.profile;
  phys.forcing.unsteady = [flow, grid](double t) { return flow.sample_source(grid, t); };
  SchemeConfig sch;
  sch.dt = dt;
  sch.t_end = t_end;
  const FlowSolver solver(grid, phys, sch);
  State s = solver.initial_state(flow.sample_velocity(grid, 0.0));
  for (std::int64_t i = 0; i < sch.step_count(); ++i) s = solver.step(s);
  (void)time;
  return s.v;
}

}  // namespace

MmsCase MmsCase::newtonian() { return MmsCase{}; }

MmsCase MmsCase::voigt_van_driest() {
  MmsCase c;
  c.name = "voigt_van_driest";
  c.alpha = 0.05;
  c.profile = MixingLengthProfile::van_driest();
  return c;
}

TimeFactor TimeFactor::linear(double amplitude) {
  return {[amplitude](double t) { return amplitude * (1.0 + t); }, [amplitude](double) { return amplitude; }};
}

TimeFactor TimeFactor::oscillating(double amplitude) {
  return {[amplitude](double t) { return amplitude * (1.0 + 0.5 * std::sin(2.0 * t)); },
          [amplitude](double t) { return amplitude * std::cos(2.0 * t); }};
}

std::pair<double, double> mixing_length_with_slope(const MixingLengthProfile& profile, double z, double height) {
  const double rho = std::min(z, height - z);
  const double side = z < 0.5 * height ? 1.0 : (z > 0.5 * height ? -1.0 : 0.0);
  const double ell = profile.evaluate(rho, z, height);
  switch (profile.kind) {
    case MixingLengthProfile::Kind::obukhov:
      return {ell, side * profile.kappa};
    case MixingLengthProfile::Kind::van_driest: {
      const double a = profile.damping_length(height);
      const double e = std::exp(-rho / a);
      return {ell, side * profile.kappa * ((1.0 - e) + rho * e / a)};
    }
    case MixingLengthProfile::Kind::constant:
      return {ell, 0.0};
    case MixingLengthProfile::Kind::tabulated: {
      const int m = static_cast<int>(profile.samples.size());
      const double s = std::clamp(z / height * (m - 1), 0.0, static_cast<double>(m - 1));
      const int i = std::min(static_cast<int>(s), m - 2);
      return {ell, (profile.samples[i + 1] - profile.samples[i]) * (m - 1) / height};
    }
  }
  return {ell, 0.0};
}

ManufacturedFlow::ManufacturedFlow(MmsCase c, TimeFactor time) : case_(std::move(c)), time_(std::move(time)) {}

ManufacturedFlow::Shape ManufacturedFlow::shape(double x, double z) const {
  const double k = 2.0 * kPi / case_.length;
  const double q = 2.0 * kPi / case_.height;
  const double a = case_.mean;
  const double s0 = std::sin(k * x), s1 = k * std::cos(k * x), s2 = -k * k * std::sin(k * x),
               s3 = -k * k * k * std::cos(k * x);
  const double z0 = 0.5 * (1.0 - std::cos(q * z)), z1 = 0.5 * q * std::sin(q * z), z2 = 0.5 * q * q * std::cos(q * z),
               z3 = -0.5 * q * q * q * std::sin(q * z);
  const auto [ell, dell] = mixing_length_with_slope(case_.profile, z, case_.height);

  const double u = s0 * z1 + a * z0;
  const double w = -s1 * z0;
  const double ux = s1 * z1, uz = s0 * z2 + a * z1;
  const double wx = -s2 * z0, wz = -s1 * z1;
  const double dxz = 0.5 * (s0 * z2 + a * z1 - s2 * z0);

  Shape sh;
  sh.v = {u, w};
  sh.adv = {u * ux + w * uz, u * wx + w * wz};
  sh.lap = {s2 * z1 + s0 * z3 + a * z2, -s3 * z0 - s1 * z2};
  // div(l D v) with l = l(z).
  sh.voigt = {ell * s2 * z1 + dell * dxz + ell * 0.5 * (s0 * z3 + a * z2 - s2 * z1),
              ell * 0.5 * (s1 * z2 - s3 * z0) - dell * s1 * z1 - ell * s1 * z2};
  return sh;
}

double ManufacturedFlow::velocity(int d, double x, double z, double t) const {
  return case_.amplitude * time_.g(t) * shape(x, z).v[d];
}

double ManufacturedFlow::source(int d, double x, double z, double t) const {
  const Shape sh = shape(x, z);
  const double g = case_.amplitude * time_.g(t);
  const double dg = case_.amplitude * time_.dg(t);
  return dg * (sh.v[d] - case_.alpha * sh.voigt[d]) + g * g * sh.adv[d] - case_.nu * g * sh.lap[d];
}

VectorField ManufacturedFlow::sample_velocity(const GridPtr& grid, double t) const {
  return VectorField::sample(grid, [&](int d, const std::array<double, 3>& x) { return velocity(d, x[0], x[1], t); });
}

VectorField ManufacturedFlow::sample_source(const GridPtr& grid, double t) const {
  return VectorField::sample(grid, [&](int d, const std::array<double, 3>& x) { return source(d, x[0], x[1], t); });
}

double mms_error(const MmsCase& c, const TimeFactor& time, int cells, double t_end, double dt) {
  const ManufacturedFlow flow(c, time);
  const GridPtr grid = build_grid(GridSpec::channel2d(c.length, c.height, cells, cells));
  VectorField e = final_velocity(flow, time, cells, t_end, dt);
  e -= flow.sample_velocity(grid, std::llround(t_end / dt) * dt);
  return norm(e);
}

MmsReport mms_convergence(const MmsCase& c, const MmsOptions& options) {
  if (options.resolutions.size() < 2) throw std::invalid_argument("mms.resolutions: need at least two");
  MmsReport rep;
  rep.name = c.name;
  rep.resolutions = options.resolutions;
  const TimeFactor linear = TimeFactor::linear(1.0);
  for (int n : options.resolutions)
    rep.spatial_errors.push_back(mms_error(c, linear, n, options.space_t_end, options.space_dt));
  rep.min_spatial_order = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rep.spatial_errors.size(); ++i) {
    const double ratio = rep.spatial_errors[i - 1] / rep.spatial_errors[i];
    const double order = std::log(ratio) / std::log(static_cast<double>(rep.resolutions[i]) / rep.resolutions[i - 1]);
    rep.spatial_orders.push_back(order);
    rep.min_spatial_order = std::min(rep.min_spatial_order, order);
  }

  const TimeFactor osc = TimeFactor::oscillating(1.0);
  const ManufacturedFlow flow(c, osc);
  rep.min_temporal_order = std::numeric_limits<double>::infinity();
  for (int n : options.resolutions) {
    const double dt = options.time_dt;
    const VectorField a = final_velocity(flow, osc, n, options.time_t_end, dt);
    const VectorField b = final_velocity(flow, osc, n, options.time_t_end, dt / 2);
    const VectorField q = final_velocity(flow, osc, n, options.time_t_end, dt / 4);
    VectorField d1 = a;
    d1 -= b;
    VectorField d2 = b;
    d2 -= q;
    rep.temporal_differences.push_back({norm(d1), norm(d2)});
    const double order = std::log2(norm(d1) / norm(d2));
    rep.temporal_orders.push_back(order);
    rep.min_temporal_order = std::min(rep.min_temporal_order, order);
  }
  rep.passed = rep.min_spatial_order >= options.threshold && rep.min_temporal_order >= options.threshold;
  return rep;
}

}  // namespace kvflow
