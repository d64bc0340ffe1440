#include "kvflow/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kvflow/norms.hpp"
#include "kvflow/operators.hpp"

namespace kvflow {

namespace {

double grad_sq(const VectorField& v) { return gradient_norm_squared(velocity_gradient(v)); }

/// Cumulative trapezoidal integral of y over t.
std::vector<double> cumulative_trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  std::vector<double> out(t.size(), 0.0);
  for (std::size_t i = 1; i < t.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return out;
}

}  // namespace

double EnergyLedger::max_step_residual() const {
  double m = 0.0;
  for (const LedgerEntry& e : entries) m = std::max(m, std::abs(e.step_residual));
  return m;
}

EnergyLedger start_ledger(const FlowSolver& solver, const State& s0) {
  EnergyLedger ledger;
  LedgerEntry e;
  e.step = s0.step;
  e.t = s0.t;
  e.energy = solver.energy(s0.v);
  e.grad_sq = grad_sq(s0.v);
  const double hh = std::sqrt(std::max(0.0, laplacian_power_form(s0.v, 0.5))) + norm(s0.v);
  e.h_half_sq = hh * hh;
  ledger.entries.push_back(e);
  return ledger;
}

void energy_update(EnergyLedger& ledger, const FlowSolver& solver, const State& old, const State& next,
                   const ScalarField* nu_t) {
  if (ledger.empty()) throw std::logic_error("energy_update: ledger not started");
  const double dt = next.t - old.t;
  const double t_mid = old.t + 0.5 * dt;

  VectorField mid = old.v;
  mid += next.v;
  mid *= 0.5;

  std::optional<ScalarField> cfg_nu_t;
  if (nu_t == nullptr) {
    cfg_nu_t = solver.eddy_viscosity_at(t_mid);
    if (cfg_nu_t) nu_t = &*cfg_nu_t;
  }

  const LedgerEntry& prev = ledger.back();
  LedgerEntry e;
  e.step = next.step;
  e.t = next.t;
  e.energy = solver.energy(next.v);
  const double diss = dt * solver.dissipation_rate(mid, nu_t);
  const double work = dt * solver.work_rate(t_mid, mid);
  e.dissipation_cum = prev.dissipation_cum + diss;
  e.work_cum = prev.work_cum + work;
  e.step_residual = e.energy - prev.energy + diss - work;
  e.balance_residual =
      std::abs(e.energy + e.dissipation_cum - ledger.entries.front().energy - e.work_cum);
  e.grad_sq = grad_sq(next.v);
  const double hh = std::sqrt(std::max(0.0, laplacian_power_form(next.v, 0.5))) + norm(next.v);
  e.h_half_sq = hh * hh;

  VectorField rate = next.v;
  rate -= old.v;
  rate *= 1.0 / dt;
  // 2 E(w) - ||w||^2 is the Voigt part of the energy norm.
  e.voigt_rate_sq = std::max(0.0, 2.0 * solver.energy(rate) - dot(rate, rate));
  ledger.entries.push_back(e);
}

std::vector<double> gronwall_envelope(const std::vector<double>& t, const std::vector<double>& lambda,
                                      const std::vector<double>& g) {
  if (t.size() != lambda.size() || t.size() != g.size())
    throw std::invalid_argument("gronwall_envelope: series lengths differ");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(lambda[i] >= 0.0)) throw std::invalid_argument("gronwall_envelope: lambda must be nonnegative");
    if (i > 0 && g[i] < g[i - 1]) throw std::invalid_argument("gronwall_envelope: g must be nondecreasing");
    if (i > 0 && t[i] < t[i - 1]) throw std::invalid_argument("gronwall_envelope: times must increase");
  }
  const std::vector<double> integral = cumulative_trapezoid(t, lambda);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = g[i] * std::exp(integral[i]);
  return out;
}

AprioriReport apriori_check(const EnergyLedger& ledger, const FlowSolver& solver,
                            const AprioriOptions& options) {
  const PhysicsConfig& phys = solver.physics();
  if (!phys.forcing.is_steady()) throw std::invalid_argument("apriori_check: needs a steady forcing");
  AprioriReport rep;
  if (ledger.empty()) return rep;
  const GridPtr& grid = solver.grid();
  const double nu = phys.nu;
  const double alpha = phys.alpha;

  if (!phys.forcing.is_zero()) rep.F = laplacian_power_form(phys.forcing.at(0.0, grid), -1.0);

  const std::size_t n = ledger.entries.size();
  std::vector<double> t(n);
  std::vector<double> gsq(n);
  std::vector<double> gsq2(n);
  std::vector<double> voigt_int(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const LedgerEntry& e = ledger.entries[i];
    t[i] = e.t - ledger.entries.front().t;
    gsq[i] = e.grad_sq;
    gsq2[i] = e.grad_sq * e.grad_sq;
    if (i > 0) voigt_int[i] = voigt_int[i - 1] + (t[i] - t[i - 1]) * e.voigt_rate_sq;
  }
  const std::vector<double> int_gsq = cumulative_trapezoid(t, gsq);
  const std::vector<double> int_gsq2 = cumulative_trapezoid(t, gsq2);
  const double e0 = ledger.entries.front().energy;
  const double f0 = nu * gsq[0];
  const double big_t = t.back();

  // (a)
  if (alpha > 0.0) {
    const InequalityReport hr = h_half_estimate_check(options.samples, grid, solver.mixing_length(), options.seed);
    rep.c_half = hr.worst_ratio;
    rep.c_a = 2.0 + 2.0 * rep.c_half * rep.c_half / alpha;
  } else {
    rep.c_half = std::numeric_limits<double>::infinity();
    rep.c_a = std::numeric_limits<double>::infinity();
  }
  std::vector<double> lhs_a(n);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lhs_a[i] = ledger.entries[i].h_half_sq + nu * int_gsq[i];
    const double rhs = rep.F * t[i] / nu + e0;
    if (rhs > 0.0) rep.observed_a = std::max(rep.observed_a, lhs_a[i] / rhs);
    if (lhs_a[i] > rep.c_a * rhs * (1.0 + 1e-12) + 1e-300) rep.a_holds = false;
    sx += t[i];
    sy += lhs_a[i];
    sxx += t[i] * t[i];
    sxy += t[i] * lhs_a[i];
  }
  const double nn = static_cast<double>(n);
  const double den = nn * sxx - sx * sx;
  if (den > 0.0) {
    rep.a_slope = (nn * sxy - sx * sy) / den;
    rep.a_intercept = (sy - rep.a_slope * sx) / nn;
    double ss_res = 0.0, ss_tot = 0.0;
    const double mean = sy / nn;
    for (std::size_t i = 0; i < n; ++i) {
      const double fit = rep.a_intercept + rep.a_slope * t[i];
      ss_res += (lhs_a[i] - fit) * (lhs_a[i] - fit);
      ss_tot += (lhs_a[i] - mean) * (lhs_a[i] - mean);
    }
    rep.a_r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  }

  // (b)
  rep.times = t;
  rep.f_b.resize(n);
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.f_b[i] = nu * gsq[i];
    g[i] = f0 + rep.F * t[i];
    const double excess = voigt_int[i] + rep.f_b[i] - g[i];
    if (excess > 0.0) {
      rep.c_gronwall = int_gsq2[i] > 0.0 ? std::max(rep.c_gronwall, excess / int_gsq2[i])
                                         : std::numeric_limits<double>::infinity();
    }
  }
  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) lambda[i] = rep.c_gronwall * gsq[i] / nu;
  if (std::isfinite(rep.c_gronwall)) {
    rep.envelope_b = gronwall_envelope(t, lambda, g);
  } else {
    rep.envelope_b.assign(n, std::numeric_limits<double>::infinity());
  }
  rep.closed_envelope_b.resize(n);
  rep.b_min_margin = std::numeric_limits<double>::infinity();
  const double c = rep.c_gronwall;
  auto closed = [&](double s) {
    if (c == 0.0) return f0 + rep.F * s;
    return (f0 + rep.F * s) * std::exp(c / (nu * nu) * (2.0 * e0 + rep.F * s / nu));
  };
  for (std::size_t i = 0; i < n; ++i) {
    rep.closed_envelope_b[i] = closed(t[i]);
    const double bound = rep.envelope_b[i];
    if (rep.f_b[i] > bound * (1.0 + 1e-12) + 1e-300) rep.b_holds = false;
    if (rep.f_b[i] > rep.closed_envelope_b[i] * (1.0 + 1e-12) + 1e-300) rep.b_holds = false;
    if (bound > 0.0) rep.b_min_margin = std::min(rep.b_min_margin, (bound - rep.f_b[i]) / bound);
  }

  // (c)
  const double sup_grad = closed(big_t) / nu;
  rep.lhs_c = voigt_int;
  rep.envelope_c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.envelope_c[i] = rep.F * t[i] + f0 + c * sup_grad * (2.0 * e0 + rep.F * t[i] / nu) / nu;
    if (!std::isfinite(rep.lhs_c[i]) || rep.lhs_c[i] > rep.envelope_c[i] * (1.0 + 1e-12) + 1e-300)
      rep.c_holds = false;
  }
  return rep;
}

}  // namespace kvflow
