#include "kvflow/flow_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "kvflow/advection.hpp"
#include "kvflow/operators.hpp"

namespace kvflow {

VectorField Forcing::at(double t, const GridPtr& grid) const {
  if (unsteady) return unsteady(t);
  if (steady) return *steady;
  return VectorField(grid);
}

Forcing Forcing::constant(VectorField f) {
  Forcing out;
  out.steady = std::move(f);
  return out;
}

Forcing Forcing::uniform(const GridPtr& grid, std::array<double, 3> value) {
  return constant(VectorField::sample(grid, [value](int d, const auto&) { return value[d]; }));
}

std::string to_string(VoigtForm form) {
  return form == VoigtForm::laplacian ? "laplacian" : "deformation";
}

VoigtForm voigt_form_from_string(const std::string& name) {
  if (name == "deformation") return VoigtForm::deformation;
  if (name == "laplacian") return VoigtForm::laplacian;
  throw std::invalid_argument("physics.voigt_form: expected 'deformation' or 'laplacian', got '" + name + "'");
}

void PhysicsConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw std::invalid_argument("physics.nu: must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw std::invalid_argument("physics.alpha: must be nonnegative");
  profile.validate();
  if (voigt_form == VoigtForm::laplacian && profile.kind != MixingLengthProfile::Kind::constant)
    throw std::invalid_argument("physics.voigt_form: the laplacian form needs a constant mixing length");
  if (!(eddy_bound > 0.0)) throw std::invalid_argument("physics.eddy_bound: must be positive");
}

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("scheme.dt: must be positive");
  if (!(t_end >= dt * (1.0 - 1e-12))) throw std::invalid_argument("scheme.t_end: must be at least scheme.dt");
  if (!(tol_picard > 0.0)) throw std::invalid_argument("scheme.tol_picard: must be positive");
  if (!(tol_proj > 0.0)) throw std::invalid_argument("scheme.tol_proj: must be positive");
  if (!(tol_linear > 0.0)) throw std::invalid_argument("scheme.tol_linear: must be positive");
  if (max_picard < 1) throw std::invalid_argument("scheme.max_picard: must be at least 1");
  if (max_linear < 1) throw std::invalid_argument("scheme.max_linear: must be at least 1");
}

std::int64_t SchemeConfig::step_count() const { return std::llround(t_end / dt); }

FlowSolver::FlowSolver(GridPtr grid, PhysicsConfig physics, SchemeConfig scheme)
    : grid_(std::move(grid)), physics_(std::move(physics)), scheme_(scheme) {
  physics_.validate();
  scheme_.validate();
  ell_ = eval_mixing_length(physics_.profile, grid_);
  ell_flux_ = sample_flux_points(ell_);
  if (physics_.voigt_form == VoigtForm::laplacian) gamma2_ = 0.5 * physics_.alpha * physics_.profile.constant;
  pressure_ = std::make_shared<PressureSolver>(grid_);
}

State FlowSolver::initial_state(const VectorField& v0) const {
  require_same_grid(grid_, v0.grid(), "initial_state");
  State s;
  s.v = v0;
  s.v.enforce_wall_bc();
  pressure_->project(s.v);
  s.p = ScalarField(grid_, 0.0);
  return s;
}

std::optional<ScalarField> FlowSolver::eddy_viscosity_at(double t) const {
  if (!physics_.eddy_viscosity) return std::nullopt;
  return physics_.eddy_viscosity(t);
}

void FlowSolver::check_eddy_viscosity(const ScalarField& nu_t) const {
  require_same_grid(grid_, nu_t.grid(), "eddy viscosity");
  if (!nu_t.all_finite()) throw std::runtime_error("eddy_viscosity_bounded: non-finite eddy viscosity");
  if (nu_t.min() < 0.0) throw std::runtime_error("eddy_viscosity_bounded: negative eddy viscosity");
  if (nu_t.max() > physics_.eddy_bound)
    throw std::runtime_error("eddy_viscosity_bounded: eddy viscosity exceeds physics.eddy_bound");
}

FluxCoefficient FlowSolver::viscous_coefficient(const ScalarField* nu_t, double scale) const {
  // scale * (2 nu + nu_t) at every flux point.
  if (nu_t == nullptr) return constant_flux_coefficient(*grid_, 2.0 * scale * physics_.nu);
  const FluxCoefficient nf = sample_flux_points(*nu_t);
  return combine(nf, scale, nullptr, 0.0, 2.0 * scale * physics_.nu);
}

VectorField FlowSolver::apply_lhs(const VectorField& v, const FluxCoefficient& c_implicit) const {
  const double sigma = 1.0 / scheme_.dt;
  VectorField out = v;
  out *= sigma;
  out.axpy(-1.0, stress_divergence(c_implicit, v));
  if (gamma2_ != 0.0) out.axpy(-sigma * gamma2_, vector_laplacian(v));
  return out;
}

State FlowSolver::step(const State& s, StepStats* stats) const {
  const std::optional<ScalarField> nu_t = eddy_viscosity_at(s.t + 0.5 * scheme_.dt);
  return step(s, nu_t ? &*nu_t : nullptr, stats);
}

State FlowSolver::step(const State& s, const ScalarField* nu_t, StepStats* stats) const {
  require_same_grid(grid_, s.v.grid(), "FlowSolver::step");
  if (nu_t) check_eddy_viscosity(*nu_t);
  const double dt = scheme_.dt;
  const double sigma = 1.0 / dt;
  const double t_mid = s.t + 0.5 * dt;
  const PressureSolver& ps = *pressure_;

  // Implicit and explicit halves of the Crank-Nicolson split.
  const FluxCoefficient visc = viscous_coefficient(nu_t, 0.5);
  FluxCoefficient c_a = visc;
  FluxCoefficient c_b = combine(visc, -1.0, nullptr, 0.0);
  if (physics_.voigt_form == VoigtForm::deformation && physics_.alpha > 0.0) {
    c_a = combine(visc, 1.0, &ell_flux_, sigma * physics_.alpha);
    c_b = combine(visc, -1.0, &ell_flux_, sigma * physics_.alpha);
  }

  VectorField base = s.v;
  base *= sigma;
  base.axpy(-1.0, stress_divergence(c_b, s.v));
  if (gamma2_ != 0.0) base.axpy(-sigma * gamma2_, vector_laplacian(s.v));
  if (!physics_.forcing.is_zero()) base += physics_.forcing.at(t_mid, grid_);

  const VelocityPreconditioner precond(grid_, c_a, sigma, 2.0 * sigma * gamma2_);

  StepStats st;
  VectorField x = s.v;
  VectorField rhs;
  bool converged = false;
  for (int k = 1; k <= scheme_.max_picard; ++k) {
    VectorField a = s.v;
    a += x;
    a *= 0.5;
    rhs = base;
    rhs.axpy(-1.0, advect(a, a));

    // Projected PCG on the solenoidal subspace, warm-started from x.
    VectorField xn = x;
    const VectorField b = ps.projected(rhs);
    VectorField r = b;
    r.axpy(-1.0, ps.projected(apply_lhs(xn, c_a)));
    const double bnorm = norm(b);
    double rnorm = norm(r);
    int it = 0;
    if (rnorm > scheme_.tol_linear * bnorm) {
      VectorField z = ps.projected(precond.apply(r));
      VectorField p = z;
      double rz = dot(r, z);
      for (it = 1; it <= scheme_.max_linear; ++it) {
        const VectorField ap = ps.projected(apply_lhs(p, c_a));
        const double step_len = rz / dot(p, ap);
        xn.axpy(step_len, p);
        r.axpy(-step_len, ap);
        rnorm = norm(r);
        if (rnorm <= scheme_.tol_linear * bnorm) break;
        z = ps.projected(precond.apply(r));
        const double rz_new = dot(r, z);
        p *= rz_new / rz;
        p += z;
        rz = rz_new;
      }
      if (it > scheme_.max_linear) {
        it = scheme_.max_linear;
        if (rnorm > 1e3 * scheme_.tol_linear * bnorm)
          throw ConvergenceError("elliptic solve did not converge", it, rnorm / bnorm);
      }
    }
    st.linear_iters += it;
    st.linear_residual = bnorm > 0.0 ? rnorm / bnorm : 0.0;

    VectorField delta = xn;
    delta -= x;
    x = std::move(xn);
    st.picard_iters = k;
    st.picard_residual = norm(delta) / std::max(1.0, norm(x));
    if (k >= 2 && st.picard_residual <= scheme_.tol_picard) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("Picard iteration did not converge", st.picard_iters, st.picard_residual);

  State out;
  out.t = s.t + dt;
  out.step = s.step + 1;
  // Pressure: grad p carries the non-solenoidal part of rhs - A x.
  VectorField gp = rhs;
  gp.axpy(-1.0, apply_lhs(x, c_a));
  out.p = ps.solve(divergence(gp));
  ps.project(x);
  out.v = std::move(x);
  st.div_max = max_divergence(out.v);
  if (!out.v.all_finite()) throw std::runtime_error("fields_finite: non-finite velocity after step");
  if (st.div_max > scheme_.tol_proj)
    throw std::runtime_error("divergence_free: max |div v| exceeds scheme.tol_proj");
  if (stats) *stats = st;
  return out;
}

double FlowSolver::energy(const VectorField& v) const {
  double e = dot(v, v);
  if (gamma2_ != 0.0) {
    e += gamma2_ * gradient_norm_squared(velocity_gradient(v));
  } else if (physics_.alpha > 0.0) {
    const TensorField dv = deformation(v);
    e += physics_.alpha * tensor_dot(dv, dv, ell_flux_);
  }
  return 0.5 * e;
}

double FlowSolver::dissipation_rate(const VectorField& v, const ScalarField* nu_t) const {
  const TensorField dv = deformation(v);
  return tensor_dot(dv, dv, viscous_coefficient(nu_t, 1.0));
}

double FlowSolver::work_rate(double t, const VectorField& v) const {
  if (physics_.forcing.is_zero()) return 0.0;
  return dot(physics_.forcing.at(t, grid_), v);
}

}  // namespace kvflow
