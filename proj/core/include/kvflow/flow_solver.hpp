#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "kvflow/fields.hpp"
#include "kvflow/mixing_length.hpp"
#include "kvflow/spectral.hpp"

namespace kvflow {

/// Body force. Either empty (zero), a steady field, or a function of time.
struct Forcing {
  std::optional<VectorField> steady;
  std::function<VectorField(double t)> unsteady;

  bool is_zero() const { return !steady && !unsteady; }
  bool is_steady() const { return !unsteady; }
  /// f(t); a zero field when no forcing is set.
  VectorField at(double t, const GridPtr& grid) const;

  static Forcing none() { return {}; }
  static Forcing constant(VectorField f);
  /// Uniform body force along the periodic axes, e.g. a mean pressure gradient.
  static Forcing uniform(const GridPtr& grid, std::array<double, 3> value);
};

/// Form of the Kelvin-Voigt term.
enum class VoigtForm {
  /// -alpha div(l D v_t), the general form.
  deformation,
  /// -(alpha l0 / 2) Laplacian v_t with l = l0 constant; the classical model.
  laplacian,
};

std::string to_string(VoigtForm form);
VoigtForm voigt_form_from_string(const std::string& name);

/// Prescribed eddy viscosity nu_t(t, x) >= 0 at the cells.
using EddyViscosityFn = std::function<ScalarField(double t)>;

struct PhysicsConfig {
  double nu = 0.01;
  double alpha = 0.0;
  MixingLengthProfile profile = MixingLengthProfile::constant_length(0.0);
  VoigtForm voigt_form = VoigtForm::deformation;
  Forcing forcing;
  EddyViscosityFn eddy_viscosity;
  /// Every nu_t handed to the solver must satisfy 0 <= nu_t <= eddy_bound.
  double eddy_bound = std::numeric_limits<double>::infinity();

  void validate() const;
};

struct SchemeConfig {
  double dt = 1e-3;
  double t_end = 1e-3;
  double tol_picard = 1e-10;
  int max_picard = 50;
  /// Bound on max |div v| after a step.
  double tol_proj = 1e-10;
  /// Relative residual of the inner conjugate-gradient solves.
  double tol_linear = 1e-13;
  int max_linear = 1000;

  void validate() const;
  std::int64_t step_count() const;
};

struct State {
  double t = 0.0;
  std::int64_t step = 0;
  VectorField v;
  /// Zero-mean pressure from the last step.
  ScalarField p;
};

struct StepStats {
  int picard_iters = 0;
  double picard_residual = 0.0;
  int linear_iters = 0;
  double linear_residual = 0.0;
  double div_max = 0.0;
};

/// Thrown when an iteration stops without reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double residual)
      : std::runtime_error(message(what, iterations, residual)),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  static std::string message(const std::string& what, int iterations, double residual) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (iterations %d, residual %.3e)", iterations, residual);
    return what + buf;
  }
  int iterations_;
  double residual_;
};

/// Crank-Nicolson / implicit-midpoint integrator for
///   M v_t - div((2 nu + nu_t) D v) + (v . grad) v + grad p = f,  div v = 0,
/// with M = I - alpha div(l D .). The advection term is evaluated at the
/// midpoint and resolved by Picard iteration; each Picard sweep solves the
/// linear midpoint system by preconditioned conjugate gradients restricted to
/// discretely solenoidal fields.
class FlowSolver {
 public:
  FlowSolver(GridPtr grid, PhysicsConfig physics, SchemeConfig scheme);

  const GridPtr& grid() const { return grid_; }
  const PhysicsConfig& physics() const { return physics_; }
  const SchemeConfig& scheme() const { return scheme_; }
  const ScalarField& mixing_length() const { return ell_; }
  const PressureSolver& pressure_solver() const { return *pressure_; }

  /// Projects v0 onto the solenoidal space; t = 0, step 0.
  State initial_state(const VectorField& v0) const;

  /// One step with nu_t from the physics config (zero when unset).
  State step(const State& s, StepStats* stats = nullptr) const;
  /// One step with an explicit midpoint eddy viscosity (nullptr = zero).
  State step(const State& s, const ScalarField* nu_t, StepStats* stats = nullptr) const;

  /// Eddy viscosity of the physics config at time t (nullopt when unset).
  std::optional<ScalarField> eddy_viscosity_at(double t) const;

  /// E = (1/2) <M v, v>.
  double energy(const VectorField& v) const;
  /// ||(2 nu + nu_t)^{1/2} D v||^2 with nu_t sampled as in the step.
  double dissipation_rate(const VectorField& v, const ScalarField* nu_t) const;
  /// <f(t), v>.
  double work_rate(double t, const VectorField& v) const;

  /// The linear part applied by the step: sigma M v - div(c D v) with
  /// c = nu + nu_t / 2 (the Crank-Nicolson left-hand side).
  VectorField apply_lhs(const VectorField& v, const FluxCoefficient& c_implicit) const;

 private:
  FluxCoefficient viscous_coefficient(const ScalarField* nu_t, double scale) const;
  void check_eddy_viscosity(const ScalarField& nu_t) const;

  GridPtr grid_;
  PhysicsConfig physics_;
  SchemeConfig scheme_;
  ScalarField ell_;
  FluxCoefficient ell_flux_;
  double gamma2_ = 0.0;
  std::shared_ptr<const PressureSolver> pressure_;
};

}  // namespace kvflow
