#pragma once

#include <optional>
#include <stdexcept>

#include "kvflow/fields.hpp"
#include "kvflow/mixing_length.hpp"

namespace kvflow {

/// T_N(x): identity on [-N, N], clipped to +-N outside.
double truncate(double x, double n);

struct TkeConfig {
  /// Truncation height of the eddy viscosity.
  double n_visc = 10.0;
  /// Truncation height of the eddy diffusivity.
  double n_diff = 10.0;
  double c_diff = 1.0;
  /// Dissipation regularizer. Unset means 1e-3 times the wall-normal extent.
  std::optional<double> eta;
  /// Truncation height of the production term.
  double n_src = 10.0;

  void validate() const;
  double eta_for(const Grid& grid) const;
};

/// Cell-centered TKE with odd wall parity (k = 0 on the walls).
ScalarField make_k_field(const GridPtr& grid, double fill = 0.0);

/// nu_t = l T_N(sqrt|k|). Carries the wall parity of l.
ScalarField eddy_viscosity(const ScalarField& k, const ScalarField& ell, double n);
/// mu_t = C l T_N'(sqrt|k|).
ScalarField eddy_diffusivity(const ScalarField& k, const ScalarField& ell, double c, double n_prime);
/// l sqrt(alpha l) |Dv|, Frobenius norm at cell centers.
ScalarField smagorinsky_viscosity(const ScalarField& ell, double alpha, const TensorField& dv);
/// alpha l |Dv|^2.
ScalarField closure_k(double alpha, const ScalarField& ell, const TensorField& dv);

/// Thrown before stepping when the explicit upwind transport would lose positivity.
class CflError : public std::runtime_error {
 public:
  CflError(const std::string& what, double courant) : std::runtime_error(what), courant_(courant) {}
  double courant() const { return courant_; }

 private:
  double courant_;
};

/// dt times the largest total outflow rate of any cell.
double tke_courant(const VectorField& v, double dt);

/// Volume integrals of every term of one k step, as rates (per unit time).
struct TkeBudget {
  double total_before = 0.0;
  double total_after = 0.0;
  double advection = 0.0;
  double diffusion = 0.0;
  double production = 0.0;
  double dissipation = 0.0;
  /// Mass added by the final clip at zero (not a rate).
  double clipped_mass = 0.0;
  double courant = 0.0;
  /// |(after - before)/dt - (-advection + diffusion + production - dissipation) - clipped/dt|
  double residual = 0.0;
};

/// Production T_nsrc(nu_t(k) |Dv|^2) at cell centers.
ScalarField tke_source(const ScalarField& k, const ScalarField& ell, const TensorField& dv,
                       const TkeConfig& cfg);

/// One positivity-preserving step of
///   k_t + v.grad k - div(mu_t(k) grad k) = T_nsrc(nu_t(k)|Dv|^2) - k sqrt|k| / (l + eta)
/// Upwind explicit transport, implicit diffusion with mu_t(k^n), explicit
/// source, implicit sink k^{n+1} sqrt|k^n| / (l + eta), clip at zero.
ScalarField tke_step(const ScalarField& k, const VectorField& v, const TensorField& dv, const ScalarField& ell,
                     const TkeConfig& cfg, double dt, TkeBudget* budget = nullptr);
/// Same step with an explicitly given nonnegative source.
ScalarField tke_step_with_source(const ScalarField& k, const VectorField& v, const ScalarField& source,
                                 const ScalarField& ell, const TkeConfig& cfg, double dt,
                                 TkeBudget* budget = nullptr);

/// ||grad k||_{L^p} from face differences (wall faces use the odd ghost).
double gradient_lp_norm(const ScalarField& k, double p);

}  // namespace kvflow
