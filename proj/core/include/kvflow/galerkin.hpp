#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "kvflow/fields.hpp"

namespace kvflow {

/// One divergence-free trigonometric function on a periodic rectangle:
/// psi = sqrt(2/|Omega|) k_perp/|k| cos(k.x) (or sin), k = 2 pi (m1/Lx, m2/Lz).
struct GalerkinMode {
  std::array<int, 2> m{0, 1};
  bool sine = false;
};

/// The first n modes ordered by |m|^2, then m1, then m2; each wavevector of the
/// half plane contributes its cosine then its sine.
std::vector<GalerkinMode> galerkin_modes(int n);

using PlaneScalar = std::function<double(double x, double z)>;
using PlaneVector = std::function<std::array<double, 2>(double x, double z)>;

struct GalerkinConfig {
  int n = 8;
  double nu = 0.02;
  double alpha = 0.0;
  std::array<double, 2> extents{1.0, 1.0};
  /// Mixing length; must be nonnegative.
  PlaneScalar ell = [](double, double) { return 0.0; };
  /// Steady forcing (zero when unset).
  PlaneVector forcing;
  /// Quadrature points per axis; 0 picks a size exact for the products involved.
  int quadrature = 0;
};

/// c'(I + A) + c B + (c c) : Gamma = f for the coefficients of v = sum c_j psi_j,
/// with A_jm = alpha (l D psi_j, D psi_m), B_jm = 2 nu (D psi_j, D psi_m),
/// Gamma_jlm = ((psi_j . grad) psi_l, psi_m) and f_m = (f, psi_m).
struct GalerkinSystem {
  int n = 0;
  std::array<double, 2> extents{1.0, 1.0};
  std::vector<GalerkinMode> modes;
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
  std::vector<double> gamma;
  Eigen::VectorXd f;
  /// max |Gamma_jlm + Gamma_jml| of the assembled tensor.
  double skew_defect = 0.0;

  double gamma_at(int j, int l, int m) const { return gamma[(static_cast<std::size_t>(j) * n + l) * n + m]; }
  /// N_m = sum_jl c_j c_l Gamma_jlm.
  Eigen::VectorXd nonlinear(const Eigen::VectorXd& c) const;
  /// (1/2)(|c|^2 + c.A c).
  double energy(const Eigen::VectorXd& c) const;
  /// Value of psi_j at (x, z).
  std::array<double, 2> basis(int j, double x, double z) const;
  /// sum c_j psi_j sampled on the faces of a 2D periodic grid.
  VectorField to_grid(const Eigen::VectorXd& c, const GridPtr& grid) const;
};

/// Assembles the system by quadrature and checks that I + A admits a
/// Cholesky factorization (throws "galerkin_spd:" otherwise).
GalerkinSystem build_galerkin(const GalerkinConfig& cfg);

struct GalerkinTrajectory {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> c;
  std::vector<double> energy;
  /// Per-step residual of E^{n+1} - E^n + dt cm.B cm - dt cm.f.
  std::vector<double> step_residual;
  int max_picard = 0;
};

struct GalerkinIntegration {
  double t_end = 1.0;
  double dt = 0.01;
  double tol = 1e-13;
  int max_iter = 60;
  /// Drops Gamma (linearized system).
  bool linear = false;
};

/// Crank-Nicolson midpoint integration with Picard iteration, the same scheme
/// as the grid solver.
GalerkinTrajectory integrate_galerkin(const GalerkinSystem& sys, const Eigen::VectorXd& c0,
                                      const GalerkinIntegration& opts);

struct GalerkinAgreementConfig {
  int n = 8;
  /// Size of the reference system used to estimate truncation error.
  int n_ref = 48;
  int grid_cells = 32;
  double nu = 0.02;
  double alpha = 0.01;
  /// l(z) = ell0 (1 + ell_amp cos(2 pi z / Lz)).
  double ell0 = 0.1;
  double ell_amp = 0.5;
  double t_end = 0.5;
  double dt = 0.01;
};

struct GalerkinAgreementReport {
  bool spd_ok = false;
  double skew_defect = 0.0;
  std::vector<double> t;
  std::vector<double> e_galerkin;
  std::vector<double> e_grid;
  /// Per-sample allowed gap: both energy residuals plus three times each of the
  /// spatial (two-grid), temporal (dt vs 2dt) and truncation (n vs n_ref)
  /// estimates.
  std::vector<double> bound;
  double max_gap = 0.0;
  double max_ratio = 0.0;
  double galerkin_residual = 0.0;
  double grid_residual = 0.0;
  bool agree = false;
};

GalerkinAgreementReport galerkin_agreement(const GalerkinAgreementConfig& cfg);

}  // namespace kvflow
