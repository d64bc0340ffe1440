#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "kvflow/mixing_length.hpp"
#include "kvflow/operators.hpp"
#include "kvflow/spectral.hpp"
#include "test_support.hpp"

using namespace kvflow;

TEST_CASE("axis bases diagonalize the second difference") {
  const int n = 8;
  const double h = 0.125;
  for (BasisKind kind : {BasisKind::periodic, BasisKind::dirichlet_cell, BasisKind::dirichlet_face,
                         BasisKind::neumann_cell}) {
    const AxisBasis& b = axis_basis(kind, n, h);
    const Eigen::MatrixXd id = b.q.transpose() * b.q;
    CHECK((id - Eigen::MatrixXd::Identity(id.rows(), id.cols())).norm() < 1e-12);
    for (int i = 0; i + 1 < b.lambda.size(); ++i) CHECK(b.lambda(i) <= b.lambda(i + 1) + 1e-9);
  }
  // Closed forms: periodic 4 sin^2(pi m / n) / h^2, Dirichlet-face 4 sin^2(pi m / 2n) / h^2.
  const AxisBasis& p = axis_basis(BasisKind::periodic, n, h);
  CHECK(p.lambda(n - 1) == doctest::Approx(4.0 / (h * h)));
  const AxisBasis& f = axis_basis(BasisKind::dirichlet_face, n, h);
  const double pi = std::acos(-1.0);
  CHECK(f.lambda(0) == doctest::Approx(4.0 * std::pow(std::sin(pi / (2.0 * n)), 2) / (h * h)));
}

TEST_CASE("projection leaves a discretely solenoidal field") {
  for (const GridPtr& g : {kvtest::channel(16, 12), kvtest::box(12, 16),
                           build_grid(GridSpec::channel3d(1.0, 1.0, 1.0, 6, 8, 6))}) {
    const PressureSolver ps(g);
    VectorField v = kvtest::random_field(g, 3);
    ps.project(v);
    CHECK(max_divergence(v) < 1e-10);
    CHECK(v.solenoidal());
    // Projection is idempotent.
    const VectorField again = ps.projected(v);
    VectorField d = again;
    d -= v;
    CHECK(max_abs(d) < 1e-12);
  }
}

TEST_CASE("poisson solve inverts the cell Laplacian") {
  const GridPtr g = kvtest::channel(10, 8);
  const PressureSolver ps(g);
  ScalarField r = kvtest::random_scalar(g, 9);
  const double mean = r.integral() / g->domain_volume();
  for (double& x : r.values().values()) x -= mean;
  const ScalarField phi = ps.solve(r);
  const ScalarField back = cell_laplacian(phi);
  for (std::size_t i = 0; i < r.values().size(); ++i)
    CHECK(back.values().values()[i] == doctest::Approx(r.values().values()[i]).epsilon(1e-9));
}

TEST_CASE("fractional power matches a dense eigensolve") {
  // Oracle: assemble -vector_laplacian column by column and eigendecompose.
  const GridPtr g = kvtest::channel(6, 5);
  const VectorField v = kvtest::random_field(g, 77);
  std::vector<std::pair<int, std::size_t>> unknowns;
  for (int d = 0; d < g->dim(); ++d) {
    const Array3& c = v.component(d);
    for_each_index(c.shape(), [&](int i, int j, int k) {
      if (d == 1 && (j == 0 || j == g->cells(1))) return;
      unknowns.emplace_back(d, c.offset(i, j, k));
    });
  }
  const int n = static_cast<int>(unknowns.size());
  Eigen::MatrixXd a(n, n);
  for (int col = 0; col < n; ++col) {
    VectorField e(g);
    e.component(unknowns[col].first).data()[unknowns[col].second] = 1.0;
    const VectorField le = vector_laplacian(e);
    for (int row = 0; row < n; ++row)
      a(row, col) = -le.component(unknowns[row].first).data()[unknowns[row].second];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  Eigen::VectorXd x(n);
  for (int r = 0; r < n; ++r) x(r) = v.component(unknowns[r].first).data()[unknowns[r].second];
  const Eigen::VectorXd half =
      es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose() * x;
  const double dense = x.dot(half) * g->cell_volume();
  CHECK(laplacian_power_form(v, 0.5) == doctest::Approx(dense).epsilon(1e-10));
  CHECK(laplacian_power_form(v, 1.0) ==
        doctest::Approx(gradient_norm_squared(velocity_gradient(v))).epsilon(1e-10));

  const VectorField hv = laplacian_power(v, 0.5);
  CHECK(dot(hv, v) == doctest::Approx(dense).epsilon(1e-10));
}

TEST_CASE("preconditioner inverts the averaged operator exactly for constant coefficients") {
  // For constant c the channel preconditioner is (sigma - c/2 Laplacian)^{-1}.
  const GridPtr g = kvtest::channel(8, 8);
  const double c = 0.3;
  const double sigma = 10.0;
  const VelocityPreconditioner pc(g, constant_flux_coefficient(*g, c), sigma);
  const VectorField r = kvtest::random_field(g, 5);
  const VectorField z = pc.apply(r);
  VectorField back = z;
  back *= sigma;
  back.axpy(-0.5 * c, vector_laplacian(z));
  back -= r;
  CHECK(max_abs(back) < 1e-11);

  const GridPtr b = kvtest::box(8, 8);
  const VelocityPreconditioner pb(b, constant_flux_coefficient(*b, c), sigma, 0.1);
  const VectorField rb = kvtest::random_field(b, 6);
  VectorField zb = pb.apply(rb);
  VectorField backb = zb;
  backb *= sigma;
  backb.axpy(-0.5 * (c + 0.1), vector_laplacian(zb));
  backb -= rb;
  CHECK(max_abs(backb) < 1e-11);
}
