#pragma once

#include "kvflow/fields.hpp"

namespace kvflow {

/// Second-order MAC stencils. Every operator here is a pure function of its
/// inputs. With the half weights on wall-plane samples the pairs below are
/// exact adjoints:
///   <div sigma, v> = -<sigma, D v>   and   <grad p, v> = -<p, div v>.

/// Cell-centered divergence of a face field.
ScalarField divergence(const VectorField& v);

/// Face gradient of a cell scalar; zero on wall planes.
VectorField gradient(const ScalarField& p);

/// Five-point (seven in 3D) Laplacian of a cell scalar with a zero normal
/// derivative at walls, i.e. divergence(gradient(p)).
ScalarField cell_laplacian(const ScalarField& p);

/// Full velocity gradient dv_d/dx_e with no-slip ghost values at walls.
VelocityGradient velocity_gradient(const VectorField& v);

/// Deformation D v = (grad v + grad v^T) / 2.
TensorField deformation(const VectorField& v);

/// Row-wise divergence of a symmetric tensor onto the faces.
VectorField divergence(const TensorField& sigma);

/// div(c D v) with c sampled at the stress flux points.
VectorField stress_divergence(const FluxCoefficient& c, const VectorField& v);

/// Component-wise Laplacian with no-slip ghost values.
VectorField vector_laplacian(const VectorField& v);

/// Kelvin-Voigt mass operator M v = v - alpha div(l D v).
VectorField voigt_apply(const ScalarField& ell, double alpha, const VectorField& v);

/// Largest |div v| over the cells.
double max_divergence(const VectorField& v);

}  // namespace kvflow
