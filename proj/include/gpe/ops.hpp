#ifndef GPE_OPS_HPP
#define GPE_OPS_HPP

#include <complex>
#include <vector>

#include "gpe/grid.hpp"

namespace gpe {

/// Finite-difference coefficients shared by the operator kernels and by
/// the dense oracle/assembly builders.
namespace stencil {
// 4th-order second derivative, taps at offsets -2..+2, divided by h^2.
inline constexpr double d2[5] = {-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
// 4th-order first derivative, taps at offsets -2..+2, divided by h.
inline constexpr double d1[5] = {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0};
} // namespace stencil

/// Laplacian with homogeneous Dirichlet boundaries (out-of-range taps read
/// zero). 4th-order accurate away from the box edge.
ComplexField laplacian(const ComplexField& f);

/// Central-difference gradient, one component per axis. 4th-order central
/// in the interior, 2nd-order central one node from the edge, 2nd-order
/// one-sided on the boundary nodes.
std::vector<ComplexField> gradient(const ComplexField& f);

/// L_z f = -i (x d/dy - y d/dx) f with zero-padded central differences
/// (the discrete operator is exactly Hermitian).
ComplexField angular_momentum_z(const ComplexField& f);

/// Trapezoid-consistent quadrature over the box.
double integrate(const ScalarField& f);
Complex integrate_complex(const ComplexField& f);

/// Weighted inner product <f, g> (conjugate-linear in f) and derived norms.
Complex inner(const ComplexField& f, const ComplexField& g);
double norm(const ComplexField& f);
double norm(const ScalarField& f);

/// Scales f to unit weighted L2 norm. Throws on zero norm.
void normalize(ComplexField& f);

/// Pointwise density |f|^2.
ScalarField density(const ComplexField& f);

/// Separable Lagrange-4 resampling onto another grid of equal dimension
/// and box extents (used for coarse-grid interpolation and refinement
/// seeding).
ComplexField resample(const ComplexField& f, const Grid& target);

/// f evaluated on the reflected node set along `axis` (grids are
/// symmetric, so the reflection is an exact node permutation).
ComplexField reflect(const ComplexField& f, Axis axis);

} // namespace gpe

#endif
