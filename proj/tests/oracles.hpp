// Dense-matrix oracles assembled directly from the shared stencil
// coefficients. These deliberately bypass the production kernels: they
// build explicit matrices tap by tap and apply them by plain mat-vec.
#ifndef GPE_TEST_ORACLES_HPP
#define GPE_TEST_ORACLES_HPP

#include <Eigen/Dense>
#include <random>

#include "gpe/grid.hpp"
#include "gpe/ops.hpp"

namespace oracles {

using gpe::Complex;
using gpe::ComplexField;
using gpe::Grid;

inline std::size_t flat(const Grid& g, int i, int j, int k) { return g.index3(i, j, k); }

/// -Laplacian as a dense matrix (zero padding outside the box).
inline Eigen::MatrixXcd neg_laplacian_matrix(const Grid& g) {
    const std::size_t n = g.node_count();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const std::size_t r = flat(g, i, j, k);
                for (int a = 0; a < g.dimension(); ++a) {
                    const double invh2 = 1.0 / (g.spacing(a) * g.spacing(a));
                    for (int t = -2; t <= 2; ++t) {
                        const int ii = i + (a == 0 ? t : 0);
                        const int jj = j + (a == 1 ? t : 0);
                        const int kk = k + (a == 2 ? t : 0);
                        if (ii < 0 || ii >= g.points(0) || jj < 0 || jj >= g.points(1) || kk < 0 ||
                            kk >= g.points(2))
                            continue;
                        m(r, flat(g, ii, jj, kk)) -= gpe::stencil::d2[t + 2] * invh2;
                    }
                }
            }
    return m;
}

/// First derivative along one axis, pure central taps with zero padding.
inline Eigen::MatrixXcd central_derivative_matrix(const Grid& g, int axis) {
    const std::size_t n = g.node_count();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const double invh = 1.0 / g.spacing(axis);
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const std::size_t r = flat(g, i, j, k);
                for (int t = -2; t <= 2; ++t) {
                    const int ii = i + (axis == 0 ? t : 0);
                    const int jj = j + (axis == 1 ? t : 0);
                    const int kk = k + (axis == 2 ? t : 0);
                    if (ii < 0 || ii >= g.points(0) || jj < 0 || jj >= g.points(1) || kk < 0 ||
                        kk >= g.points(2))
                        continue;
                    m(r, flat(g, ii, jj, kk)) += gpe::stencil::d1[t + 2] * invh;
                }
            }
    return m;
}

/// Gradient component with the boundary treatment of the gradient op:
/// 4th-order central inside, 2nd-order central one node from the edge,
/// one-sided on the edge.
inline Eigen::MatrixXcd gradient_component_matrix(const Grid& g, int axis) {
    const std::size_t n = g.node_count();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const double invh = 1.0 / g.spacing(axis);
    const int na = g.points(axis);
    auto shifted = [&](int i, int j, int k, int t) {
        const int ii = i + (axis == 0 ? t : 0);
        const int jj = j + (axis == 1 ? t : 0);
        const int kk = k + (axis == 2 ? t : 0);
        return flat(g, ii, jj, kk);
    };
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const std::size_t r = flat(g, i, j, k);
                const int pos = axis == 0 ? i : (axis == 1 ? j : k);
                if (pos >= 2 && pos <= na - 3) {
                    for (int t = -2; t <= 2; ++t)
                        m(r, shifted(i, j, k, t)) += gpe::stencil::d1[t + 2] * invh;
                } else if (pos == 0) {
                    m(r, shifted(i, j, k, 0)) += -1.5 * invh;
                    m(r, shifted(i, j, k, 1)) += 2.0 * invh;
                    m(r, shifted(i, j, k, 2)) += -0.5 * invh;
                } else if (pos == na - 1) {
                    m(r, shifted(i, j, k, 0)) += 1.5 * invh;
                    m(r, shifted(i, j, k, -1)) += -2.0 * invh;
                    m(r, shifted(i, j, k, -2)) += 0.5 * invh;
                } else {
                    m(r, shifted(i, j, k, -1)) += -0.5 * invh;
                    m(r, shifted(i, j, k, 1)) += 0.5 * invh;
                }
            }
    return m;
}

/// Lz = -i (x d/dy - y d/dx), built from the central derivative oracles.
inline Eigen::MatrixXcd angular_momentum_matrix(const Grid& g) {
    const std::size_t n = g.node_count();
    Eigen::MatrixXcd dx = central_derivative_matrix(g, 0);
    Eigen::MatrixXcd dy = central_derivative_matrix(g, 1);
    Eigen::VectorXcd xv(n), yv(n);
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                xv(flat(g, i, j, k)) = g.coord(0, i);
                yv(flat(g, i, j, k)) = g.coord(1, j);
            }
    return Complex(0.0, -1.0) * (xv.asDiagonal() * dy - yv.asDiagonal() * dx);
}

inline Eigen::VectorXcd to_vector(const ComplexField& f) {
    return Eigen::Map<const Eigen::VectorXcd>(f.values.data(), f.values.size());
}

inline ComplexField random_field(const Grid& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    ComplexField f(g);
    for (auto& z : f.values) z = Complex(d(rng), d(rng));
    return f;
}

} // namespace oracles

#endif
