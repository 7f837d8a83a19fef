#include "gpe/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "gpe/ops.hpp"

namespace gpe {

Eigen::MatrixXd axis_second_derivative_matrix(const Grid& grid, int axis) {
    const int n = grid.points(axis);
    const double invh2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int t = -2; t <= 2; ++t) {
            const int c = i + t;
            if (c >= 0 && c < n) m(i, c) += stencil::d2[t + 2] * invh2;
        }
    return m;
}

Eigen::MatrixXd axis_first_derivative_matrix_central(const Grid& grid, int axis) {
    const int n = grid.points(axis);
    const double invh = 1.0 / grid.spacing(axis);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int t = -2; t <= 2; ++t) {
            const int c = i + t;
            if (c >= 0 && c < n) m(i, c) += stencil::d1[t + 2] * invh;
        }
    return m;
}

SeparablePreconditioner::SeparablePreconditioner(const Grid& grid, double sigma)
    : grid_(grid), sigma_(sigma) {
    for (int a = 0; a < grid.dimension(); ++a) {
        const int n = grid.points(a);
        Eigen::MatrixXd op = -axis_second_derivative_matrix(grid, a);
        for (int i = 0; i < n; ++i) {
            const double x = grid.coord(a, i);
            op(i, i) += 0.25 * x * x;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("SeparablePreconditioner: 1D eigendecomposition failed");
        q_[a] = es.eigenvectors().cast<Complex>();
        qt_[a] = es.eigenvectors().transpose().cast<Complex>();
        lambda_[a] = es.eigenvalues();
    }
}

void SeparablePreconditioner::transform(Complex* data, int axis, bool forward) const {
    // Forward: coefficients g = Q^T f per line; backward: f = Q g.
    const int nx = grid_.points(0), ny = grid_.points(1), nz = grid_.points(2);
    const Eigen::MatrixXcd& m = forward ? qt_[axis] : q_[axis];
    if (axis == 0) {
        const Eigen::Index rest = static_cast<Eigen::Index>(ny) * nz;
        Eigen::Map<Eigen::MatrixXcd> f(data, nx, rest);
        f = (m * f).eval();
    } else if (axis == 1) {
        for (int k = 0; k < nz; ++k) {
            Eigen::Map<Eigen::MatrixXcd> plane(data + static_cast<std::size_t>(nx) * ny * k, nx, ny);
            plane = (plane * m.transpose()).eval();
        }
    } else {
        Eigen::Map<Eigen::MatrixXcd> f(data, static_cast<Eigen::Index>(nx) * ny, nz);
        f = (f * m.transpose()).eval();
    }
}

void SeparablePreconditioner::apply(const Complex* in, Complex* out) const {
    const std::size_t n = grid_.node_count();
    std::memcpy(out, in, n * sizeof(Complex));
    const int dim = grid_.dimension();
    for (int a = 0; a < dim; ++a) transform(out, a, true);
    const int nx = grid_.points(0), ny = grid_.points(1), nz = grid_.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double lz = dim == 3 ? lambda_[2][k] : 0.0;
        for (int j = 0; j < ny; ++j) {
            const double lyz = lz + lambda_[1][j] + sigma_;
            for (int i = 0; i < nx; ++i, ++idx) out[idx] /= (lambda_[0][i] + lyz);
        }
    }
    for (int a = dim - 1; a >= 0; --a) transform(out, a, false);
}

namespace {

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

} // namespace

GmresSolver::GmresSolver(std::size_t size, GmresOptions options) : n_(size), opt_(options) {
    work_.resize(n_);
    work2_.resize(n_);
}

GmresResult GmresSolver::solve(const LinearOperator& op, const LinearOperator& preconditioner,
                               const double* rhs, double* x) {
    GmresResult result;
    const int m = std::max(1, opt_.restart);
    if (basis_.size() < static_cast<std::size_t>(m) + 1) basis_.resize(m + 1);
    for (auto& v : basis_)
        if (v.size() != n_) v.assign(n_, 0.0);

    std::vector<double> hess((m + 1) * m, 0.0);
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0), ym(m, 0.0);

    const double bnorm = std::sqrt(dot(rhs, rhs, n_));
    result.initial_residual = bnorm;
    if (bnorm == 0.0) {
        std::fill(x, x + n_, 0.0);
        result.converged = true;
        return result;
    }
    const double target = opt_.rel_tol * bnorm;

    std::fill(x, x + n_, 0.0);
    int total_iters = 0;
    double resid = bnorm;

    while (total_iters < opt_.max_iterations) {
        // Residual of the current iterate (x = 0 on the first cycle).
        double* r = basis_[0].data();
        if (total_iters == 0) {
            std::memcpy(r, rhs, n_ * sizeof(double));
        } else {
            if (preconditioner) {
                preconditioner(x, work_.data());
                op(work_.data(), work2_.data());
            } else {
                op(x, work2_.data());
            }
            for (std::size_t i = 0; i < n_; ++i) r[i] = rhs[i] - work2_[i];
        }
        double beta = std::sqrt(dot(r, r, n_));
        resid = beta;
        if (beta <= target) break;
        const double ibeta = 1.0 / beta;
        for (std::size_t i = 0; i < n_; ++i) r[i] *= ibeta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        int k = 0;
        for (; k < m && total_iters < opt_.max_iterations; ++k, ++total_iters) {
            // w = A M^-1 v_k
            if (preconditioner) {
                preconditioner(basis_[k].data(), work_.data());
                op(work_.data(), work2_.data());
            } else {
                op(basis_[k].data(), work2_.data());
            }
            double* w = basis_[k + 1].data();
            std::memcpy(w, work2_.data(), n_ * sizeof(double));
            // Modified Gram-Schmidt.
            for (int i = 0; i <= k; ++i) {
                const double hik = dot(basis_[i].data(), w, n_);
                hess[i * m + k] = hik;
                axpy(-hik, basis_[i].data(), w, n_);
            }
            const double hk1 = std::sqrt(dot(w, w, n_));
            hess[(k + 1) * m + k] = hk1;
            if (hk1 > 0.0) {
                const double ih = 1.0 / hk1;
                for (std::size_t i = 0; i < n_; ++i) w[i] *= ih;
            }
            // Apply stored Givens rotations, then create a new one.
            for (int i = 0; i < k; ++i) {
                const double t = cs[i] * hess[i * m + k] + sn[i] * hess[(i + 1) * m + k];
                hess[(i + 1) * m + k] = -sn[i] * hess[i * m + k] + cs[i] * hess[(i + 1) * m + k];
                hess[i * m + k] = t;
            }
            const double denom = std::hypot(hess[k * m + k], hess[(k + 1) * m + k]);
            if (denom == 0.0) {
                ++k;
                break;
            }
            cs[k] = hess[k * m + k] / denom;
            sn[k] = hess[(k + 1) * m + k] / denom;
            hess[k * m + k] = denom;
            hess[(k + 1) * m + k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            resid = std::abs(g[k + 1]);
            if (resid <= target) {
                ++k;
                ++total_iters;
                break;
            }
        }

        // Back substitution and update of x (in preconditioned variables).
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int l = i + 1; l < k; ++l) s -= hess[i * m + l] * ym[l];
            ym[i] = s / hess[i * m + i];
        }
        for (int i = 0; i < k; ++i) axpy(ym[i], basis_[i].data(), x, n_);
        if (resid <= target) break;
    }

    // Map back through the preconditioner.
    if (preconditioner) {
        preconditioner(x, work_.data());
        std::memcpy(x, work_.data(), n_ * sizeof(double));
    }
    result.iterations = total_iters;
    result.final_residual = resid;
    result.converged = resid <= target;
    return result;
}

Eigen::MatrixXcd dense_linear_operator(const Grid& grid, double omega,
                                       const std::vector<Complex>& diagonal) {
    const std::size_t n = grid.node_count();
    if (diagonal.size() != n) throw std::invalid_argument("dense_linear_operator: diagonal size mismatch");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const int nx = grid.points(0), ny = grid.points(1), nz = grid.points(2);
    const Complex iunit(0.0, 1.0);
    std::size_t r = 0;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i, ++r) {
                m(r, r) += diagonal[r];
                const double x = grid.coord(0, i);
                const double y = grid.coord(1, j);
                for (int t = -2; t <= 2; ++t) {
                    if (t == 0) {
                        for (int a = 0; a < grid.dimension(); ++a) {
                            const double invh2 = 1.0 / (grid.spacing(a) * grid.spacing(a));
                            m(r, r) += -stencil::d2[2] * invh2;
                        }
                        continue;
                    }
                    // x-axis taps
                    if (i + t >= 0 && i + t < nx) {
                        const std::size_t c = grid.index3(i + t, j, k);
                        const double invh = 1.0 / grid.spacing(0);
                        m(r, c) += -stencil::d2[t + 2] * invh * invh;
                        if (omega != 0.0) m(r, c) += -iunit * omega * y * stencil::d1[t + 2] * invh;
                    }
                    // y-axis taps
                    if (j + t >= 0 && j + t < ny) {
                        const std::size_t c = grid.index3(i, j + t, k);
                        const double invh = 1.0 / grid.spacing(1);
                        m(r, c) += -stencil::d2[t + 2] * invh * invh;
                        if (omega != 0.0) m(r, c) += iunit * omega * x * stencil::d1[t + 2] * invh;
                    }
                    // z-axis taps
                    if (grid.dimension() == 3 && k + t >= 0 && k + t < nz) {
                        const std::size_t c = grid.index3(i, j, k + t);
                        const double invh = 1.0 / grid.spacing(2);
                        m(r, c) += -stencil::d2[t + 2] * invh * invh;
                    }
                }
            }
        }
    }
    return m;
}

std::vector<Complex> complex_eigenvalues(Eigen::MatrixXcd& matrix) {
    const lapack_int n = static_cast<lapack_int>(matrix.rows());
    if (matrix.cols() != n) throw std::invalid_argument("complex_eigenvalues: matrix must be square");
    std::vector<Complex> w(n);
    const lapack_int info = LAPACKE_zgeev(
        LAPACK_COL_MAJOR, 'N', 'N', n, reinterpret_cast<lapack_complex_double*>(matrix.data()), n,
        reinterpret_cast<lapack_complex_double*>(w.data()), nullptr, 1, nullptr, 1);
    if (info != 0)
        throw std::runtime_error("complex_eigenvalues: zgeev failed with info " + std::to_string(info));
    return w;
}

} // namespace gpe
