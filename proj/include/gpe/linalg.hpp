#ifndef GPE_LINALG_HPP
#define GPE_LINALG_HPP

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "gpe/grid.hpp"

namespace gpe {

/// Dense 1D matrix of the zero-padded second-derivative stencil along
/// `axis` (the derivative itself, including the 1/h^2 factor).
Eigen::MatrixXd axis_second_derivative_matrix(const Grid& grid, int axis);

/// Dense 1D matrix of the zero-padded central first-derivative stencil.
Eigen::MatrixXd axis_first_derivative_matrix_central(const Grid& grid, int axis);

/// Approximate inverse of (-Lap + V_trap + sigma) built from per-axis
/// eigendecompositions of the separable 1D operators. Exact for the
/// zero-padded discretization; used to precondition Krylov solves.
class SeparablePreconditioner {
  public:
    SeparablePreconditioner(const Grid& grid, double sigma);
    void apply(const Complex* in, Complex* out) const;

  private:
    Grid grid_;
    double sigma_ = 1.0;
    std::array<Eigen::MatrixXcd, 3> q_;   // eigenvectors per axis (complex copies for GEMM)
    std::array<Eigen::MatrixXcd, 3> qt_;  // transposes
    std::array<Eigen::VectorXd, 3> lambda_;
    void transform(Complex* data, int axis, bool forward) const;
};

struct GmresOptions {
    double rel_tol = 1e-3;
    int max_iterations = 400;
    int restart = 150;
};

struct GmresResult {
    bool converged = false;
    int iterations = 0;
    double initial_residual = 0.0;
    double final_residual = 0.0;
};

using LinearOperator = std::function<void(const double* in, double* out)>;

/// Restarted GMRES with right preconditioning (pass an empty function for
/// no preconditioner). Workspace is retained across solves.
class GmresSolver {
  public:
    GmresSolver(std::size_t size, GmresOptions options);
    GmresResult solve(const LinearOperator& op, const LinearOperator& preconditioner,
                      const double* rhs, double* x);

  private:
    std::size_t n_;
    GmresOptions opt_;
    std::vector<std::vector<double>> basis_;
    std::vector<double> work_, work2_;
};

/// Dense N x N matrix of (-Lap + diag - omega Lz) assembled from the
/// shared stencil coefficients (production path for coarse dense spectra).
Eigen::MatrixXcd dense_linear_operator(const Grid& grid, double omega,
                                       const std::vector<Complex>& diagonal);

/// Eigenvalues of a general complex matrix (LAPACK zgeev; the input matrix
/// is destroyed).
std::vector<Complex> complex_eigenvalues(Eigen::MatrixXcd& matrix);

} // namespace gpe

#endif
