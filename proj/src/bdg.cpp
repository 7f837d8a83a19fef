#include "gpe/bdg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "gpe/linalg.hpp"
#include "gpe/ops.hpp"

namespace gpe {

namespace {

constexpr double kPi = std::numbers::pi;

/// Shared caches for applying the block operator matrix-free.
struct BdgOperator {
    Grid grid;
    SystemParams params;
    HamiltonianOp hop;
    std::vector<Complex> diagonal; // V - iW - mu + 16 pi Na |psi0|^2
    std::vector<Complex> coupling; // 8 pi Na psi0^2
    std::size_t n;

    BdgOperator(const ComplexField& psi0, Complex mu, const SystemParams& p)
        : grid(psi0.grid), params(p), hop(psi0.grid, p), n(psi0.grid.node_count()) {
        diagonal.resize(n);
        coupling.resize(n);
        const double nl = hop.nonlinear_coef();
        for (std::size_t i = 0; i < n; ++i) {
            const Complex v = psi0.values[i];
            diagonal[i] =
                Complex(hop.trap()[i] + 2.0 * nl * std::norm(v), -hop.gain_loss_coef()[i]) - mu;
            coupling[i] = nl * v * v;
        }
    }

    // (u, v) -> M (u, v); buffers must not alias the inputs.
    void apply(const Complex* u, const Complex* v, Complex* out_u, Complex* out_v,
               std::vector<Complex>& scratch) const {
        hop.apply_linear(u, out_u, diagonal.data());
        for (std::size_t i = 0; i < n; ++i) out_u[i] += coupling[i] * v[i];
        // Row v through the conjugated row-u operator: Ltilde v = conj(L conj v).
        scratch.resize(n);
        for (std::size_t i = 0; i < n; ++i) scratch[i] = std::conj(v[i]);
        hop.apply_linear(scratch.data(), out_v, diagonal.data());
        for (std::size_t i = 0; i < n; ++i)
            out_v[i] = -std::conj(out_v[i]) - std::conj(coupling[i]) * u[i];
    }
};

void sort_by_growth(std::vector<Complex>& ev) {
    std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
        if (a.imag() != b.imag()) return a.imag() > b.imag();
        return a.real() > b.real();
    });
}

double classify(const std::vector<Complex>& ev, double zero_radius, double threshold, bool* stable) {
    double growth = 0.0;
    for (const Complex& w : ev)
        if (std::abs(w) > zero_radius) growth = std::max(growth, w.imag());
    *stable = growth <= threshold;
    return growth;
}

BdgSpectrum dense_spectrum(const StationaryState& state, const BdgConfig& config) {
    const Grid& fine = state.psi.grid;
    const int dim = fine.dimension();
    const int target = dim == 2 ? config.dense_points_2d : config.dense_points_3d;

    GridSpec cs = fine.spec();
    for (int a = 0; a < dim; ++a) cs.points[a] = std::min(fine.points(a), target);
    const Grid coarse(cs);

    ComplexField psi = fine.compatible(coarse) ? state.psi : resample(state.psi, coarse);
    normalize(psi); // mu is kept from the fine solve
    SystemParams p = state.params;

    const std::size_t n = coarse.node_count();
    const double nl = 8.0 * kPi * p.interaction;
    const ScalarField trap = potential_real(coarse, p);
    const ScalarField gain = potential_imag(coarse, p);
    std::vector<Complex> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = Complex(trap.values[i] + 2.0 * nl * std::norm(psi.values[i]), -gain.values[i]) -
                  state.mu;

    const Eigen::MatrixXcd a = dense_linear_operator(coarse, p.rotation, diag);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = a;
    m.bottomRightCorner(n, n) = -a.conjugate();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex b = nl * psi.values[i] * psi.values[i];
        m(i, n + i) = b;
        m(n + i, i) = -std::conj(b);
    }

    BdgSpectrum spec;
    spec.resolution = cs;
    spec.eigenvalues = complex_eigenvalues(m);
    sort_by_growth(spec.eigenvalues);
    spec.max_growth_rate =
        classify(spec.eigenvalues, config.zero_mode_radius, config.stability_threshold, &spec.stable);
    return spec;
}

BdgSpectrum iterative_spectrum(const StationaryState& state, const BdgConfig& config) {
    const Grid& grid = state.psi.grid;
    const std::size_t n = grid.node_count();
    const std::size_t nc = 2 * n;  // complex dimension of (u, v)
    const std::size_t nr = 2 * nc; // real embedding for the inner solves

    BdgOperator op(state.psi, state.mu, state.params);
    SeparablePreconditioner precond(grid, 1.0);

    std::vector<Complex> scratch;
    auto apply_m = [&](const Complex* w, Complex* out) {
        op.apply(w, w + n, out, out + n, scratch);
    };

    BdgSpectrum spec;
    spec.resolution = grid.spec();
    std::vector<Complex> found;

    GmresOptions gopt;
    gopt.rel_tol = config.inner_tolerance;
    gopt.max_iterations = config.inner_max_iterations;
    gopt.restart = std::max(40, std::min(120, static_cast<int>(3.0e8 / (8.0 * nr))));
    GmresSolver gmres(nr, gopt);

    std::vector<Complex> mw(nc), rhs_c(nc), sol_c(nc);
    std::vector<double> rhs_r(nr), sol_r(nr), prec_buf(nr);

    const int m = config.arnoldi_dimension;
    std::vector<std::vector<Complex>> basis;
    Eigen::MatrixXcd hess = Eigen::MatrixXcd::Zero(m + 1, m);

    // Shifts scan the strip Im = scan_height over [0, scan_max_frequency];
    // the spectrum is symmetric under omega -> -conj(omega), so negative
    // real parts are covered automatically.
    std::vector<Complex> shifts;
    for (double re = 0.0; re <= config.scan_max_frequency + 1e-12; re += config.scan_step)
        shifts.emplace_back(re, config.scan_height);

    for (const Complex sigma : shifts) {
        // Inner operator: y = (M - sigma) x in the real embedding.
        auto inner_op = [&](const double* in, double* out) {
            for (std::size_t i = 0; i < nc; ++i) sol_c[i] = Complex(in[2 * i], in[2 * i + 1]);
            apply_m(sol_c.data(), mw.data());
            for (std::size_t i = 0; i < nc; ++i) {
                const Complex y = mw[i] - sigma * sol_c[i];
                out[2 * i] = y.real();
                out[2 * i + 1] = y.imag();
            }
        };
        auto inner_prec = [&](const double* in, double* out) {
            for (std::size_t i = 0; i < nc; ++i) sol_c[i] = Complex(in[2 * i], in[2 * i + 1]);
            precond.apply(sol_c.data(), mw.data());
            precond.apply(sol_c.data() + n, mw.data() + n);
            for (std::size_t i = 0; i < n; ++i) {
                out[2 * i] = mw[i].real();
                out[2 * i + 1] = mw[i].imag();
                // v block of M carries the negated operator
                out[2 * (n + i)] = -mw[n + i].real();
                out[2 * (n + i) + 1] = -mw[n + i].imag();
            }
        };

        // Complex Arnoldi on x -> (M - sigma)^-1 x.
        basis.assign(1, std::vector<Complex>(nc));
        {
            // Deterministic start vector biased toward the condensate mode.
            std::vector<Complex>& v0 = basis[0];
            for (std::size_t i = 0; i < n; ++i) {
                v0[i] = state.psi.values[i] + Complex(0.1, 0.05) * std::sin(0.37 * (i % 97));
                v0[n + i] = -std::conj(state.psi.values[i]) * 0.3 + Complex(0.05, -0.02);
            }
            double s = 0.0;
            for (const Complex& z : v0) s += std::norm(z);
            const double inv = 1.0 / std::sqrt(s);
            for (Complex& z : v0) z *= inv;
        }
        hess.setZero();
        int steps = 0;
        for (int k = 0; k < m; ++k) {
            for (std::size_t i = 0; i < nc; ++i) {
                rhs_r[2 * i] = basis[k][i].real();
                rhs_r[2 * i + 1] = basis[k][i].imag();
            }
            const GmresResult res = gmres.solve(inner_op, inner_prec, rhs_r.data(), sol_r.data());
            if (!res.converged) spec.warning = true;
            std::vector<Complex> w(nc);
            for (std::size_t i = 0; i < nc; ++i) w[i] = Complex(sol_r[2 * i], sol_r[2 * i + 1]);
            for (int i = 0; i <= k; ++i) {
                Complex h(0.0, 0.0);
                for (std::size_t idx = 0; idx < nc; ++idx) h += std::conj(basis[i][idx]) * w[idx];
                hess(i, k) = h;
                for (std::size_t idx = 0; idx < nc; ++idx) w[idx] -= h * basis[i][idx];
            }
            double nw = 0.0;
            for (const Complex& z : w) nw += std::norm(z);
            nw = std::sqrt(nw);
            hess(k + 1, k) = nw;
            steps = k + 1;
            if (nw < 1e-12) break;
            const double inv = 1.0 / nw;
            for (Complex& z : w) z *= inv;
            basis.push_back(std::move(w));
        }

        const Eigen::MatrixXcd hm = hess.topLeftCorner(steps, steps);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(hm);
        if (es.info() != Eigen::Success) {
            spec.warning = true;
            continue;
        }
        for (int e = 0; e < steps; ++e) {
            const Complex theta = es.eigenvalues()[e];
            if (std::abs(theta) < 1e-12) continue;
            const Complex omega = sigma + 1.0 / theta;
            // Residual-certified Ritz values only.
            std::vector<Complex> x(nc, Complex(0.0, 0.0));
            for (int b = 0; b < steps; ++b) {
                const Complex c = es.eigenvectors()(b, e);
                for (std::size_t idx = 0; idx < nc; ++idx) x[idx] += c * basis[b][idx];
            }
            double xn = 0.0;
            for (const Complex& z : x) xn += std::norm(z);
            xn = std::sqrt(xn);
            if (xn < 1e-12) continue;
            apply_m(x.data(), mw.data());
            double rn = 0.0;
            for (std::size_t idx = 0; idx < nc; ++idx) rn += std::norm(mw[idx] - omega * x[idx]);
            rn = std::sqrt(rn) / xn;
            if (rn > config.ritz_residual_tolerance * std::max(1.0, std::abs(omega))) continue;
            bool known = false;
            for (const Complex& f : found)
                if (std::abs(f - omega) < 1e-8) {
                    known = true;
                    break;
                }
            if (!known) found.push_back(omega);
        }
    }

    spec.eigenvalues = std::move(found);
    sort_by_growth(spec.eigenvalues);
    spec.max_growth_rate = classify(spec.eigenvalues, config.zero_mode_radius,
                                    config.iterative_stability_threshold, &spec.stable);
    return spec;
}

} // namespace

std::pair<ComplexField, ComplexField> bdg_apply(const ComplexField& u, const ComplexField& v,
                                                const StationaryState& state) {
    u.require_conforming("bdg_apply");
    v.require_conforming("bdg_apply");
    if (!u.grid.compatible(state.psi.grid) || !v.grid.compatible(state.psi.grid))
        throw InvalidFieldError("bdg_apply: grid mismatch with the base state");
    BdgOperator op(state.psi, state.mu, state.params);
    ComplexField out_u(u.grid), out_v(u.grid);
    std::vector<Complex> scratch;
    op.apply(u.values.data(), v.values.data(), out_u.values.data(), out_v.values.data(), scratch);
    return {std::move(out_u), std::move(out_v)};
}

BdgSpectrum bdg_spectrum(const StationaryState& state, BdgMode mode, const BdgConfig& config) {
    if (state.residual_norm > 1e-6)
        throw UnsupportedRegimeError("bdg_spectrum: base state is not converged");
    if (mode == BdgMode::DenseCoarse) return dense_spectrum(state, config);
    return iterative_spectrum(state, config);
}

} // namespace gpe
