#include "gpe/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "gpe/linalg.hpp"
#include "gpe/vortex.hpp"

namespace gpe {

namespace {

/// The antiunitary symmetry that protects real eigenvalues: gain-axis
/// reflection plus conjugation in 2D; in 3D composed with a reflection
/// transverse to the rotation plane.
ComplexField pt_image(const ComplexField& psi, const SystemParams& params, bool use_x_partner) {
    ComplexField r = reflect(psi, params.gain_loss_axis);
    if (params.dimension == 3 && params.gain_loss_axis == Axis::Z)
        r = reflect(r, use_x_partner ? Axis::X : Axis::Y);
    for (Complex& z : r.values) z = std::conj(z);
    return r;
}

/// Aligns the global phase so that the PT image coincides with the field
/// itself (possible exactly for unbroken states), then reports the
/// relative distance to the symmetric subspace.
double pt_alignment(ComplexField& psi, const SystemParams& params, bool use_x_partner) {
    const ComplexField img = pt_image(psi, params, use_x_partner);
    Complex c(0.0, 0.0);
    for (std::size_t i = 0; i < psi.values.size(); ++i) c += std::conj(psi.values[i]) * img.values[i];
    if (std::abs(c) < 1e-12) return 1.0;
    const Complex phase = std::polar(1.0, 0.5 * std::arg(c));
    double dist2 = 0.0, norm2 = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        psi.values[i] *= phase;
        norm2 += std::norm(psi.values[i]);
    }
    const ComplexField aligned = pt_image(psi, params, use_x_partner);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        dist2 += std::norm(psi.values[i] - aligned.values[i]);
    return std::sqrt(dist2 / norm2);
}

void pt_project(ComplexField& psi, const SystemParams& params, bool use_x_partner) {
    const ComplexField img = pt_image(psi, params, use_x_partner);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        psi.values[i] = 0.5 * (psi.values[i] + img.values[i]);
}

std::vector<double> node_weights(const Grid& g) {
    std::vector<double> w(g.node_count());
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double wk = g.axis_weights(2)[k];
        for (int j = 0; j < ny; ++j) {
            const double wjk = wk * g.axis_weights(1)[j];
            for (int i = 0; i < nx; ++i, ++idx) w[idx] = wjk * g.axis_weights(0)[i];
        }
    }
    return w;
}

double weighted_norm2(const std::vector<double>& w, const std::vector<Complex>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += w[i] * std::norm(v[i]);
    return s;
}

Complex weighted_inner(const std::vector<double>& w, const std::vector<Complex>& a,
                       const std::vector<Complex>& b) {
    Complex s(0.0, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * (std::conj(a[i]) * b[i]);
    return s;
}

int pick_restart(std::size_t problem_size, const SolverConfig& config) {
    if (config.krylov_restart > 0) return config.krylov_restart;
    const double budget = 3.5e8 / (8.0 * static_cast<double>(problem_size));
    return std::max(30, std::min(150, static_cast<int>(budget)));
}

StationaryState finalize_state(ComplexField psi, Complex mu, const SystemParams& params,
                               const std::vector<double>& w) {
    normalize(psi);
    HamiltonianOp hop(psi.grid, params);
    ComplexField r = hop.apply(psi);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= mu * psi.values[i];
    StationaryState st;
    st.residual_norm = std::sqrt(weighted_norm2(w, r.values));
    st.psi = std::move(psi);
    st.mu = mu;
    st.params = params;
    st.pt_symmetry_error = pt_symmetry_error(st.psi, params);
    st.observables = compute_observables(st.psi, params);
    st.pt_unbroken = std::abs(mu.imag()) <= 1e-8;
    return st;
}

} // namespace

void SolverConfig::validate() const {
    if (!(residual_tolerance > 0.0) || !(krylov_tolerance > 0.0) || !(itp_time_step > 0.0) ||
        !(itp_residual_target > 0.0) || !(continuation_step > 0.0) || !(min_continuation_step > 0.0) ||
        !(omega_continuation_step > 0.0))
        throw ConfigError("solver: all tolerances and steps must be positive");
    if (min_continuation_step > continuation_step)
        throw ConfigError("solver: min_continuation_step must not exceed continuation_step");
    if (max_newton_iterations < 1 || max_itp_iterations < 1 || max_krylov_iterations < 1)
        throw ConfigError("solver: iteration caps must be positive");
}

ComplexField gaussian_seed(const Grid& grid) {
    ComplexField f(grid);
    const int nx = grid.points(0), ny = grid.points(1), nz = grid.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double z = grid.coord(2, k);
        for (int j = 0; j < ny; ++j) {
            const double y = grid.coord(1, j);
            for (int i = 0; i < nx; ++i, ++idx) {
                const double x = grid.coord(0, i);
                f.values[idx] = std::exp(-0.25 * (x * x + y * y + z * z));
            }
        }
    }
    normalize(f);
    return f;
}

StationaryState ground_state_itp(const ComplexField& initial, const SystemParams& params,
                                 const SolverConfig& config) {
    config.validate();
    initial.require_finite("ground_state_itp");
    params.validate(initial.grid);
    if (params.gain_loss != 0.0)
        throw UnsupportedRegimeError("ground_state_itp: gradient flow requires gamma = 0");

    const Grid& grid = initial.grid;
    const std::vector<double> w = node_weights(grid);
    HamiltonianOp hop(grid, params);

    ComplexField psi = initial;
    normalize(psi);
    bool pt_lock = false;
    {
        ComplexField probe = psi;
        if (pt_alignment(probe, params, false) <= 1e-6) {
            pt_lock = true;
            psi = std::move(probe);
            pt_project(psi, params, false);
        }
    }
    ComplexField hpsi(grid);
    const double dt = config.itp_time_step;
    double residual = std::numeric_limits<double>::infinity();
    double first_residual = 0.0;

    for (long it = 0; it < config.max_itp_iterations; ++it) {
        if (pt_lock && it % 64 == 0) pt_project(psi, params, false);
        hop.apply(psi, hpsi);
        const double mu = weighted_inner(w, psi.values, hpsi.values).real();
        double r2 = 0.0;
        for (std::size_t i = 0; i < psi.values.size(); ++i) {
            const Complex r = hpsi.values[i] - mu * psi.values[i];
            hpsi.values[i] = r; // reuse as the residual field
            r2 += w[i] * std::norm(r);
        }
        residual = std::sqrt(r2);
        if (it == 0) first_residual = residual;
        if (!std::isfinite(residual) || (it > 100 && residual > 1e3 * std::max(first_residual, 1.0)))
            throw NonConvergenceError("ground_state_itp: flow diverged (reduce itp_time_step)", residual,
                                      static_cast<int>(it));
        if (residual <= config.itp_residual_target) {
            return finalize_state(std::move(psi), Complex(mu, 0.0), params, w);
        }
        for (std::size_t i = 0; i < psi.values.size(); ++i) psi.values[i] -= dt * hpsi.values[i];
        normalize(psi);
    }
    throw NonConvergenceError("ground_state_itp: iteration cap reached, last residual " +
                                  std::to_string(residual),
                              residual, static_cast<int>(config.max_itp_iterations));
}

StationaryState newton_solve(const ComplexField& initial, Complex mu0, const SystemParams& params,
                             const SolverConfig& config, NewtonReport* report) {
    config.validate();
    initial.require_finite("newton_solve");
    params.validate(initial.grid);

    const Grid& grid = initial.grid;
    const std::size_t N = grid.node_count();
    const std::size_t M = 2 * N + 2;
    const std::vector<double> w = node_weights(grid);

    HamiltonianOp hop(grid, params);
    SeparablePreconditioner precond(grid, 1.0);
    GmresOptions gopt;
    gopt.rel_tol = config.krylov_tolerance;
    gopt.max_iterations = config.max_krylov_iterations;
    gopt.restart = pick_restart(M, config);
    GmresSolver gmres(M, gopt);

    ComplexField psi = initial;
    Complex mu = mu0;

    // Stationary branches of interest are PT-unbroken: when the seed lies
    // in the PT-symmetric class (after gauge alignment), iterates are kept
    // there. This projects out the rotation zero mode of gamma = 0 vortex
    // states, which is PT-odd and would otherwise make the Jacobian
    // singular along the branch.
    bool pt_lock = false, pt_use_x = false;
    {
        ComplexField probe = psi;
        const double dy = pt_alignment(probe, params, false);
        if (dy <= 1e-6) {
            pt_lock = true;
            psi = std::move(probe);
        } else if (params.dimension == 3 && params.gain_loss_axis == Axis::Z) {
            ComplexField probe_x = psi;
            const double dx = pt_alignment(probe_x, params, true);
            if (dx <= 1e-6) {
                pt_lock = true;
                pt_use_x = true;
                psi = std::move(probe_x);
            }
        }
        if (pt_lock) {
            pt_project(psi, params, pt_use_x);
            mu = Complex(mu.real(), 0.0);
        }
    }
    const ComplexField ref = psi; // phase reference

    ComplexField rfield(grid), cand(grid), jbuf(grid), pbuf(grid), pbuf2(grid);
    std::vector<Complex> diagonal(N), coupling(N);
    std::vector<double> rhs(M), delta(M);
    const double nl = hop.nonlinear_coef();

    auto residual_of = [&](const ComplexField& p, Complex m, ComplexField& r, double& c1, double& c2) {
        hop.apply(p, r);
        double r2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            r.values[i] -= m * p.values[i];
            r2 += w[i] * std::norm(r.values[i]);
        }
        c1 = weighted_norm2(w, p.values) - 1.0;
        c2 = weighted_inner(w, ref.values, p.values).imag();
        return std::sqrt(r2 + c1 * c1 + c2 * c2);
    };

    auto jacobian = [&](const double* in, double* out) {
        for (std::size_t i = 0; i < N; ++i) pbuf.values[i] = Complex(in[i], in[N + i]);
        const Complex dmu(in[2 * N], in[2 * N + 1]);
        hop.apply_linear(pbuf.values.data(), jbuf.values.data(), diagonal.data());
        double dc1 = 0.0, dc2 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const Complex d = pbuf.values[i];
            const Complex v = jbuf.values[i] + coupling[i] * std::conj(d) - dmu * psi.values[i];
            out[i] = v.real();
            out[N + i] = v.imag();
            dc1 += 2.0 * w[i] * (psi.values[i].real() * d.real() + psi.values[i].imag() * d.imag());
            dc2 += w[i] * (ref.values[i].real() * d.imag() - ref.values[i].imag() * d.real());
        }
        out[2 * N] = dc1;
        out[2 * N + 1] = dc2;
    };

    auto preconditioner = [&](const double* in, double* out) {
        for (std::size_t i = 0; i < N; ++i) pbuf2.values[i] = Complex(in[i], in[N + i]);
        precond.apply(pbuf2.values.data(), jbuf.values.data());
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = jbuf.values[i].real();
            out[N + i] = jbuf.values[i].imag();
        }
        out[2 * N] = in[2 * N];
        out[2 * N + 1] = in[2 * N + 1];
    };

    double c1 = 0.0, c2 = 0.0;
    double res = residual_of(psi, mu, rfield, c1, c2);
    const double res0 = res;
    std::vector<double> res_history{res};

    auto fail = [&](const std::string& why, int iter) -> StationaryState {
        if (report) report->converged = false;
        throw NonConvergenceError("newton_solve: " + why, res, iter);
    };

    for (int iter = 0; iter < config.max_newton_iterations; ++iter) {
        if (res <= config.residual_tolerance) {
            if (report) report->converged = true;
            return finalize_state(std::move(psi), mu, params, w);
        }
        if (!std::isfinite(res)) return fail("diverged (non-finite residual)", iter);
        if (res > 1e3 * std::max(res0, 1e-12)) return fail("diverged", iter);
        if (iter >= 10 && res > 0.7 * res_history[iter - 3]) return fail("insufficient progress", iter);

        for (std::size_t i = 0; i < N; ++i) {
            const Complex p = psi.values[i];
            diagonal[i] = Complex(hop.trap()[i] + 2.0 * nl * std::norm(p), -hop.gain_loss_coef()[i]) - mu;
            coupling[i] = nl * p * p;
        }
        for (std::size_t i = 0; i < N; ++i) {
            rhs[i] = -rfield.values[i].real();
            rhs[N + i] = -rfield.values[i].imag();
        }
        rhs[2 * N] = -c1;
        rhs[2 * N + 1] = -c2;

        const GmresResult gres = gmres.solve(jacobian, preconditioner, rhs.data(), delta.data());

        bool accepted = false;
        double cand_res = res;
        Complex cand_mu = mu;
        double cc1 = 0.0, cc2 = 0.0;
        for (double scale : {1.0, 0.5, 0.25, 0.125}) {
            for (std::size_t i = 0; i < N; ++i)
                cand.values[i] = psi.values[i] + scale * Complex(delta[i], delta[N + i]);
            cand_mu = mu + scale * Complex(delta[2 * N], delta[2 * N + 1]);
            if (pt_lock) {
                pt_project(cand, params, pt_use_x);
                cand_mu = Complex(cand_mu.real(), 0.0);
            }
            cand_res = residual_of(cand, cand_mu, jbuf, cc1, cc2);
            if (std::isfinite(cand_res) && cand_res < res) {
                accepted = true;
                if (report)
                    report->history.push_back({iter + 1, cand_res, gres.iterations, scale});
                break;
            }
        }
        if (!accepted) return fail("line search failed (residual not reduced)", iter);
        std::swap(psi.values, cand.values);
        mu = cand_mu;
        hop.apply(psi, rfield);
        for (std::size_t i = 0; i < N; ++i) rfield.values[i] -= mu * psi.values[i];
        c1 = cc1;
        c2 = cc2;
        res = cand_res;
        res_history.push_back(res);
    }
    if (res <= config.residual_tolerance) {
        if (report) report->converged = true;
        return finalize_state(std::move(psi), mu, params, w);
    }
    return fail("iteration cap reached", config.max_newton_iterations);
}

namespace {

Branch continue_generic(const StationaryState& seed, double target, const SolverConfig& config,
                        bool in_gamma) {
    config.validate();
    if (seed.residual_norm > 10.0 * config.residual_tolerance)
        throw UnsupportedRegimeError("continuation: seed state is not converged");

    Branch branch;
    branch.states.push_back(seed);
    const double full_step = in_gamma ? config.continuation_step : config.omega_continuation_step;
    double current = in_gamma ? seed.params.gain_loss : seed.params.rotation;
    double step = full_step;
    const double dir = target >= current ? 1.0 : -1.0;
    if (std::abs(target - current) < 1e-15) {
        branch.termination = BranchTermination::ReachedTarget;
        return branch;
    }

    int attempts = 0;
    const int max_attempts = 100000;
    while (attempts++ < max_attempts) {
        double next = current + dir * step;
        if ((dir > 0 && next > target) || (dir < 0 && next < target)) next = target;
        SystemParams p = seed.params;
        if (in_gamma)
            p.gain_loss = next;
        else
            p.rotation = next;

        const StationaryState& prev = branch.states.back();
        NewtonReport rep;
        try {
            StationaryState st = newton_solve(prev.psi, prev.mu, p, config, &rep);
            int kry = 0;
            for (const auto& h : rep.history) kry += h.krylov_iterations;
            branch.log.push_back({next, st.mu, st.residual_norm,
                                  static_cast<int>(rep.history.size()), kry});
            branch.states.push_back(std::move(st));
            current = next;
            if (current == target) {
                branch.termination = BranchTermination::ReachedTarget;
                return branch;
            }
            step = std::min(step * 2.0, full_step);
        } catch (const NonConvergenceError& e) {
            const double attempted = std::abs(next - current);
            if (attempted <= config.min_continuation_step * (1.0 + 1e-9)) {
                branch.termination = BranchTermination::TangentBifurcationBracket;
                branch.bracket_last_good = current;
                branch.bracket_first_failed = next;
                branch.failure_message = e.what();
                return branch;
            }
            step = std::max(step * 0.5, config.min_continuation_step);
        }
    }
    branch.termination = BranchTermination::SolverFailure;
    branch.failure_message = "continuation: attempt budget exhausted";
    return branch;
}

} // namespace

Branch continue_in_gamma(const StationaryState& seed, double gamma_target, const SolverConfig& config) {
    return continue_generic(seed, gamma_target, config, true);
}

Branch continue_in_omega(const StationaryState& seed, double omega_target, const SolverConfig& config) {
    return continue_generic(seed, omega_target, config, false);
}

std::vector<std::pair<std::string, std::vector<VortexImprint>>> census_imprint_library(double radius) {
    const double d = radius;
    const double s = d / std::sqrt(2.0);
    std::vector<std::pair<std::string, std::vector<VortexImprint>>> lib;
    lib.push_back({"v0", {}});
    lib.push_back({"v1-center", {{0.0, 0.0, 1}}});
    lib.push_back({"v2-xaxis", {{d, 0.0, 1}, {-d, 0.0, 1}}});
    lib.push_back({"v2-yaxis", {{0.0, d, 1}, {0.0, -d, 1}}});
    // Threefold pattern with one vortex on the +x axis (the mirror image is
    // equivalent under the axis-preserving symmetry group).
    lib.push_back({"v3", {{d, 0.0, 1},
                          {d * std::cos(2.0 * M_PI / 3.0), d * std::sin(2.0 * M_PI / 3.0), 1},
                          {d * std::cos(4.0 * M_PI / 3.0), d * std::sin(4.0 * M_PI / 3.0), 1}}});
    lib.push_back({"v4-axes", {{d, 0.0, 1}, {-d, 0.0, 1}, {0.0, d, 1}, {0.0, -d, 1}}});
    lib.push_back({"v4-diag", {{s, s, 1}, {-s, s, 1}, {s, -s, 1}, {-s, -s, 1}}});
    return lib;
}

namespace {

ScalarField reflect_scalar(const ScalarField& f, int axis) {
    const Grid& g = f.grid;
    ScalarField out(g);
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i, ++idx) {
                const int ri = axis == 0 ? nx - 1 - i : i;
                const int rj = axis == 1 ? ny - 1 - j : j;
                const int rk = axis == 2 ? nz - 1 - k : k;
                out.values[idx] = f.values[g.index3(ri, rj, rk)];
            }
    return out;
}

double l2_distance(const ScalarField& a, const ScalarField& b) {
    ScalarField diff(a.grid);
    for (std::size_t i = 0; i < a.values.size(); ++i) diff.values[i] = a.values[i] - b.values[i];
    return norm(diff);
}

/// Distance between densities modulo the transformations that keep the
/// gain/loss axis in place: identity, the two single-axis reflections and
/// the in-plane point reflection.
double density_distance_mod_symmetry(const ScalarField& a, const ScalarField& b) {
    double best = l2_distance(a, b);
    const ScalarField bx = reflect_scalar(b, 0);
    best = std::min(best, l2_distance(a, bx));
    const ScalarField by = reflect_scalar(b, 1);
    best = std::min(best, l2_distance(a, by));
    const ScalarField bxy = reflect_scalar(bx, 1);
    best = std::min(best, l2_distance(a, bxy));
    return best;
}

} // namespace

std::vector<CensusResult> census_2d(const SystemParams& params, const Grid& grid,
                                    const std::vector<double>& omegas, const SolverConfig& config) {
    if (params.dimension != 2) throw UnsupportedRegimeError("census_2d: 2D systems only");
    if (params.gain_loss != 0.0) throw UnsupportedRegimeError("census_2d: requires gamma = 0");
    config.validate();

    const auto library = census_imprint_library();

    // Two-level relaxation: converge the slow vortex rearrangement on a
    // coarser grid first, then refine and polish on the requested grid.
    const bool two_level = grid.points(0) > 72;
    Grid coarse;
    if (two_level) {
        GridSpec cs = grid.spec();
        for (int a = 0; a < grid.dimension(); ++a) cs.points[a] = grid.points(a) / 2;
        coarse = Grid(cs);
    }

    std::vector<CensusResult> results;
    for (double omega : omegas) {
        SystemParams p = params;
        p.rotation = omega;
        CensusResult result;
        result.omega = omega;

        for (const auto& [name, imprints] : library) {
            try {
                StationaryState st = [&]() {
                    if (two_level) {
                        const double ratio = coarse.spacing(0) / grid.spacing(0);
                        SolverConfig cc = config;
                        cc.itp_time_step = config.itp_time_step * std::min(4.0, ratio * ratio);
                        cc.itp_residual_target = std::max(config.itp_residual_target, 1e-3);
                        ComplexField seed = imprint_vortices(gaussian_seed(coarse), imprints);
                        StationaryState rough = ground_state_itp(seed, p, cc);
                        ComplexField up = resample(rough.psi, grid);
                        normalize(up);
                        SolverConfig fc = config;
                        fc.itp_residual_target = std::max(config.itp_residual_target, 1e-4);
                        return ground_state_itp(up, p, fc);
                    }
                    ComplexField seed = imprint_vortices(gaussian_seed(grid), imprints);
                    return ground_state_itp(seed, p, config);
                }();
                st = newton_solve(st.psi, st.mu, p, config);
                CensusEntry entry;
                entry.vortex_count = static_cast<int>(detect_vortices_2d(st.psi).size());
                entry.state = std::move(st);
                entry.seed_name = name;
                result.states.push_back(std::move(entry));
            } catch (const NonConvergenceError& e) {
                result.failures.push_back(name + ": " + e.what());
            }
        }

        // Deduplicate by density distance, keeping the better-converged copy.
        std::vector<CensusEntry> distinct;
        for (auto& entry : result.states) {
            const ScalarField rho = density(entry.state.psi);
            bool duplicate = false;
            for (auto& kept : distinct) {
                if (density_distance_mod_symmetry(rho, density(kept.state.psi)) <= 1e-3) {
                    duplicate = true;
                    if (entry.state.residual_norm < kept.state.residual_norm) kept = std::move(entry);
                    break;
                }
            }
            if (!duplicate) distinct.push_back(std::move(entry));
        }
        std::sort(distinct.begin(), distinct.end(), [](const CensusEntry& a, const CensusEntry& b) {
            return a.state.observables.e_mf_rot < b.state.observables.e_mf_rot;
        });
        result.states = std::move(distinct);
        results.push_back(std::move(result));
    }
    return results;
}

} // namespace gpe
