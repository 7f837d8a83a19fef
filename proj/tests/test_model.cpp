#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpe/model.hpp"
#include "gpe/ops.hpp"
#include "gpe/stationary.hpp"
#include "gpe/vortex.hpp"
#include "oracles.hpp"

using namespace gpe;

namespace {

constexpr double kPi = std::numbers::pi;

ComplexField vortex_eigenstate(const Grid& g) {
    ComplexField f(g);
    for (int j = 0; j < g.points(1); ++j)
        for (int i = 0; i < g.points(0); ++i) {
            const double x = g.coord(0, i), y = g.coord(1, j);
            f.values[g.index2(i, j)] = Complex(x, y) * std::exp(-0.25 * (x * x + y * y));
        }
    normalize(f);
    return f;
}

} // namespace

TEST_CASE("real potential values at integer nodes") {
    Grid g2(GridSpec::square2d(17, 8.0)); // h = 1, integer coordinates are nodes
    SystemParams p2 = SystemParams::make(2, 0.0, 0.0, 0.0);
    const ScalarField v2 = potential_real(g2, p2);
    CHECK(v2.values[g2.index2(10, 8)] == doctest::Approx(1.0)); // (x,y) = (2,0)
    Grid g3(GridSpec::cube3d(17, 8.0));
    SystemParams p3 = SystemParams::make(3, 0.0, 0.0, 0.0);
    const ScalarField v3 = potential_real(g3, p3);
    CHECK(v3.values[g3.index3(8, 8, 8)] == doctest::Approx(0.0));
    CHECK(v3.values[g3.index3(9, 9, 9)] == doctest::Approx(0.75)); // (1,1,1)
}

TEST_CASE("imaginary potential: sign step with sign(0) = 0") {
    Grid g(GridSpec::square2d(17, 8.0));
    SystemParams p = SystemParams::make(2, 0.0, 0.0, 0.3);
    const ScalarField w = potential_imag(g, p);
    // y = -1.5 is not a node on this grid; take y = -2 and y = +3 instead,
    // plus the nodal line y = 0.
    CHECK(w.values[g.index2(8, 6)] == doctest::Approx(-0.3)); // y = -2: gain side (V_I = +0.3i)
    CHECK(w.values[g.index2(8, 11)] == doctest::Approx(0.3)); // y = +3: loss side
    CHECK(w.values[g.index2(3, 8)] == 0.0);                   // y = 0 nodal line

    SystemParams off = SystemParams::make(2, 0.0, 0.0, 0.0);
    const ScalarField w0 = potential_imag(g, off);
    for (double v : w0.values) CHECK(v == 0.0);
}

TEST_CASE("hamiltonian: linear ground state and rotating vortex eigenstate") {
    Grid g(GridSpec::square2d(128, 8.0));
    SystemParams p = SystemParams::make(2, 0.0, 0.0, 0.0);
    ComplexField psi = gaussian_seed(g);
    ComplexField h = apply_hamiltonian(psi, p);
    double fmax = 0.0;
    for (const auto& z : psi.values) fmax = std::max(fmax, std::abs(z));
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (std::abs(psi.values[i]) < 1e-2 * fmax) continue;
        CHECK(std::abs(h.values[i] / psi.values[i] - 1.0) <= 1e-4);
    }

    SystemParams rot = SystemParams::make(2, 0.0, 0.85, 0.0);
    const ComplexField m1 = vortex_eigenstate(g);
    const ComplexField hm1 = apply_hamiltonian(m1, rot);
    for (std::size_t i = 0; i < m1.size(); ++i) {
        if (std::abs(m1.values[i]) < 1e-2 * fmax) continue;
        CHECK(std::abs(hm1.values[i] / m1.values[i] - 1.15) <= 1.15 * 1e-4);
    }
}

TEST_CASE("hamiltonian expectation matches the term-by-term quadrature oracle") {
    Grid g(GridSpec::square2d(96, 8.0));
    SystemParams p = SystemParams::make(2, 1.0, 0.0, 0.0);
    const ComplexField psi = gaussian_seed(g);
    const Complex direct = inner(psi, apply_hamiltonian(psi, p));

    const auto grad = gradient(psi);
    const ScalarField trap = potential_real(g, p);
    ScalarField integrand(g);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        double gsq = 0.0;
        for (const auto& c : grad) gsq += std::norm(c.values[i]);
        const double rho = std::norm(psi.values[i]);
        integrand.values[i] = gsq + trap.values[i] * rho + 8.0 * kPi * rho * rho;
    }
    CHECK(std::abs(direct.real() - integrate(integrand)) <= 1e-4);
    CHECK(std::abs(direct.imag()) <= 1e-10); // Hermitian limit
}

TEST_CASE("gpe residual: eigenpair and exact linearity in mu") {
    Grid g(GridSpec::square2d(96, 8.0));
    SystemParams p = SystemParams::make(2, 0.0, 0.0, 0.0);
    const ComplexField psi = gaussian_seed(g);
    CHECK(gpe_residual_norm(psi, Complex(1.0, 0.0), p) <= 1e-4);

    // A converged root: perturbing mu by delta raises the norm to |delta|.
    SolverConfig cfg;
    const StationaryState st = newton_solve(psi, Complex(1.0, 0.0), p, cfg);
    const double delta = 0.01;
    const double perturbed = gpe_residual_norm(st.psi, st.mu + delta, st.params);
    CHECK(std::abs(perturbed - delta * norm(st.psi)) <= 1e-8);
}

TEST_CASE("observables: energies, angular momentum, half-space norms") {
    Grid g(GridSpec::square2d(128, 8.0));
    SystemParams p = SystemParams::make(2, 0.0, 0.0, 0.0);
    const ComplexField psi = gaussian_seed(g);
    const Observables obs = compute_observables(psi, p);
    CHECK(obs.e_mf_rot == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(obs.lz) <= 1e-10);
    CHECK(obs.n_lower == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(obs.n_upper == doctest::Approx(0.5).epsilon(1e-8));

    SystemParams rot = SystemParams::make(2, 0.0, 0.85, 0.0);
    const Observables vobs = compute_observables(vortex_eigenstate(g), rot);
    CHECK(vobs.lz == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(vobs.e_mf_rot == doctest::Approx(1.15).epsilon(1e-4));

    ComplexField unnorm = psi;
    for (auto& z : unnorm.values) z *= 2.0;
    CHECK_THROWS_AS(compute_observables(unnorm, p), NormalizationError);
}

TEST_CASE("current density: real fields carry none, vortices circulate") {
    Grid g(GridSpec::square2d(128, 8.0));
    const ComplexField psi = gaussian_seed(g);
    for (const auto& c : current_density(psi))
        for (double v : c.values) CHECK(v == 0.0);

    // Phase-winding oracle: the line integral of j/|psi|^2 around a vortex
    // equals 2 * 2 pi (factor 2 from the current convention).
    const ComplexField m1 = vortex_eigenstate(g);
    const auto j = current_density(m1);
    const double radius = 1.5;
    const int samples = 720;
    double circulation = 0.0;
    auto interp = [&](const ScalarField& f, double x, double y) {
        const int i = std::clamp(static_cast<int>(std::floor((x + 8.0) / g.spacing(0))), 0, 126);
        const int jj = std::clamp(static_cast<int>(std::floor((y + 8.0) / g.spacing(1))), 0, 126);
        const double u = (x - g.coord(0, i)) / g.spacing(0);
        const double v = (y - g.coord(1, jj)) / g.spacing(1);
        return (1 - u) * (1 - v) * f.values[g.index2(i, jj)] + u * (1 - v) * f.values[g.index2(i + 1, jj)] +
               (1 - u) * v * f.values[g.index2(i, jj + 1)] + u * v * f.values[g.index2(i + 1, jj + 1)];
    };
    ScalarField rho = density(m1);
    for (int s = 0; s < samples; ++s) {
        const double t = 2.0 * kPi * s / samples;
        const double x = radius * std::cos(t), y = radius * std::sin(t);
        const double jx = interp(j[0], x, y), jy = interp(j[1], x, y);
        const double d = interp(rho, x, y);
        const double dl = 2.0 * kPi * radius / samples;
        circulation += ((-std::sin(t)) * jx + std::cos(t) * jy) / d * dl;
    }
    CHECK(circulation == doctest::Approx(4.0 * kPi).epsilon(0.05));
}

TEST_CASE("continuity residual: on-shell zero, off-shell of order gamma") {
    Grid g(GridSpec::square2d(64, 8.0));
    SystemParams p0 = SystemParams::make(2, 1.0, 0.0, 0.0);
    SolverConfig cfg;
    cfg.itp_residual_target = 1e-6;
    const StationaryState ground = ground_state_itp(gaussian_seed(g), p0, cfg);
    const StationaryState polished = newton_solve(ground.psi, ground.mu, p0, cfg);
    CHECK(norm(continuity_residual(polished.psi, polished.mu, p0)) <= 1e-8);

    const Branch br = continue_in_gamma(polished, 0.3, cfg);
    REQUIRE(br.termination == BranchTermination::ReachedTarget);
    const StationaryState& pt = br.back();
    CHECK(norm(continuity_residual(pt.psi, pt.mu, pt.params)) <= 1e-4);

    // Non-stationary input: the diagnostic is dominated by the gain/loss term.
    SystemParams pg = SystemParams::make(2, 1.0, 0.0, 0.3);
    const ComplexField psi = gaussian_seed(g);
    const double off_shell = norm(continuity_residual(psi, Complex(1.0, 0.0), pg));
    CHECK(off_shell >= 0.03);
    CHECK(off_shell <= 3.0);
}

TEST_CASE("pt symmetry error") {
    Grid g(GridSpec::square2d(64, 8.0));
    CHECK(pt_symmetry_error(gaussian_seed(g), Axis::Y) <= 1e-12);
    const ComplexField shifted = imprint_vortices(gaussian_seed(g), {{0.0, 1.0, 1}});
    CHECK(pt_symmetry_error(shifted, Axis::Y) > 1e-3);
}

TEST_CASE("vortex imprinting") {
    Grid g(GridSpec::square2d(128, 8.0));
    const ComplexField base = gaussian_seed(g);

    const ComplexField one = imprint_vortices(base, {{0.0, 0.0, 1}});
    const auto found = detect_vortices_2d(one);
    REQUIRE(found.size() == 1);
    CHECK(found[0].charge == 1);
    CHECK(std::hypot(found[0].x, found[0].y) <= 0.5 * g.spacing(0));

    // Empty imprint list: unchanged up to scale (input was normalized).
    const ComplexField same = imprint_vortices(base, {});
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(same.values[i] - base.values[i]) <= 1e-14);

    // Threefold pattern recovered within half a grid spacing.
    std::vector<VortexImprint> three;
    for (int k = 0; k < 3; ++k) {
        const double th = 2.0 * kPi * k / 3.0;
        three.push_back({1.5 * std::cos(th), 1.5 * std::sin(th), 1});
    }
    const auto det3 = detect_vortices_2d(imprint_vortices(base, three));
    REQUIRE(det3.size() == 3);
    for (const auto& v : three) {
        double best = 1e9;
        for (const auto& d : det3) best = std::min(best, std::hypot(d.x - v.x, d.y - v.y));
        CHECK(best <= 0.5 * g.spacing(0));
    }

    CHECK_THROWS_AS(imprint_vortices(base, {{9.5, 0.0, 1}}), DomainError);
}

TEST_CASE("gauge covariance of the hamiltonian") {
    Grid g(GridSpec::square2d(12, 6.0));
    SystemParams p = SystemParams::make(2, 1.3, 0.6, 0.2);
    const ComplexField psi = oracles::random_field(g, 77);
    const Complex phase = std::polar(1.0, 0.83);
    ComplexField rotated = psi;
    for (auto& z : rotated.values) z *= phase;
    const ComplexField lhs = apply_hamiltonian(rotated, p);
    const ComplexField rhs = apply_hamiltonian(psi, p);
    for (std::size_t i = 0; i < psi.size(); ++i)
        CHECK(std::abs(lhs.values[i] - phase * rhs.values[i]) <= 1e-12);
}

TEST_CASE("gamma reflection symmetry of the residual") {
    // Point reflection in 2D (z reflection in 3D) maps the system with
    // gain_loss = g onto the one with -g; residual norms agree exactly.
    Grid g2(GridSpec::square2d(20, 6.0));
    SystemParams p2 = SystemParams::make(2, 1.0, 0.7, 0.25);
    SystemParams m2 = p2;
    m2.gain_loss = -p2.gain_loss;
    const ComplexField psi2 = oracles::random_field(g2, 91);
    const ComplexField r2 = reflect(reflect(psi2, Axis::X), Axis::Y);
    const Complex mu(0.9, 0.05);
    CHECK(std::abs(gpe_residual_norm(psi2, mu, p2) - gpe_residual_norm(r2, mu, m2)) <= 1e-10);

    Grid g3(GridSpec::cube3d(10, 5.0));
    SystemParams p3 = SystemParams::make(3, 2.0, 0.4, 0.3);
    SystemParams m3 = p3;
    m3.gain_loss = -p3.gain_loss;
    const ComplexField psi3 = oracles::random_field(g3, 92);
    const ComplexField r3 = reflect(psi3, Axis::Z);
    CHECK(std::abs(gpe_residual_norm(psi3, mu, p3) - gpe_residual_norm(r3, mu, m3)) <= 1e-10);
}

TEST_CASE("hermitian limit: energy expectation real for any field") {
    Grid g(GridSpec::square2d(16, 6.0));
    SystemParams p = SystemParams::make(2, 2.0, 0.9, 0.0);
    ComplexField psi = oracles::random_field(g, 55);
    normalize(psi);
    CHECK(std::abs(inner(psi, apply_hamiltonian(psi, p)).imag()) <= 1e-10);
}

TEST_CASE("midplane flux vanishes without gain or loss") {
    Grid g(GridSpec::cube3d(32, 8.0));
    const ComplexField psi = gaussian_seed(g);
    CHECK(std::abs(midplane_current_flux(psi, Axis::Z)) <= 1e-12);
}
