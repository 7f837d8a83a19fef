#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpe/bdg.hpp"
#include "gpe/linalg.hpp"
#include "gpe/ops.hpp"
#include "oracles.hpp"

using namespace gpe;

namespace {

constexpr double kPi = std::numbers::pi;

// Dense block matrix of the linearization, assembled from the test-side
// oracle matrices (independent of the production assembly and kernels).
Eigen::MatrixXcd bdg_block_oracle(const StationaryState& st) {
    const Grid& g = st.psi.grid;
    const std::size_t n = g.node_count();
    const double nl = 8.0 * kPi * st.params.interaction;

    Eigen::MatrixXcd a = oracles::neg_laplacian_matrix(g);
    if (st.params.rotation != 0.0) a -= st.params.rotation * oracles::angular_momentum_matrix(g);
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const std::size_t r = g.index3(i, j, k);
                const double x = g.coord(0, i), y = g.coord(1, j), z = g.coord(2, k);
                const double trap = 0.25 * (x * x + y * y + z * z);
                const int axis = axis_index(st.params.gain_loss_axis);
                const double c = axis == 0 ? x : (axis == 1 ? y : z);
                const double w = c > 0 ? st.params.gain_loss : (c < 0 ? -st.params.gain_loss : 0.0);
                a(r, r) += Complex(trap + 2.0 * nl * std::norm(st.psi.values[r]), -w) - st.mu;
            }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    m.topLeftCorner(n, n) = a;
    m.bottomRightCorner(n, n) = -a.conjugate();
    for (std::size_t i = 0; i < n; ++i) {
        const Complex b = nl * st.psi.values[i] * st.psi.values[i];
        m(i, n + i) = b;
        m(n + i, i) = -std::conj(b);
    }
    return m;
}

const StationaryState& vortex_state_64() {
    static const StationaryState st = [] {
        Grid g(GridSpec::square2d(64, 8.0));
        SystemParams p = SystemParams::make(2, 1.0, 0.85, 0.0);
        SolverConfig cfg;
        cfg.itp_residual_target = 1e-5;
        const StationaryState itp =
            ground_state_itp(imprint_vortices(gaussian_seed(g), {{0.0, 0.0, 1}}), p, cfg);
        return newton_solve(itp.psi, itp.mu, p, cfg);
    }();
    return st;
}

const BdgSpectrum& vortex_dense_spectrum() {
    static const BdgSpectrum spec = bdg_spectrum(vortex_state_64(), BdgMode::DenseCoarse);
    return spec;
}

} // namespace

TEST_CASE("bdg apply matches the dense block oracle") {
    Grid g(GridSpec::square2d(16, 6.0));
    SystemParams p = SystemParams::make(2, 1.0, 0.6, 0.2);
    StationaryState st;
    st.psi = oracles::random_field(g, 3);
    normalize(st.psi);
    st.mu = Complex(1.3, -0.05);
    st.params = p;
    st.residual_norm = 0.0; // oracle check only, not a physical state

    const ComplexField u = oracles::random_field(g, 4);
    const ComplexField v = oracles::random_field(g, 5);
    const auto [mu_u, mu_v] = bdg_apply(u, v, st);

    const Eigen::MatrixXcd m = bdg_block_oracle(st);
    Eigen::VectorXcd w(2 * g.node_count());
    w << oracles::to_vector(u), oracles::to_vector(v);
    const Eigen::VectorXcd expect = m * w;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(std::abs(mu_u.values[i] - expect(i)) <= 1e-12);
        CHECK(std::abs(mu_v.values[i] - expect(g.node_count() + i)) <= 1e-12);
    }
}

TEST_CASE("bdg apply matches the dense block oracle in 3d") {
    Grid g(GridSpec::cube3d(8, 5.0));
    SystemParams p = SystemParams::make(3, 2.0, 0.4, 0.15);
    StationaryState st;
    st.psi = oracles::random_field(g, 6);
    normalize(st.psi);
    st.mu = Complex(2.0, 0.01);
    st.params = p;
    st.residual_norm = 0.0;

    const ComplexField u = oracles::random_field(g, 7);
    const ComplexField v = oracles::random_field(g, 8);
    const auto [mu_u, mu_v] = bdg_apply(u, v, st);
    const Eigen::MatrixXcd m = bdg_block_oracle(st);
    Eigen::VectorXcd w(2 * g.node_count());
    w << oracles::to_vector(u), oracles::to_vector(v);
    const Eigen::VectorXcd expect = m * w;
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        CHECK(std::abs(mu_u.values[i] - expect(i)) <= 1e-12);
        CHECK(std::abs(mu_v.values[i] - expect(g.node_count() + i)) <= 1e-12);
    }
}

TEST_CASE("linear limit: decoupled block reproduces oscillator gaps") {
    Grid g(GridSpec::square2d(32, 8.0));
    SystemParams p = SystemParams::make(2, 0.0, 0.0, 0.0);
    SolverConfig cfg;
    const StationaryState st = newton_solve(gaussian_seed(g), Complex(1.0, 0.0), p, cfg);

    // With Na = 0 the u row carries (-Lap + V - mu) alone; v stays zero.
    const ComplexField u = oracles::random_field(g, 9);
    const ComplexField zero(g);
    const auto [mu_u, mu_v] = bdg_apply(u, zero, st);
    for (std::size_t i = 0; i < g.node_count(); ++i) CHECK(std::abs(mu_v.values[i]) == 0.0);
    const ComplexField direct = gpe_residual(u, st.mu, p);
    for (std::size_t i = 0; i < g.node_count(); ++i)
        CHECK(std::abs(mu_u.values[i] - direct.values[i]) <= 1e-12);

    BdgConfig bc;
    bc.dense_points_2d = 32;
    const BdgSpectrum spec = bdg_spectrum(st, BdgMode::DenseCoarse, bc);
    CHECK(spec.stable);
    // Positive eigenvalues start at the oscillator gaps 1, 1, 2, ...
    std::vector<double> positive;
    for (const Complex& w : spec.eigenvalues)
        if (w.real() > 0.5 && std::abs(w.imag()) < 1e-8) positive.push_back(w.real());
    std::sort(positive.begin(), positive.end());
    REQUIRE(positive.size() >= 5);
    CHECK(positive[0] == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(positive[1] == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(positive[2] == doctest::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("goldstone direction maps to zero") {
    const StationaryState& st = vortex_state_64();
    ComplexField v(st.psi.grid);
    for (std::size_t i = 0; i < v.size(); ++i) v.values[i] = -std::conj(st.psi.values[i]);
    const auto [mu_u, mu_v] = bdg_apply(st.psi, v, st);
    CHECK(norm(mu_u) <= 1e-6);
    CHECK(norm(mu_v) <= 1e-6);
}

TEST_CASE("dense spectrum: pairing, zero mode, stability of the vortex state") {
    const BdgSpectrum& spec = vortex_dense_spectrum();
    CHECK(spec.stable);
    CHECK(spec.max_growth_rate <= 1e-6);
    CHECK(spec.resolution.points[0] == 40);

    // {omega, -conj(omega)} pairing.
    const auto& ev = spec.eigenvalues;
    int checked = 0;
    for (std::size_t i = 0; i < ev.size() && checked < 200; ++i) {
        if (std::abs(ev[i]) < 1e-6) continue;
        double best = 1e9;
        for (std::size_t j = 0; j < ev.size(); ++j)
            best = std::min(best, std::abs(ev[j] + std::conj(ev[i])));
        CHECK(best <= 1e-8);
        ++checked;
    }

    // The phase mode sits at omega = 0 within the discard radius.
    double minmod = 1e9;
    for (const Complex& w : ev) minmod = std::min(minmod, std::abs(w));
    CHECK(minmod <= 1e-3);
}

TEST_CASE("iterative-extremal agrees with dense on the low-frequency window") {
    const StationaryState& st = vortex_state_64();
    BdgConfig bc;
    bc.scan_max_frequency = 1.5;
    const BdgSpectrum iter = bdg_spectrum(st, BdgMode::IterativeExtremal, bc);
    CHECK(iter.stable);
    CHECK(iter.max_growth_rate <= bc.iterative_stability_threshold);
    REQUIRE(!iter.eigenvalues.empty());

    // Every certified Ritz value appears in the dense spectrum of the same
    // operator up to the coarse-grid difference.
    const BdgSpectrum& dense = vortex_dense_spectrum();
    int compared = 0;
    for (const Complex& w : iter.eigenvalues) {
        if (std::abs(w) < 1e-3 || std::abs(w) > 1.2) continue;
        double best = 1e9;
        for (const Complex& d : dense.eigenvalues) best = std::min(best, std::abs(d - w));
        CHECK(best <= 5e-2); // 64^2 vs 40^2 discretization difference
        ++compared;
    }
    CHECK(compared >= 3);
}

TEST_CASE("bdg rejects unconverged base states") {
    Grid g(GridSpec::square2d(24, 6.0));
    StationaryState st;
    st.psi = gaussian_seed(g);
    st.mu = Complex(1.0, 0.0);
    st.params = SystemParams::make(2, 0.0, 0.0, 0.0);
    st.residual_norm = 1.0;
    CHECK_THROWS_AS(bdg_spectrum(st, BdgMode::DenseCoarse), UnsupportedRegimeError);
}
