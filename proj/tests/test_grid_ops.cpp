#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gpe/grid.hpp"
#include "gpe/ops.hpp"
#include "oracles.hpp"

using namespace gpe;

namespace {

ComplexField gaussian(const Grid& g) {
    ComplexField f(g);
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const double x = g.coord(0, i), y = g.coord(1, j), z = g.coord(2, k);
                f.values[g.index3(i, j, k)] = std::exp(-0.25 * (x * x + y * y + z * z));
            }
    return f;
}

double rayleigh_error(int n) {
    // Eigenvalue of -Lap + r^2/4 on the sampled Gaussian, against the
    // analytic value 1 (2D).
    Grid g(GridSpec::square2d(n, 8.0));
    ComplexField f = gaussian(g);
    ComplexField hf = laplacian(f);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = g.coord(0, i), y = g.coord(1, j);
            const std::size_t idx = g.index2(i, j);
            hf.values[idx] = -hf.values[idx] + 0.25 * (x * x + y * y) * f.values[idx];
        }
    const double e = inner(f, hf).real() / inner(f, f).real();
    return std::abs(e - 1.0);
}

} // namespace

TEST_CASE("grid construction and invariants") {
    Grid g(GridSpec::square2d(33, 8.0));
    CHECK(g.dimension() == 2);
    CHECK(g.node_count() == 33 * 33);
    CHECK(g.spacing(0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(g.coord(0, 0) == doctest::Approx(-8.0));
    CHECK(g.coord(0, 32) == doctest::Approx(8.0));
    CHECK(g.coord(0, 16) == doctest::Approx(0.0));

    CHECK_THROWS_AS(Grid(GridSpec::square2d(4, 8.0)), InvalidGridError);
    CHECK_THROWS_AS(Grid(GridSpec::square2d(32, -1.0)), InvalidGridError);
    GridSpec bad = GridSpec::square2d(32, 8.0);
    bad.dimension = 4;
    CHECK_THROWS_AS(Grid{bad}, InvalidGridError);
}

TEST_CASE("field conformity errors") {
    Grid g(GridSpec::square2d(16, 8.0));
    ComplexField f(g);
    f.values.pop_back();
    CHECK_THROWS_AS(laplacian(f), InvalidFieldError);
    CHECK_THROWS_AS(gradient(f), InvalidFieldError);
    CHECK_THROWS_AS(angular_momentum_z(f), InvalidFieldError);
    ComplexField h(g);
    h.values[3] = Complex(std::nan(""), 0.0);
    CHECK_THROWS_AS(h.require_finite("test"), InvalidFieldError);
}

TEST_CASE("laplacian recovers the oscillator ground state eigenvalue") {
    Grid g(GridSpec::square2d(128, 8.0));
    ComplexField f = gaussian(g);
    const ComplexField lap = laplacian(f);
    double fmax = 0.0;
    for (const auto& z : f.values) fmax = std::max(fmax, std::abs(z));
    for (int j = 2; j < g.points(1) - 2; ++j)
        for (int i = 2; i < g.points(0) - 2; ++i) {
            const std::size_t idx = g.index2(i, j);
            if (std::abs(f.values[idx]) < 1e-2 * fmax) continue;
            const double x = g.coord(0, i), y = g.coord(1, j);
            const Complex hf = -lap.values[idx] + 0.25 * (x * x + y * y) * f.values[idx];
            CHECK(std::abs(hf / f.values[idx] - 1.0) <= 1e-4);
        }
}

TEST_CASE("laplacian of zero is zero") {
    Grid g(GridSpec::square2d(16, 6.0));
    ComplexField f(g);
    const ComplexField lap = laplacian(f);
    for (const auto& z : lap.values) CHECK(std::abs(z) == 0.0);
}

TEST_CASE("laplacian matches the dense stencil oracle") {
    for (int dim = 2; dim <= 3; ++dim) {
        Grid g(dim == 2 ? GridSpec::square2d(8, 5.0) : GridSpec::cube3d(8, 5.0));
        const ComplexField f = oracles::random_field(g, 11);
        const ComplexField lap = laplacian(f);
        const Eigen::VectorXcd expect = -oracles::neg_laplacian_matrix(g) * oracles::to_vector(f);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::abs(lap.values[i] - expect(i)) <= 1e-12);
    }
}

TEST_CASE("gradient is exact on a linear ramp and zero on constants") {
    Grid g(GridSpec::square2d(32, 8.0));
    ComplexField ramp(g), constant(g);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) {
            ramp.values[g.index2(i, j)] = g.coord(0, i);
            constant.values[g.index2(i, j)] = 3.5;
        }
    const auto dr = gradient(ramp);
    const auto dc = gradient(constant);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i) {
            CHECK(std::abs(dr[0].values[g.index2(i, j)] - 1.0) <= 1e-10);
            CHECK(std::abs(dr[1].values[g.index2(i, j)]) <= 1e-10);
            CHECK(std::abs(dc[0].values[g.index2(i, j)]) <= 1e-10);
        }
}

TEST_CASE("gradient matches the dense stencil oracle") {
    Grid g(GridSpec::square2d(8, 5.0));
    const ComplexField f = oracles::random_field(g, 12);
    const auto grad = gradient(f);
    for (int a = 0; a < 2; ++a) {
        const Eigen::VectorXcd expect = oracles::gradient_component_matrix(g, a) * oracles::to_vector(f);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::abs(grad[a].values[i] - expect(i)) <= 1e-12);
    }
}

TEST_CASE("angular momentum eigenstate and symmetry") {
    const int n = 256; // pointwise 1e-4 on the m = 1 state needs this resolution
    Grid g(GridSpec::square2d(n, 8.0));
    ComplexField f(g), gauss = gaussian(g);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double x = g.coord(0, i), y = g.coord(1, j);
            f.values[g.index2(i, j)] = Complex(x, y) * std::exp(-0.25 * (x * x + y * y));
        }
    const ComplexField lzf = angular_momentum_z(f);
    double fmax = 0.0;
    for (const auto& z : f.values) fmax = std::max(fmax, std::abs(z));
    for (int j = 2; j < n - 2; ++j)
        for (int i = 2; i < n - 2; ++i) {
            const std::size_t idx = g.index2(i, j);
            if (std::abs(f.values[idx]) < 1e-2 * fmax) continue;
            CHECK(std::abs(lzf.values[idx] / f.values[idx] - 1.0) <= 1e-4);
        }
    // Rotationally symmetric real field: Lz annihilates it up to the
    // stencil truncation error.
    const ComplexField lzg = angular_momentum_z(gauss);
    for (std::size_t i = 0; i < lzg.values.size(); ++i) CHECK(std::abs(lzg.values[i]) <= 1e-4);
}

TEST_CASE("angular momentum matches the dense oracle and is Hermitian") {
    Grid g(GridSpec::square2d(8, 5.0));
    const ComplexField f = oracles::random_field(g, 13);
    const ComplexField lz = angular_momentum_z(f);
    const Eigen::MatrixXcd m = oracles::angular_momentum_matrix(g);
    const Eigen::VectorXcd expect = m * oracles::to_vector(f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(lz.values[i] - expect(i)) <= 1e-12);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13);

    // Hermiticity through the quadrature inner product, interior fields.
    Grid gg(GridSpec::square2d(48, 8.0));
    ComplexField a = oracles::random_field(gg, 14), b = oracles::random_field(gg, 15);
    for (int j = 0; j < 48; ++j)
        for (int i = 0; i < 48; ++i) {
            const double x = gg.coord(0, i), y = gg.coord(1, j);
            const double cut = std::exp(-0.5 * (x * x + y * y)); // interior support
            a.values[gg.index2(i, j)] *= cut;
            b.values[gg.index2(i, j)] *= cut;
        }
    // Hermiticity in the quadrature inner product (conjugate-linear in the
    // first slot): <f, Lz g> = <Lz f, g>.
    const Complex lhs = inner(a, angular_momentum_z(b));
    const Complex rhs = inner(angular_momentum_z(a), b);
    CHECK(std::abs(lhs - rhs) <= 1e-10);
}

TEST_CASE("operators are linear") {
    Grid g(GridSpec::square2d(12, 6.0));
    const ComplexField f = oracles::random_field(g, 21);
    const ComplexField h = oracles::random_field(g, 22);
    const Complex a(0.3, -1.1), b(-0.7, 0.2);
    ComplexField combo(g);
    for (std::size_t i = 0; i < f.size(); ++i) combo.values[i] = a * f.values[i] + b * h.values[i];

    auto check_linear = [&](auto&& op) {
        const ComplexField lhs = op(combo);
        const ComplexField of = op(f), oh = op(h);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(std::abs(lhs.values[i] - (a * of.values[i] + b * oh.values[i])) <= 1e-12);
    };
    check_linear([](const ComplexField& x) { return laplacian(x); });
    check_linear([](const ComplexField& x) { return angular_momentum_z(x); });
    check_linear([](const ComplexField& x) { return gradient(x)[0]; });
}

TEST_CASE("integrate: Gaussian, zero field, refinement oracle") {
    Grid g(GridSpec::square2d(96, 8.0));
    const ComplexField f = gaussian(g);
    const double integral = integrate(density(f));
    CHECK(integral == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-6));

    CHECK(integrate(ScalarField(g)) == 0.0);

    // Random smooth field against a nested-grid refinement oracle.
    auto smooth = [](const Grid& gr) {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> pos(-3.0, 3.0), amp(0.5, 2.0);
        std::vector<std::array<double, 4>> bumps;
        for (int b = 0; b < 5; ++b) bumps.push_back({pos(rng), pos(rng), amp(rng), amp(rng)});
        ScalarField out(gr);
        for (int j = 0; j < gr.points(1); ++j)
            for (int i = 0; i < gr.points(0); ++i) {
                const double x = gr.coord(0, i), y = gr.coord(1, j);
                double v = 0.0;
                for (const auto& bp : bumps)
                    v += bp[3] * std::exp(-((x - bp[0]) * (x - bp[0]) + (y - bp[1]) * (y - bp[1])) /
                                          (bp[2] * bp[2]));
                out.values[gr.index2(i, j)] = v;
            }
        return out;
    };
    Grid coarse(GridSpec::square2d(65, 8.0));
    Grid fine(GridSpec::square2d(129, 8.0));
    const double i_coarse = integrate(smooth(coarse));
    const double i_fine = integrate(smooth(fine));
    CHECK(std::abs(i_coarse - i_fine) <= 1e-6 * std::abs(i_fine));
}

TEST_CASE("convergence order of the stencil") {
    const double e1 = rayleigh_error(24);
    const double e2 = rayleigh_error(48);
    CHECK(e1 / e2 >= 8.0); // nominal order 4 gives ~16 when h halves
}

TEST_CASE("resample reproduces smooth fields and reflect is an involution") {
    Grid src(GridSpec::square2d(64, 8.0));
    Grid dst(GridSpec::square2d(96, 8.0));
    const ComplexField f = gaussian(src);
    const ComplexField up = resample(f, dst);
    const ComplexField ref = gaussian(dst);
    for (std::size_t i = 0; i < up.size(); ++i) CHECK(std::abs(up.values[i] - ref.values[i]) <= 5e-4);

    const ComplexField r = oracles::random_field(src, 41);
    const ComplexField twice = reflect(reflect(r, Axis::Y), Axis::Y);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(twice.values[i] == r.values[i]);
}
