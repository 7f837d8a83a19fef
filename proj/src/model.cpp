#include "gpe/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gpe {

namespace {

constexpr double kPi = std::numbers::pi;

template <int DIM, class DiagFn>
void stencil_kernel(const Grid& g, const Complex* f, Complex* out, double omega, DiagFn diag) {
    const int nx = g.points(0), ny = g.points(1), nz = DIM == 3 ? g.points(2) : 1;
    const double ax2 = 1.0 / (g.spacing(0) * g.spacing(0));
    const double ay2 = 1.0 / (g.spacing(1) * g.spacing(1));
    const double az2 = DIM == 3 ? 1.0 / (g.spacing(2) * g.spacing(2)) : 0.0;
    const double bx = 1.0 / g.spacing(0);
    const double by = 1.0 / g.spacing(1);
    const double C0 = stencil::d2[2], C1 = stencil::d2[1], C2 = stencil::d2[0];
    const double E1 = 2.0 / 3.0, E2 = 1.0 / 12.0;
    const std::size_t sy = static_cast<std::size_t>(nx);
    const std::size_t sz = sy * static_cast<std::size_t>(ny);
    const std::vector<Complex> zero(nx, Complex(0.0, 0.0));
    const Complex* zr = zero.data();
    const double* xs = g.coords(0).data();

    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            const std::size_t row0 = sy * static_cast<std::size_t>(j) + sz * static_cast<std::size_t>(k);
            const Complex* r0 = f + row0;
            const Complex* ym1 = j >= 1 ? r0 - sy : zr;
            const Complex* ym2 = j >= 2 ? r0 - 2 * sy : zr;
            const Complex* yp1 = j <= ny - 2 ? r0 + sy : zr;
            const Complex* yp2 = j <= ny - 3 ? r0 + 2 * sy : zr;
            const Complex* zm1 = zr;
            const Complex* zm2 = zr;
            const Complex* zp1 = zr;
            const Complex* zp2 = zr;
            if constexpr (DIM == 3) {
                zm1 = k >= 1 ? r0 - sz : zr;
                zm2 = k >= 2 ? r0 - 2 * sz : zr;
                zp1 = k <= nz - 2 ? r0 + sz : zr;
                zp2 = k <= nz - 3 ? r0 + 2 * sz : zr;
            }
            const double y = g.coord(1, j);
            Complex* o = out + row0;

            auto body = [&](int i, const Complex& xm2, const Complex& xm1, const Complex& xp1,
                            const Complex& xp2) {
                const Complex fc = r0[i];
                Complex lap = ax2 * (C2 * (xm2 + xp2) + C1 * (xm1 + xp1) + C0 * fc) +
                              ay2 * (C2 * (ym2[i] + yp2[i]) + C1 * (ym1[i] + yp1[i]) + C0 * fc);
                if constexpr (DIM == 3)
                    lap += az2 * (C2 * (zm2[i] + zp2[i]) + C1 * (zm1[i] + zp1[i]) + C0 * fc);
                Complex res = -lap + diag(row0 + static_cast<std::size_t>(i), fc) * fc;
                if (omega != 0.0) {
                    const Complex dyv = by * (E1 * (yp1[i] - ym1[i]) - E2 * (yp2[i] - ym2[i]));
                    const Complex dxv = bx * (E1 * (xp1 - xm1) - E2 * (xp2 - xm2));
                    const Complex gv = xs[i] * dyv - y * dxv;
                    // -omega * Lz f = i omega (x d/dy - y d/dx) f
                    res += Complex(-omega * gv.imag(), omega * gv.real());
                }
                o[i] = res;
            };

            const Complex z0(0.0, 0.0);
            const int lo_end = std::min(2, nx);
            for (int i = 0; i < lo_end; ++i)
                body(i, i >= 2 ? r0[i - 2] : z0, i >= 1 ? r0[i - 1] : z0, i <= nx - 2 ? r0[i + 1] : z0,
                     i <= nx - 3 ? r0[i + 2] : z0);
            for (int i = 2; i < nx - 2; ++i) body(i, r0[i - 2], r0[i - 1], r0[i + 1], r0[i + 2]);
            for (int i = std::max(2, nx - 2); i < nx; ++i)
                body(i, r0[i - 2], r0[i - 1], i <= nx - 2 ? r0[i + 1] : z0, i <= nx - 3 ? r0[i + 2] : z0);
        }
    }
}

struct GpeDiag {
    const double* trap;
    const double* gain;
    double nl;
    Complex operator()(std::size_t idx, const Complex& v) const {
        return Complex(trap[idx] + nl * std::norm(v), -gain[idx]);
    }
};

struct ArrayDiag {
    const Complex* d;
    Complex operator()(std::size_t idx, const Complex&) const { return d[idx]; }
};

} // namespace

SystemParams SystemParams::make(int dimension, double interaction, double rotation, double gain_loss) {
    SystemParams p;
    p.dimension = dimension;
    p.interaction = interaction;
    p.rotation = rotation;
    p.gain_loss = gain_loss;
    p.gain_loss_axis = dimension == 3 ? Axis::Z : Axis::Y;
    return p;
}

void SystemParams::validate(const Grid& grid) const {
    if (dimension != grid.dimension())
        throw InvalidFieldError("SystemParams dimension " + std::to_string(dimension) +
                                " does not match grid dimension " + std::to_string(grid.dimension()));
    if (axis_index(gain_loss_axis) >= grid.dimension())
        throw InvalidFieldError("gain_loss_axis outside grid dimension");
    if (interaction < 0.0) throw InvalidFieldError("interaction must be >= 0");
    if (rotation < 0.0) throw InvalidFieldError("rotation must be >= 0");
}

ScalarField potential_real(const Grid& grid, const SystemParams& params) {
    params.validate(grid);
    ScalarField out(grid);
    const int nx = grid.points(0), ny = grid.points(1), nz = grid.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double z = grid.coord(2, k);
        for (int j = 0; j < ny; ++j) {
            const double y = grid.coord(1, j);
            for (int i = 0; i < nx; ++i, ++idx) {
                const double x = grid.coord(0, i);
                out.values[idx] = 0.25 * (x * x + y * y + z * z);
            }
        }
    }
    return out;
}

ScalarField potential_imag(const Grid& grid, const SystemParams& params) {
    params.validate(grid);
    ScalarField out(grid);
    const int a = axis_index(params.gain_loss_axis);
    const double gamma = params.gain_loss;
    const int nx = grid.points(0), ny = grid.points(1), nz = grid.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i, ++idx) {
                const double c = grid.coord(a, a == 0 ? i : (a == 1 ? j : k));
                out.values[idx] = c > 0.0 ? gamma : (c < 0.0 ? -gamma : 0.0);
            }
        }
    }
    return out;
}

HamiltonianOp::HamiltonianOp(const Grid& grid, const SystemParams& params)
    : grid_(grid), params_(params) {
    params.validate(grid);
    trap_ = potential_real(grid, params).values;
    gain_ = potential_imag(grid, params).values;
    nl_coef_ = 8.0 * kPi * params.interaction;
}

void HamiltonianOp::apply(const ComplexField& psi, ComplexField& out) const {
    psi.require_conforming("apply_hamiltonian");
    if (!psi.grid.compatible(grid_)) throw InvalidFieldError("apply_hamiltonian: grid mismatch");
    if (out.values.size() != psi.values.size()) out = ComplexField(grid_);
    GpeDiag diag{trap_.data(), gain_.data(), nl_coef_};
    if (grid_.dimension() == 2)
        stencil_kernel<2>(grid_, psi.values.data(), out.values.data(), params_.rotation, diag);
    else
        stencil_kernel<3>(grid_, psi.values.data(), out.values.data(), params_.rotation, diag);
}

ComplexField HamiltonianOp::apply(const ComplexField& psi) const {
    ComplexField out(grid_);
    apply(psi, out);
    return out;
}

void HamiltonianOp::apply_linear(const Complex* f, Complex* out, const Complex* diag) const {
    ArrayDiag d{diag};
    if (grid_.dimension() == 2)
        stencil_kernel<2>(grid_, f, out, params_.rotation, d);
    else
        stencil_kernel<3>(grid_, f, out, params_.rotation, d);
}

ComplexField apply_hamiltonian(const ComplexField& psi, const SystemParams& params) {
    HamiltonianOp op(psi.grid, params);
    return op.apply(psi);
}

ComplexField gpe_residual(const ComplexField& psi, Complex mu, const SystemParams& params) {
    ComplexField r = apply_hamiltonian(psi, params);
    for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= mu * psi.values[i];
    return r;
}

double gpe_residual_norm(const ComplexField& psi, Complex mu, const SystemParams& params) {
    return norm(gpe_residual(psi, mu, params));
}

Observables compute_observables(const ComplexField& psi, const SystemParams& params) {
    psi.require_conforming("observables");
    const double nrm = norm(psi);
    if (std::abs(nrm - 1.0) > 1e-6)
        throw NormalizationError("observables: field norm " + std::to_string(nrm) + " is not 1");

    Observables obs;
    const Grid& g = psi.grid;
    const auto grad = gradient(psi);
    ScalarField integrand(g);
    const ScalarField trap = potential_real(g, params);
    const double quartic = 4.0 * kPi * params.interaction;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        double gsq = 0.0;
        for (const auto& component : grad) gsq += std::norm(component.values[i]);
        const double rho = std::norm(psi.values[i]);
        integrand.values[i] = gsq + trap.values[i] * rho + quartic * rho * rho;
    }
    obs.e_mf = integrate(integrand);
    obs.lz = inner(psi, angular_momentum_z(psi)).real();
    obs.e_mf_rot = obs.e_mf - params.rotation * obs.lz;
    obs.mu_estimate = inner(psi, apply_hamiltonian(psi, params));

    // Half-space norms along the gain/loss axis; a node exactly on the
    // nodal plane contributes half to each side.
    const int a = axis_index(params.gain_loss_axis);
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    double lower = 0.0, upper = 0.0;
    for (int k = 0; k < nz; ++k) {
        const double wk = g.axis_weights(2)[k];
        for (int j = 0; j < ny; ++j) {
            const double wjk = wk * g.axis_weights(1)[j];
            for (int i = 0; i < nx; ++i, ++idx) {
                const double w = wjk * g.axis_weights(0)[i];
                const double c = g.coord(a, a == 0 ? i : (a == 1 ? j : k));
                const double rho = w * std::norm(psi.values[idx]);
                if (c < 0.0)
                    lower += rho;
                else if (c > 0.0)
                    upper += rho;
                else {
                    lower += 0.5 * rho;
                    upper += 0.5 * rho;
                }
            }
        }
    }
    obs.n_lower = lower;
    obs.n_upper = upper;
    return obs;
}

std::vector<ScalarField> current_density(const ComplexField& psi) {
    psi.require_conforming("current_density");
    const auto grad = gradient(psi);
    std::vector<ScalarField> j;
    j.reserve(grad.size());
    for (const auto& component : grad) {
        ScalarField c(psi.grid);
        for (std::size_t i = 0; i < psi.values.size(); ++i)
            c.values[i] = 2.0 * std::imag(std::conj(psi.values[i]) * component.values[i]);
        j.push_back(std::move(c));
    }
    return j;
}

ScalarField continuity_residual(const ComplexField& psi, Complex mu, const SystemParams& params) {
    const ComplexField r = gpe_residual(psi, mu, params);
    ScalarField out(psi.grid);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        out.values[i] = -2.0 * std::imag(std::conj(psi.values[i]) * r.values[i]);
    return out;
}

double pt_symmetry_error(const ComplexField& psi, Axis axis) {
    const ComplexField reflected = reflect(psi, axis);
    double err = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        err = std::max(err, std::abs(std::abs(psi.values[i]) - std::abs(reflected.values[i])));
    return err;
}

double pt_symmetry_error(const ComplexField& psi, const SystemParams& params) {
    if (params.dimension == 2 || params.gain_loss_axis != Axis::Z)
        return pt_symmetry_error(psi, params.gain_loss_axis);
    const ComplexField rz = reflect(psi, Axis::Z);
    const ComplexField rzy = reflect(rz, Axis::Y);
    const ComplexField rzx = reflect(rz, Axis::X);
    double ey = 0.0, ex = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        const double a = std::abs(psi.values[i]);
        ey = std::max(ey, std::abs(a - std::abs(rzy.values[i])));
        ex = std::max(ex, std::abs(a - std::abs(rzx.values[i])));
    }
    return std::min(ex, ey);
}

namespace {

// Plane-integrated j_axis on one slice, with the axis derivative taken
// one-sided (3rd order) toward `dir` so the stencil never crosses the
// gain/loss interface.
double plane_flux_one_sided(const ComplexField& psi, int axis, int slice, int dir) {
    const Grid& g = psi.grid;
    const double inv = static_cast<double>(dir) / g.spacing(axis);
    const std::ptrdiff_t stride = static_cast<std::ptrdiff_t>(g.stride(axis)) * dir;
    double sum = 0.0;

    const int axis_u = axis == 0 ? 1 : 0;
    const int axis_v = g.dimension() == 3 ? (axis == 2 ? 1 : 2) : -1;
    const int nu = g.points(axis_u);
    const int nv = axis_v >= 0 ? g.points(axis_v) : 1;
    for (int v = 0; v < nv; ++v) {
        const double wv = axis_v >= 0 ? g.axis_weights(axis_v)[v] : 1.0;
        for (int u = 0; u < nu; ++u) {
            int ijk[3] = {0, 0, 0};
            ijk[axis] = slice;
            ijk[axis_u] = u;
            if (axis_v >= 0) ijk[axis_v] = v;
            const std::size_t base = g.index3(ijk[0], ijk[1], ijk[2]);
            const Complex* f = psi.values.data() + base;
            const Complex d = inv * (-11.0 / 6.0 * f[0] + 3.0 * f[stride] - 1.5 * f[2 * stride] +
                                     (1.0 / 3.0) * f[3 * stride]);
            sum += wv * g.axis_weights(axis_u)[u] * 2.0 * std::imag(std::conj(f[0]) * d);
        }
    }
    return sum;
}

double quadratic_at_zero(double a, double fa, double b, double fb, double c, double fc) {
    return fa * b * c / ((a - b) * (a - c)) + fb * a * c / ((b - a) * (b - c)) +
           fc * a * b / ((c - a) * (c - b));
}

} // namespace

double midplane_current_flux(const ComplexField& psi, Axis axis) {
    psi.require_conforming("midplane_current_flux");
    const Grid& g = psi.grid;
    const int a = axis_index(axis);
    if (a >= g.dimension()) throw InvalidFieldError("midplane_current_flux: axis outside grid");
    const int n = g.points(a);
    if (n < 8) throw InvalidFieldError("midplane_current_flux: too few points along the axis");

    // First slice strictly above the nodal plane.
    int k_up = 0;
    while (k_up < n && g.coord(a, k_up) <= 0.0) ++k_up;

    if (k_up > 0 && g.coord(a, k_up - 1) == 0.0) {
        // A node sits on the interface: evaluate there from both sides.
        const double up = plane_flux_one_sided(psi, a, k_up - 1, +1);
        const double dn = plane_flux_one_sided(psi, a, k_up - 1, -1);
        return 0.5 * (up + dn);
    }
    const double up =
        quadratic_at_zero(g.coord(a, k_up), plane_flux_one_sided(psi, a, k_up, +1),
                          g.coord(a, k_up + 1), plane_flux_one_sided(psi, a, k_up + 1, +1),
                          g.coord(a, k_up + 2), plane_flux_one_sided(psi, a, k_up + 2, +1));
    const int k_dn = k_up - 1;
    const double dn =
        quadratic_at_zero(g.coord(a, k_dn), plane_flux_one_sided(psi, a, k_dn, -1),
                          g.coord(a, k_dn - 1), plane_flux_one_sided(psi, a, k_dn - 1, -1),
                          g.coord(a, k_dn - 2), plane_flux_one_sided(psi, a, k_dn - 2, -1));
    return 0.5 * (up + dn);
}

ComplexField imprint_vortices(const ComplexField& psi, const std::vector<VortexImprint>& imprints) {
    psi.require_conforming("imprint_vortices");
    const Grid& g = psi.grid;
    for (const auto& v : imprints) {
        if (std::abs(v.x) > g.half_extent(0) || std::abs(v.y) > g.half_extent(1))
            throw DomainError("imprint_vortices: position outside the box");
        if (v.charge == 0) throw DomainError("imprint_vortices: charge must be nonzero");
    }
    ComplexField out = psi;
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            const double y = g.coord(1, j);
            for (int i = 0; i < nx; ++i, ++idx) {
                const double x = g.coord(0, i);
                Complex factor(1.0, 0.0);
                for (const auto& v : imprints) {
                    const double s = v.charge > 0 ? 1.0 : -1.0;
                    const Complex core(x - v.x, s * (y - v.y));
                    for (int c = 0; c < std::abs(v.charge); ++c) factor *= core;
                }
                out.values[idx] *= factor;
            }
        }
    }
    normalize(out);
    return out;
}

} // namespace gpe
