#include "gpe/ops.hpp"

#include <cmath>
#include <cstddef>

namespace gpe {

namespace {

// Adds scale * sum_t c[t] f(node + t*stride_axis) to out, reading zero
// outside the box. Inner loop runs over the contiguous sub-stride.
void add_axis_stencil(const Grid& g, int axis, const Complex* f, Complex* out,
                      const double c[5], double scale) {
    const int n = g.points(axis);
    const std::size_t stride = g.stride(axis);
    const std::size_t nblocks = g.node_count() / (stride * static_cast<std::size_t>(n));
    for (std::size_t hi = 0; hi < nblocks; ++hi) {
        const std::size_t base_h = hi * stride * static_cast<std::size_t>(n);
        for (int pos = 0; pos < n; ++pos) {
            const std::size_t row = base_h + static_cast<std::size_t>(pos) * stride;
            const int tmin = pos >= 2 ? -2 : -pos;
            const int tmax = pos <= n - 3 ? 2 : n - 1 - pos;
            for (int t = tmin; t <= tmax; ++t) {
                const double w = scale * c[t + 2];
                if (w == 0.0) continue;
                const Complex* src = f + static_cast<std::ptrdiff_t>(row) + t * static_cast<std::ptrdiff_t>(stride);
                Complex* dst = out + row;
                for (std::size_t lo = 0; lo < stride; ++lo) dst[lo] += w * src[lo];
            }
        }
    }
}

// First derivative along one axis: 4th-order central in the interior,
// 2nd-order central one node from the edge, one-sided at the edge.
void axis_derivative_one_sided(const Grid& g, int axis, const Complex* f, Complex* out) {
    const int n = g.points(axis);
    const std::size_t stride = g.stride(axis);
    const double invh = 1.0 / g.spacing(axis);
    const std::size_t nblocks = g.node_count() / (stride * static_cast<std::size_t>(n));
    for (std::size_t hi = 0; hi < nblocks; ++hi) {
        const std::size_t base_h = hi * stride * static_cast<std::size_t>(n);
        for (int pos = 0; pos < n; ++pos) {
            const std::size_t row = base_h + static_cast<std::size_t>(pos) * stride;
            const auto at = [&](int p) { return f + base_h + static_cast<std::size_t>(p) * stride; };
            Complex* dst = out + row;
            if (pos >= 2 && pos <= n - 3) {
                const Complex* m2 = at(pos - 2);
                const Complex* m1 = at(pos - 1);
                const Complex* p1 = at(pos + 1);
                const Complex* p2 = at(pos + 2);
                const double c1 = invh * (2.0 / 3.0), c2 = invh * (1.0 / 12.0);
                for (std::size_t lo = 0; lo < stride; ++lo)
                    dst[lo] = c1 * (p1[lo] - m1[lo]) - c2 * (p2[lo] - m2[lo]);
            } else if (pos == 0) {
                const Complex* f0 = at(0);
                const Complex* f1 = at(1);
                const Complex* f2 = at(2);
                for (std::size_t lo = 0; lo < stride; ++lo)
                    dst[lo] = (0.5 * invh) * (-3.0 * f0[lo] + 4.0 * f1[lo] - f2[lo]);
            } else if (pos == n - 1) {
                const Complex* f0 = at(n - 1);
                const Complex* f1 = at(n - 2);
                const Complex* f2 = at(n - 3);
                for (std::size_t lo = 0; lo < stride; ++lo)
                    dst[lo] = (0.5 * invh) * (3.0 * f0[lo] - 4.0 * f1[lo] + f2[lo]);
            } else { // pos == 1 or pos == n-2
                const Complex* m1 = at(pos - 1);
                const Complex* p1 = at(pos + 1);
                for (std::size_t lo = 0; lo < stride; ++lo)
                    dst[lo] = (0.5 * invh) * (p1[lo] - m1[lo]);
            }
        }
    }
}

} // namespace

ComplexField laplacian(const ComplexField& f) {
    f.require_conforming("laplacian");
    ComplexField out(f.grid);
    for (int a = 0; a < f.grid.dimension(); ++a) {
        const double invh2 = 1.0 / (f.grid.spacing(a) * f.grid.spacing(a));
        add_axis_stencil(f.grid, a, f.values.data(), out.values.data(), stencil::d2, invh2);
    }
    return out;
}

std::vector<ComplexField> gradient(const ComplexField& f) {
    f.require_conforming("gradient");
    std::vector<ComplexField> out;
    out.reserve(f.grid.dimension());
    for (int a = 0; a < f.grid.dimension(); ++a) {
        ComplexField d(f.grid);
        axis_derivative_one_sided(f.grid, a, f.values.data(), d.values.data());
        out.push_back(std::move(d));
    }
    return out;
}

ComplexField angular_momentum_z(const ComplexField& f) {
    f.require_conforming("angular_momentum_z");
    const Grid& g = f.grid;
    ComplexField dx(g), dy(g);
    add_axis_stencil(g, 0, f.values.data(), dx.values.data(), stencil::d1, 1.0 / g.spacing(0));
    add_axis_stencil(g, 1, f.values.data(), dy.values.data(), stencil::d1, 1.0 / g.spacing(1));
    ComplexField out(g);
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            const double y = g.coord(1, j);
            for (int i = 0; i < nx; ++i, ++idx) {
                const double x = g.coord(0, i);
                const Complex v = x * dy.values[idx] - y * dx.values[idx];
                out.values[idx] = Complex(v.imag(), -v.real()); // multiply by -i
            }
        }
    }
    return out;
}

double integrate(const ScalarField& f) {
    if (f.values.size() != f.grid.node_count())
        throw InvalidFieldError("integrate: field does not conform to its grid");
    const Grid& g = f.grid;
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    double sum = 0.0;
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double wk = g.axis_weights(2)[k];
        for (int j = 0; j < ny; ++j) {
            const double wjk = wk * g.axis_weights(1)[j];
            const auto& wxs = g.axis_weights(0);
            for (int i = 0; i < nx; ++i, ++idx) sum += wjk * wxs[i] * f.values[idx];
        }
    }
    return sum;
}

Complex integrate_complex(const ComplexField& f) {
    f.require_conforming("integrate");
    const Grid& g = f.grid;
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    Complex sum(0.0, 0.0);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double wk = g.axis_weights(2)[k];
        for (int j = 0; j < ny; ++j) {
            const double wjk = wk * g.axis_weights(1)[j];
            const auto& wxs = g.axis_weights(0);
            for (int i = 0; i < nx; ++i, ++idx) sum += (wjk * wxs[i]) * f.values[idx];
        }
    }
    return sum;
}

Complex inner(const ComplexField& f, const ComplexField& g) {
    f.require_conforming("inner");
    g.require_conforming("inner");
    if (!f.grid.compatible(g.grid)) throw InvalidFieldError("inner: incompatible grids");
    const Grid& gr = f.grid;
    const int nx = gr.points(0), ny = gr.points(1), nz = gr.points(2);
    Complex sum(0.0, 0.0);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        const double wk = gr.axis_weights(2)[k];
        for (int j = 0; j < ny; ++j) {
            const double wjk = wk * gr.axis_weights(1)[j];
            const auto& wxs = gr.axis_weights(0);
            for (int i = 0; i < nx; ++i, ++idx)
                sum += (wjk * wxs[i]) * (std::conj(f.values[idx]) * g.values[idx]);
        }
    }
    return sum;
}

double norm(const ComplexField& f) { return std::sqrt(std::abs(inner(f, f).real())); }

double norm(const ScalarField& f) {
    ScalarField sq(f.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) sq.values[i] = f.values[i] * f.values[i];
    return std::sqrt(integrate(sq));
}

void normalize(ComplexField& f) {
    const double n = norm(f);
    if (!(n > 0.0) || !std::isfinite(n)) throw NormalizationError("normalize: zero or non-finite norm");
    const double s = 1.0 / n;
    for (Complex& z : f.values) z *= s;
}

ScalarField density(const ComplexField& f) {
    f.require_conforming("density");
    ScalarField out(f.grid);
    for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = std::norm(f.values[i]);
    return out;
}

namespace {

// Cubic Lagrange weights on uniform nodes; base index chosen so the target
// lies between the two middle nodes where possible.
void lagrange4_axis(const Grid& src, int axis, double x, int& base, double w[4]) {
    const int n = src.points(axis);
    const double h = src.spacing(axis);
    const double L = src.half_extent(axis);
    int ib = static_cast<int>(std::floor((x + L) / h)) - 1;
    if (ib < 0) ib = 0;
    if (ib > n - 4) ib = n - 4;
    base = ib;
    const double s = (x - src.coord(axis, ib)) / h; // in units of h from the base node
    const double sm[4] = {0.0, 1.0, 2.0, 3.0};
    for (int m = 0; m < 4; ++m) {
        double p = 1.0;
        for (int l = 0; l < 4; ++l)
            if (l != m) p *= (s - sm[l]) / (sm[m] - sm[l]);
        w[m] = p;
    }
}

} // namespace

ComplexField resample(const ComplexField& f, const Grid& target) {
    f.require_conforming("resample");
    if (target.dimension() != f.grid.dimension())
        throw InvalidFieldError("resample: dimension mismatch");
    const Grid& src = f.grid;
    ComplexField out(target);
    const int dim = target.dimension();
    const int nx = target.points(0), ny = target.points(1), nz = target.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        int kb = 0;
        double wz[4] = {1.0, 0.0, 0.0, 0.0};
        if (dim == 3) lagrange4_axis(src, 2, target.coord(2, k), kb, wz);
        for (int j = 0; j < ny; ++j) {
            int jb = 0;
            double wy[4];
            lagrange4_axis(src, 1, target.coord(1, j), jb, wy);
            for (int i = 0; i < nx; ++i, ++idx) {
                int ib = 0;
                double wxv[4];
                lagrange4_axis(src, 0, target.coord(0, i), ib, wxv);
                Complex acc(0.0, 0.0);
                const int kmax = dim == 3 ? 4 : 1;
                for (int kk = 0; kk < kmax; ++kk) {
                    const double wk = wz[kk];
                    for (int jj = 0; jj < 4; ++jj) {
                        const double wkj = wk * wy[jj];
                        const std::size_t rowbase =
                            static_cast<std::size_t>(ib) +
                            static_cast<std::size_t>(src.points(0)) *
                                (static_cast<std::size_t>(jb + jj) +
                                 static_cast<std::size_t>(src.points(1)) * static_cast<std::size_t>(kb + kk));
                        const Complex* row = f.values.data() + rowbase;
                        acc += wkj * (wxv[0] * row[0] + wxv[1] * row[1] + wxv[2] * row[2] + wxv[3] * row[3]);
                    }
                }
                out.values[idx] = acc;
            }
        }
    }
    return out;
}

ComplexField reflect(const ComplexField& f, Axis axis) {
    f.require_conforming("reflect");
    const Grid& g = f.grid;
    const int a = axis_index(axis);
    if (a >= g.dimension()) throw InvalidFieldError("reflect: axis outside grid dimension");
    ComplexField out(g);
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    std::size_t idx = 0;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < ny; ++j) {
            for (int i = 0; i < nx; ++i, ++idx) {
                const int ri = a == 0 ? nx - 1 - i : i;
                const int rj = a == 1 ? ny - 1 - j : j;
                const int rk = a == 2 ? nz - 1 - k : k;
                out.values[idx] = f.values[g.index3(ri, rj, rk)];
            }
        }
    }
    return out;
}

} // namespace gpe
