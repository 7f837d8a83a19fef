#include "gpe/vortex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gpe/errors.hpp"

namespace gpe {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    while (a > std::numbers::pi) a -= kTwoPi;
    while (a <= -std::numbers::pi) a += kTwoPi;
    return a;
}

Complex bilinear(const Complex c00, const Complex c10, const Complex c01, const Complex c11,
                 double u, double v) {
    return (1 - u) * (1 - v) * c00 + u * (1 - v) * c10 + (1 - u) * v * c01 + u * v * c11;
}

// Newton refinement of the joint zero of Re and Im inside one plaquette.
// Returns cell coordinates in [0,1]^2 (falls back to the center when the
// bilinear system is degenerate).
void refine_zero(const Complex c00, const Complex c10, const Complex c01, const Complex c11,
                 int steps, double& u, double& v) {
    u = 0.5;
    v = 0.5;
    for (int it = 0; it < steps; ++it) {
        const Complex f = bilinear(c00, c10, c01, c11, u, v);
        const Complex fu = (1 - v) * (c10 - c00) + v * (c11 - c01);
        const Complex fv = (1 - u) * (c01 - c00) + u * (c11 - c10);
        const double det = fu.real() * fv.imag() - fu.imag() * fv.real();
        if (std::abs(det) < 1e-300) break;
        const double du = (f.real() * fv.imag() - f.imag() * fv.real()) / det;
        const double dv = (fu.real() * f.imag() - fu.imag() * f.real()) / det;
        u -= du;
        v -= dv;
        u = std::clamp(u, 0.0, 1.0);
        v = std::clamp(v, 0.0, 1.0);
        if (std::abs(du) + std::abs(dv) < 1e-14) break;
    }
}

} // namespace

std::vector<VortexPoint> detect_vortices_2d(const ComplexField& slice,
                                            const VortexDetectOptions& options) {
    slice.require_conforming("detect_vortices_2d");
    const Grid& g = slice.grid;
    if (g.dimension() != 2) throw InvalidFieldError("detect_vortices_2d: expects a 2D field");
    const int nx = g.points(0), ny = g.points(1);
    const auto& v = slice.values;

    double peak = 0.0;
    for (const Complex& z : v) peak = std::max(peak, std::norm(z));
    if (peak <= 0.0) return {};
    const double floor_density = options.noise_floor * peak;

    // Largest node radius still inside the bulk (density above the floor).
    double bulk_radius = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            if (std::norm(v[g.index2(i, j)]) >= floor_density)
                bulk_radius = std::max(bulk_radius, std::hypot(g.coord(0, i), g.coord(1, j)));

    std::vector<VortexPoint> found;
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const Complex c00 = v[g.index2(i, j)];
            const Complex c10 = v[g.index2(i + 1, j)];
            const Complex c01 = v[g.index2(i, j + 1)];
            const Complex c11 = v[g.index2(i + 1, j + 1)];
            const double a00 = std::arg(c00), a10 = std::arg(c10);
            const double a11 = std::arg(c11), a01 = std::arg(c01);
            const double winding = wrap_angle(a10 - a00) + wrap_angle(a11 - a10) +
                                   wrap_angle(a01 - a11) + wrap_angle(a00 - a01);
            const int q = static_cast<int>(std::lround(winding / kTwoPi));
            if (q == 0) continue;

            double u = 0.5, w = 0.5;
            refine_zero(c00, c10, c01, c11, options.newton_refine_steps, u, w);
            VortexPoint p;
            p.x = g.coord(0, i) + u * g.spacing(0);
            p.y = g.coord(1, j) + w * g.spacing(1);
            p.charge = q;

            const double corner_peak = std::max({std::norm(c00), std::norm(c10), std::norm(c01), std::norm(c11)});
            const bool low_density = corner_peak < floor_density;
            if (low_density && std::hypot(p.x, p.y) > bulk_radius) continue;
            found.push_back(p);
        }
    }
    return found;
}

int phase_winding_circle(const ComplexField& slice, double radius, int samples) {
    slice.require_conforming("phase_winding_circle");
    const Grid& g = slice.grid;
    if (g.dimension() != 2) throw InvalidFieldError("phase_winding_circle: expects a 2D field");
    if (radius >= std::min(g.half_extent(0), g.half_extent(1)))
        throw DomainError("phase_winding_circle: radius outside the box");
    auto value_at = [&](double x, double y) {
        const int i = std::clamp(static_cast<int>(std::floor((x + g.half_extent(0)) / g.spacing(0))), 0,
                                 g.points(0) - 2);
        const int j = std::clamp(static_cast<int>(std::floor((y + g.half_extent(1)) / g.spacing(1))), 0,
                                 g.points(1) - 2);
        const double u = (x - g.coord(0, i)) / g.spacing(0);
        const double v = (y - g.coord(1, j)) / g.spacing(1);
        return bilinear(slice.values[g.index2(i, j)], slice.values[g.index2(i + 1, j)],
                        slice.values[g.index2(i, j + 1)], slice.values[g.index2(i + 1, j + 1)], u, v);
    };
    double total = 0.0;
    double prev = std::arg(value_at(radius, 0.0));
    for (int s = 1; s <= samples; ++s) {
        const double t = kTwoPi * s / samples;
        const double a = std::arg(value_at(radius * std::cos(t), radius * std::sin(t)));
        total += wrap_angle(a - prev);
        prev = a;
    }
    return static_cast<int>(std::lround(total / kTwoPi));
}

namespace {

struct ActiveLine {
    VortexLine line;
    bool matched = false;
};

void finish_line(VortexLine& line, const VortexTraceOptions& options, double transverse_spacing) {
    // Unwrap phi along z.
    for (std::size_t s = 1; s < line.samples.size(); ++s) {
        double& phi = line.samples[s].phi;
        const double prev = line.samples[s - 1].phi;
        phi += kTwoPi * std::round((prev - phi) / kTwoPi);
    }
    // Net charge by majority (links require equal sign, so this is the
    // common value).
    const double zmin = line.samples.front().z;
    const double zmax = line.samples.back().z;
    line.spans_midplane = zmin <= 0.0 && zmax >= 0.0;

    // Transverse radius at the midplane (nearest-pair interpolation).
    if (line.spans_midplane) {
        double r0 = line.samples.front().r;
        for (std::size_t s = 1; s < line.samples.size(); ++s) {
            const auto& a = line.samples[s - 1];
            const auto& b = line.samples[s];
            if (a.z <= 0.0 && b.z >= 0.0) {
                const double t = b.z > a.z ? (0.0 - a.z) / (b.z - a.z) : 0.0;
                r0 = a.r + t * (b.r - a.r);
                break;
            }
        }
        line.r_mid = r0;
    } else {
        line.r_mid = line.samples[line.samples.size() / 2].r;
    }
    line.central = line.spans_midplane && line.r_mid < options.central_radius_spacings * transverse_spacing;

    if (line.central) {
        line.screwing_strength = 0.0;
        line.odd_fraction = 0.0;
    } else {
        line.screwing_strength = screwing_strength(line, options.fit_halfwidth);
        // Antisymmetry of phi(z): fraction of the variance in the odd part,
        // over sample pairs (z, -z) inside the fit window.
        double odd2 = 0.0, even2 = 0.0;
        double mean = 0.0;
        int count = 0;
        for (const auto& s : line.samples)
            if (std::abs(s.z) <= options.fit_halfwidth) {
                mean += s.phi;
                ++count;
            }
        if (count > 0) mean /= count;
        for (const auto& sa : line.samples) {
            if (sa.z <= 0.0 || sa.z > options.fit_halfwidth) continue;
            for (const auto& sb : line.samples) {
                if (std::abs(sb.z + sa.z) < 1e-9) {
                    const double odd = 0.5 * (sa.phi - sb.phi);
                    const double even = 0.5 * (sa.phi + sb.phi) - mean;
                    odd2 += odd * odd;
                    even2 += even * even;
                }
            }
        }
        line.odd_fraction = (odd2 + even2) > 1e-24 ? std::sqrt(odd2 / (odd2 + even2)) : 1.0;
    }
}

} // namespace

double screwing_strength(const VortexLine& line, double fit_halfwidth) {
    if (line.central) throw DomainError("screwing_strength: angle undefined on a central line");
    std::vector<const VortexLineSample*> window;
    for (const auto& s : line.samples)
        if (std::abs(s.z) <= fit_halfwidth) window.push_back(&s);
    if (window.size() < 5) {
        // Short lines (vortices entering from the border) are fit around
        // their own z midpoint instead.
        window.clear();
        const double zc = 0.5 * (line.samples.front().z + line.samples.back().z);
        for (const auto& s : line.samples)
            if (std::abs(s.z - zc) <= fit_halfwidth) window.push_back(&s);
        if (window.size() < 2) return 0.0;
    }
    double sz = 0.0, sp = 0.0, szz = 0.0, szp = 0.0;
    const double n = static_cast<double>(window.size());
    for (const auto* s : window) {
        sz += s->z;
        sp += s->phi;
        szz += s->z * s->z;
        szp += s->z * s->phi;
    }
    const double denom = n * szz - sz * sz;
    if (std::abs(denom) < 1e-30) return 0.0;
    return (n * szp - sz * sp) / denom;
}

std::vector<VortexLine> trace_vortex_lines(const ComplexField& psi3d, const VortexTraceOptions& options) {
    psi3d.require_conforming("trace_vortex_lines");
    const Grid& g = psi3d.grid;
    if (g.dimension() != 3) throw InvalidFieldError("trace_vortex_lines: expects a 3D field");
    const int nx = g.points(0), ny = g.points(1), nz = g.points(2);
    const std::size_t plane = static_cast<std::size_t>(nx) * ny;

    GridSpec ss;
    ss.dimension = 2;
    ss.points = {nx, ny, 1};
    ss.half_extent = {g.half_extent(0), g.half_extent(1), 0.0};
    const Grid slice_grid(ss);

    double global_peak = 0.0;
    for (const Complex& z : psi3d.values) global_peak = std::max(global_peak, std::norm(z));
    const double slice_cutoff = options.slice_peak_cutoff * global_peak;
    const double transverse_spacing = std::max(g.spacing(0), g.spacing(1));
    const double max_jump = options.max_jump_spacings * transverse_spacing;

    VortexDetectOptions detect = options.detect;
    detect.noise_floor = options.bulk_density_cutoff;

    std::vector<ActiveLine> active;
    std::vector<VortexLine> finished;

    auto retire = [&](ActiveLine& al) { finished.push_back(std::move(al.line)); };

    for (int k = 0; k < nz; ++k) {
        ComplexField slice(slice_grid);
        std::copy_n(psi3d.values.begin() + static_cast<std::ptrdiff_t>(plane) * k, plane,
                    slice.values.begin());
        double peak = 0.0;
        for (const Complex& z : slice.values) peak = std::max(peak, std::norm(z));
        if (peak < slice_cutoff) {
            for (auto& al : active) retire(al);
            active.clear();
            continue;
        }
        std::vector<VortexPoint> points = detect_vortices_2d(slice, detect);
        const double z = g.coord(2, k);
        for (auto& p : points) p.z = z;

        // Greedy nearest-neighbor linking, equal charge required.
        struct Pair {
            double dist;
            std::size_t line, point;
        };
        std::vector<Pair> pairs;
        for (std::size_t li = 0; li < active.size(); ++li) {
            const auto& last = active[li].line.samples.back();
            for (std::size_t pi = 0; pi < points.size(); ++pi) {
                if (points[pi].charge != active[li].line.charge) continue;
                const double d = std::hypot(points[pi].x - last.x, points[pi].y - last.y);
                if (d <= max_jump) pairs.push_back({d, li, pi});
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            if (a.line != b.line) return a.line < b.line;
            return a.point < b.point;
        });
        std::vector<bool> point_used(points.size(), false);
        for (auto& al : active) al.matched = false;
        for (std::size_t n = 0; n < pairs.size(); ++n) {
            const auto& pr = pairs[n];
            if (active[pr.line].matched || point_used[pr.point]) continue;
            // A competing candidate at nearly the same distance marks the
            // link ambiguous (the shorter jump wins deterministically).
            for (std::size_t m = n + 1; m < pairs.size(); ++m) {
                if ((pairs[m].line == pr.line || pairs[m].point == pr.point) &&
                    !active[pairs[m].line].matched && !point_used[pairs[m].point] &&
                    pairs[m].dist - pr.dist < 0.25 * transverse_spacing) {
                    active[pr.line].line.ambiguous_link = true;
                    break;
                }
            }
            const VortexPoint& p = points[pr.point];
            active[pr.line].line.samples.push_back(
                {p.z, p.x, p.y, std::hypot(p.x, p.y), std::atan2(p.y, p.x)});
            active[pr.line].matched = true;
            point_used[pr.point] = true;
        }
        // Unmatched lines end; unmatched points start new lines.
        std::vector<ActiveLine> still;
        for (auto& al : active) {
            if (al.matched)
                still.push_back(std::move(al));
            else
                retire(al);
        }
        active = std::move(still);
        for (std::size_t pi = 0; pi < points.size(); ++pi) {
            if (point_used[pi]) continue;
            const VortexPoint& p = points[pi];
            ActiveLine al;
            al.line.charge = p.charge;
            al.line.samples.push_back({p.z, p.x, p.y, std::hypot(p.x, p.y), std::atan2(p.y, p.x)});
            active.push_back(std::move(al));
        }
    }
    for (auto& al : active) retire(al);

    std::sort(finished.begin(), finished.end(), [](const VortexLine& a, const VortexLine& b) {
        if (a.samples.front().z != b.samples.front().z) return a.samples.front().z < b.samples.front().z;
        if (a.samples.front().x != b.samples.front().x) return a.samples.front().x < b.samples.front().x;
        return a.samples.front().y < b.samples.front().y;
    });
    int id = 0;
    for (auto& line : finished) {
        line.id = id++;
        finish_line(line, options, transverse_spacing);
    }
    return finished;
}

} // namespace gpe
