#ifndef GPE_VORTEX_HPP
#define GPE_VORTEX_HPP

#include <vector>

#include "gpe/grid.hpp"

namespace gpe {

/// A detected phase singularity in a plane.
struct VortexPoint {
    double x = 0.0;
    double y = 0.0;
    int charge = 0;  // plaquette winding / 2 pi
    double z = 0.0;  // slice coordinate (3D tracing only)
};

struct VortexLineSample {
    double z = 0.0;
    double x = 0.0;
    double y = 0.0;
    double r = 0.0;
    double phi = 0.0; // unwrapped along z
};

/// A z-parametrized vortex core path with screwing diagnostics.
struct VortexLine {
    int id = 0;
    std::vector<VortexLineSample> samples; // z strictly increasing
    int charge = 0;
    bool central = false;           // r at the midplane below the core threshold
    bool spans_midplane = false;    // line crosses z = 0
    bool ambiguous_link = false;    // a linking tie was broken by distance
    double r_mid = 0.0;             // transverse radius interpolated at z = 0
    double screwing_strength = 0.0; // d phi / dz at z = 0 (0 for central lines)
    double odd_fraction = 0.0;      // antisymmetry measure of phi(z) in the fit window
};

struct VortexDetectOptions {
    double noise_floor = 0.01;        // fraction of the slice peak density
    int newton_refine_steps = 24;
};

struct VortexTraceOptions {
    double slice_peak_cutoff = 0.05;  // slices join if peak >= cutoff * global peak
    double bulk_density_cutoff = 0.01;
    double max_jump_spacings = 3.0;   // linking threshold, in transverse grid spacings
    double central_radius_spacings = 2.0;
    double fit_halfwidth = 1.0;       // |z| window of the screwing fit
    VortexDetectOptions detect;
};

/// Plaquette phase-winding detection with bilinear sub-grid refinement.
/// Detections in regions below the noise floor are kept only inside the
/// bulk radius (the largest node radius whose density still exceeds the
/// floor).
std::vector<VortexPoint> detect_vortices_2d(const ComplexField& slice,
                                            const VortexDetectOptions& options = {});

/// Per-slice detection plus nearest-neighbor linking across slices;
/// cylindrical parametrization about the rotation axis with unwrapped phi.
std::vector<VortexLine> trace_vortex_lines(const ComplexField& psi3d,
                                           const VortexTraceOptions& options = {});

/// Least-squares slope of phi(z) over |z| <= fit_halfwidth. Throws
/// DomainError for central lines (the angle is undefined at r = 0).
double screwing_strength(const VortexLine& line, double fit_halfwidth);

/// Total phase winding (in units of 2 pi) along a circle of the given
/// radius, evaluated with bilinear interpolation.
int phase_winding_circle(const ComplexField& slice, double radius, int samples = 256);

} // namespace gpe

#endif
