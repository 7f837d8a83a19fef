#ifndef GPE_BDG_HPP
#define GPE_BDG_HPP

#include <utility>
#include <vector>

#include "gpe/stationary.hpp"

namespace gpe {

enum class BdgMode { DenseCoarse, IterativeExtremal };

struct BdgConfig {
    // Dense-coarse resolution (points per axis on the reduced grid).
    int dense_points_2d = 40;
    int dense_points_3d = 12;
    // A state is dynamically stable when the largest growth rate (Im omega
    // after the zero mode is discarded) stays below the threshold.
    double stability_threshold = 1e-6;
    double iterative_stability_threshold = 1e-5;
    // Modes with |omega| below this radius are the phase/norm pair and are
    // discarded by the classifier.
    double zero_mode_radius = 1e-3;
    // Shift-invert scan of the low-frequency window (iterative mode).
    double scan_max_frequency = 3.0;
    double scan_step = 0.75;
    double scan_height = 0.05;
    int arnoldi_dimension = 24;
    double inner_tolerance = 1e-6;
    int inner_max_iterations = 800;
    double ritz_residual_tolerance = 1e-5;
};

struct BdgSpectrum {
    std::vector<Complex> eigenvalues; // sorted by descending Im, then Re
    double max_growth_rate = 0.0;
    bool stable = false;
    GridSpec resolution;
    bool warning = false;             // partial spectrum / unconverged solves
};

/// Action of the linearization block operator on a perturbation pair:
/// row u: (-Lap + V - iW - mu + 16 pi Na |psi0|^2 - Omega Lz) u + 8 pi Na psi0^2 v
/// row v: -(-Lap + V + iW - mu* + 16 pi Na |psi0|^2 + Omega Lz) v - 8 pi Na psi0*^2 u
/// so that eigenpairs satisfy apply(u, v) = omega (u, v).
std::pair<ComplexField, ComplexField> bdg_apply(const ComplexField& u, const ComplexField& v,
                                                const StationaryState& state);

/// Dense-coarse: full spectrum of the block operator with the state
/// resampled to a reduced grid (mu kept from the fine solve).
/// Iterative-extremal: shift-invert Arnoldi on the state's own grid,
/// scanning the low-frequency window for the modes of largest growth.
BdgSpectrum bdg_spectrum(const StationaryState& state, BdgMode mode, const BdgConfig& config = {});

} // namespace gpe

#endif
