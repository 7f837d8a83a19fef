#ifndef GPE_STATIONARY_HPP
#define GPE_STATIONARY_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "gpe/model.hpp"

namespace gpe {

struct SolverConfig {
    double residual_tolerance = 1e-9;
    int max_newton_iterations = 50;
    double krylov_tolerance = 1e-3;     // relative forcing for the inner solves
    double itp_time_step = 1e-3;
    double itp_residual_target = 1e-6;
    double continuation_step = 0.01;
    double min_continuation_step = 1e-4;
    double omega_continuation_step = 0.005;
    long max_itp_iterations = 400000;
    int max_krylov_iterations = 500;
    int krylov_restart = 0;             // 0: choose from problem size
    bool verbose = false;

    void validate() const;
};

/// A converged stationary state (unit-norm psi, chemical potential mu)
/// with its convergence and symmetry diagnostics.
struct StationaryState {
    ComplexField psi;
    Complex mu{0.0, 0.0};
    SystemParams params;
    double residual_norm = 0.0;
    double pt_symmetry_error = 0.0;
    Observables observables;
    bool pt_unbroken = false;
};

struct NewtonIterationRecord {
    int iteration = 0;
    double residual = 0.0;
    int krylov_iterations = 0;
    double step_scale = 1.0;
};

struct NewtonReport {
    bool converged = false;
    std::vector<NewtonIterationRecord> history;
};

/// Gradient-flow ground state at gamma = 0 (explicit Euler steps with
/// renormalization). Throws UnsupportedRegimeError for gamma != 0 and
/// NonConvergenceError (with the last residual) at the iteration cap.
StationaryState ground_state_itp(const ComplexField& initial, const SystemParams& params,
                                 const SolverConfig& config);

/// Matrix-free Newton-Krylov on H psi = mu psi augmented with the unit-norm
/// constraint and a phase constraint against the initial guess. Unknowns
/// are Re/Im psi and Re/Im mu. Throws NonConvergenceError on failure; an
/// optional report receives the iteration history either way.
StationaryState newton_solve(const ComplexField& initial, Complex mu0, const SystemParams& params,
                             const SolverConfig& config, NewtonReport* report = nullptr);

enum class BranchTermination { ReachedTarget, TangentBifurcationBracket, SolverFailure };

struct BranchStep {
    double parameter = 0.0;
    Complex mu{0.0, 0.0};
    double residual = 0.0;
    int newton_iterations = 0;
    int krylov_iterations = 0;
};

struct Branch {
    std::vector<StationaryState> states; // parameter strictly monotone along the list
    std::vector<BranchStep> log;
    BranchTermination termination = BranchTermination::ReachedTarget;
    double bracket_last_good = 0.0;      // set for TangentBifurcationBracket
    double bracket_first_failed = 0.0;
    std::string failure_message;

    const StationaryState& back() const { return states.back(); }
};

/// Predictor-corrector continuation in the gain/loss strength. Steps by
/// config.continuation_step, halves the step on Newton failure, and
/// terminates either at gamma_target or with a fold bracket of width
/// <= config.min_continuation_step.
Branch continue_in_gamma(const StationaryState& seed, double gamma_target, const SolverConfig& config);

/// Same machinery along the rotation frequency (gamma held fixed).
Branch continue_in_omega(const StationaryState& seed, double omega_target, const SolverConfig& config);

struct CensusEntry {
    StationaryState state;
    int vortex_count = 0;
    std::string seed_name;               // imprint-library entry it converged from
};

struct CensusResult {
    double omega = 0.0;
    std::vector<CensusEntry> states;     // distinct states, ascending E_MF_rot
    std::vector<std::string> failures;   // non-converged starts, reported and skipped
};

/// Relaxes every member of the vortex-imprint library at each rotation
/// frequency (gamma = 0), polishes with Newton, and deduplicates converged
/// states by density distance under the axis-preserving symmetry group.
std::vector<CensusResult> census_2d(const SystemParams& params, const Grid& grid,
                                    const std::vector<double>& omegas, const SolverConfig& config);

/// The imprint library used by census_2d: named vortex patterns covering
/// 0 to 4 vortices in both gain-axis-symmetric orientations per count.
std::vector<std::pair<std::string, std::vector<VortexImprint>>> census_imprint_library(double radius = 1.5);

/// Gaussian ground-state profile of the linear trap, normalized.
ComplexField gaussian_seed(const Grid& grid);

} // namespace gpe

#endif
