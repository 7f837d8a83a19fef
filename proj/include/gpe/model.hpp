#ifndef GPE_MODEL_HPP
#define GPE_MODEL_HPP

#include <complex>
#include <vector>

#include "gpe/grid.hpp"
#include "gpe/ops.hpp"

namespace gpe {

/// Physical configuration of the mean-field system.
///
/// `interaction` is the dimensionless particle-number--scattering-length
/// product; the cubic term enters the stationarity operator with
/// coefficient 8*pi*interaction. `gain_loss` is the amplitude of the
/// antisymmetric imaginary step potential -i*gain_loss*sign(axis coord).
struct SystemParams {
    int dimension = 2;
    double interaction = 0.0;
    double rotation = 0.0;
    double gain_loss = 0.0;
    Axis gain_loss_axis = Axis::Y;

    static SystemParams make(int dimension, double interaction, double rotation, double gain_loss);
    void validate(const Grid& grid) const;
};

/// Chemical-potential check and energy bookkeeping of a state.
struct Observables {
    double e_mf = 0.0;       // ∫ |grad psi|^2 + V |psi|^2 + 4 pi Na |psi|^4
    double e_mf_rot = 0.0;   // e_mf - rotation * lz
    double lz = 0.0;         // <psi, Lz psi> (real part)
    Complex mu_estimate{0.0, 0.0};
    double n_lower = 0.0;    // ∫_{axis<0} |psi|^2
    double n_upper = 0.0;
};

/// Harmonic trap V(r) = (x^2 + y^2 [+ z^2]) / 4.
ScalarField potential_real(const Grid& grid, const SystemParams& params);

/// Coefficient W of the imaginary potential V_I = -i W, with
/// W = gain_loss * sign(coordinate along gain_loss_axis) and sign(0) = 0.
ScalarField potential_imag(const Grid& grid, const SystemParams& params);

/// Cached-arrays application of the stationarity operator
/// (-Lap + V - iW + 8 pi Na |psi|^2 - Omega Lz). Reuse one instance when
/// applying repeatedly on the same grid.
class HamiltonianOp {
  public:
    HamiltonianOp(const Grid& grid, const SystemParams& params);

    const Grid& grid() const { return grid_; }
    const SystemParams& params() const { return params_; }
    const std::vector<double>& trap() const { return trap_; }
    const std::vector<double>& gain_loss_coef() const { return gain_; }
    double nonlinear_coef() const { return nl_coef_; }

    void apply(const ComplexField& psi, ComplexField& out) const;
    ComplexField apply(const ComplexField& psi) const;

    /// out = (-Lap + D - Omega Lz) f for an arbitrary complex diagonal D.
    void apply_linear(const Complex* f, Complex* out, const Complex* diag) const;

  private:
    Grid grid_;
    SystemParams params_;
    std::vector<double> trap_;
    std::vector<double> gain_;
    double nl_coef_ = 0.0;
};

ComplexField apply_hamiltonian(const ComplexField& psi, const SystemParams& params);

/// H psi - mu psi; its weighted L2 norm is the stationarity diagnostic.
ComplexField gpe_residual(const ComplexField& psi, Complex mu, const SystemParams& params);
double gpe_residual_norm(const ComplexField& psi, Complex mu, const SystemParams& params);

/// Requires unit norm (throws NormalizationError otherwise).
Observables compute_observables(const ComplexField& psi, const SystemParams& params);

/// Particle current density j = 2 Im(psi* grad psi), laboratory frame at
/// t = 0 (one real component per axis).
std::vector<ScalarField> current_density(const ComplexField& psi);

/// Density balance of the stationarity equation: the continuum limit is
/// div(j_rot) + 2 W |psi|^2 + 2 Im(mu) |psi|^2 with the rotating-frame
/// current j_rot = j - Omega (z_hat x r) |psi|^2. Evaluated through the
/// discrete operator so that it vanishes exactly in the measure the solver
/// controls: R = -2 Im(conj(psi) (H psi - mu psi)).
ScalarField continuity_residual(const ComplexField& psi, Complex mu, const SystemParams& params);

/// max over nodes of | |psi(x)| - |psi(Px)| | where P reflects `axis`.
double pt_symmetry_error(const ComplexField& psi, Axis axis);

/// Density error under the antiunitary symmetry that actually protects
/// real eigenvalues. In 2D this is the plain gain-axis reflection. In 3D
/// with rotation the gain-axis reflection alone inverts the angular
/// momentum term, so it is composed with a reflection transverse to the
/// rotation plane (the smaller of the two admissible choices is
/// reported); screwed vortex states satisfy only the composed symmetry.
double pt_symmetry_error(const ComplexField& psi, const SystemParams& params);

/// Plane-integrated particle current through the nodal plane of the
/// gain/loss potential. The wave function has a curvature jump across the
/// interface, so the axis derivative is taken one-sided on each half-space
/// and the plane flux is extrapolated to coordinate zero from both sides.
double midplane_current_flux(const ComplexField& psi, Axis axis);

struct VortexImprint {
    double x = 0.0;
    double y = 0.0;
    int charge = 1;
};

/// Multiplies psi pointwise by prod_k ((x-x_k) + i s_k (y-y_k)) and
/// renormalizes; the phase then winds 2 pi s_k around each position.
/// Positions must lie inside the box.
ComplexField imprint_vortices(const ComplexField& psi, const std::vector<VortexImprint>& imprints);

} // namespace gpe

#endif
