#pragma once

// Geometric phase gate on a truncated oscillator (x) Dicke space:
//
//   H(t) = lambda_c (a^dagger e^{i delta' t} + a e^{-i delta' t}) Jz
//
// H never couples different M_J, so each M_J sector is an independently
// driven oscillator. After t = 2 pi k / delta' every sector returns to its
// initial motional state having picked up a phase proportional to M_J^2.

#include <complex>
#include <optional>
#include <vector>

#include "squeeze/dicke.hpp"
#include "squeeze/sweep.hpp"

namespace squeeze {

struct GateParams {
    double lambda_c = 0.05;  ///< g^2 eta / Delta, rad/s
    double delta_p = 1.0;    ///< gate detuning delta', rad/s
    int n_max = 15;          ///< highest Fock level kept
    int particle_count = 10;
    int loops = 5;
    double eta = 0.1;        ///< Lamb-Dicke parameter, informational only
    /// Replaces loops * 2 pi / delta' as the gate duration when set.
    std::optional<double> gate_time_override;

    double ratio() const noexcept { return lambda_c / delta_p; }
    /// 2 pi / delta'.
    double period() const noexcept;
    double gate_time() const noexcept {
        return gate_time_override ? *gate_time_override : loops * period();
    }
};

/// n_max = ceil(|alpha|^2 + 8 |alpha| + 10), |alpha| = 2 (lambda_c/delta') |m|.
int cutoff_for(double lambda_over_delta, double max_abs_m);

/// Parameters with n_max set by cutoff_for() at |m| = J, unless overridden.
GateParams make_gate_params(double lambda_over_delta, int particle_count, int loops,
                            std::optional<int> n_max_override = std::nullopt,
                            double delta_p = 1.0, double eta = 0.1);

/// Throws InvalidArgument on nonsensical values.
void validate(const GateParams& params);
/// False when eta >= 0.3, where the effective Hamiltonian is questionable.
bool lamb_dicke_ok(const GateParams& params);

/// Amplitudes over |n>|M_J>: amplitudes(n, i) with i the Dicke index.
class JointState {
public:
    JointState(int n_max, DickeBasis basis, CMatrix amplitudes);

    /// |0> (x) spin.
    static JointState ground(int n_max, const SpinState& spin);

    int n_max() const noexcept { return n_max_; }
    const DickeBasis& basis() const noexcept { return basis_; }
    const CMatrix& amplitudes() const noexcept { return amps_; }
    double norm() const { return amps_.norm(); }

private:
    int n_max_;
    DickeBasis basis_;
    CMatrix amps_;
};

/// Per-sector observables sampled at uniform times. Only sectors with
/// nonzero weight in the initial state are tracked; each sector's
/// observables are for its normalized motional state.
struct GateTrace {
    std::vector<double> times;
    std::vector<double> sector_m;
    std::vector<double> sector_weight;
    std::vector<std::vector<double>> nbar;               ///< [sector][sample]
    std::vector<std::vector<double>> phase;              ///< unwrapped, relative to m = 0
    std::vector<std::vector<double>> return_fidelity;    ///< |<initial|psi(t)>|^2
    std::vector<double> closure_times;                   ///< sample times at k 2pi/delta'
    std::vector<std::vector<double>> closure_fidelity;   ///< [sector][closure]

    double step = 0.0;
    int steps_per_sample = 0;
    double max_norm_drift = 0.0;
    double max_sector_norm_drift = 0.0;
    double max_top_population = 0.0;
    /// Max observable difference against a rerun at half the step; negative
    /// when the check was skipped.
    double convergence_deviation = -1.0;

    /// Long format with columns t, m, nbar, phase, return_fidelity.
    SweepResult to_table() const;
    std::size_t sector_index(double m) const;
};

struct GateEvolution {
    GateTrace trace;
    JointState final_state;
};

struct EvolveOptions {
    int sample_count = 64;
    /// Rerun at half the step and require observables to agree within 1e-8.
    bool convergence_check = true;
    /// Loops are split into this many RK4 steps (before halving).
    int steps_per_loop = 4096;
};

/// Integrates i d|psi>/dt = H(t)|psi> from t = 0 to t_end with fixed-step RK4.
/// Sectors are integrated in parallel.
///
/// Throws CutoffOverflow when the truncation is too small (either by the
/// cutoff rule or by > 1e-8 population in the top two Fock levels),
/// StepSizeError when the norm drifts by more than 1e-9 or the step-halving
/// check fails, InvalidArgument for sample_count below 64 per loop.
GateEvolution evolve_numeric(const GateParams& params, const JointState& initial, double t_end,
                             const EvolveOptions& options = {});

struct AnalyticSector {
    std::complex<double> alpha;  ///< coherent displacement of the oscillator
    double phase;                ///< accumulated phase, radians
};

/// Closed-form evolution of |0>|M_J = m>: the state is e^{i phase} |alpha> with
///   alpha(t) = -(lambda_c m / delta') (e^{i delta' t} - 1)
///   phase(t) = (lambda_c m / delta')^2 (delta' t - sin delta' t).
AnalyticSector evolve_analytic(const GateParams& params, double m, double t);

struct PhaseFit {
    SweepResult table;  ///< columns m, phase, fit_residual
    double coefficient = 0.0;           ///< least-squares a in phase = a m^2
    double expected_coefficient = 0.0;  ///< loops 2 pi (lambda_c/delta')^2
    double max_abs_residual = 0.0;
    double max_odd_component = 0.0;     ///< max |phase(m) - phase(-m)| / 2
    /// Coefficient of the commonly quoted curve loops * 4 pi lambda_c^2 / delta',
    /// kept for comparison only. It is twice `expected_coefficient` at delta' = 1.
    double quoted_curve_coefficient = 0.0;
    GateTrace trace;
};

/// Evolves every |0>|M_J> for the full gate time and fits phase = a m^2.
PhaseFit phase_vs_m(const GateParams& params, const EvolveOptions& options = {});

struct GateSqueezeResult {
    SpinState output;              ///< principal eigenvector of the reduced spin state
    double chi_t_eff = 0.0;        ///< -loops 2 pi (lambda_c/delta')^2
    double oat_fidelity = 0.0;     ///< <oat| rho_spin |oat>
    double overlap = 0.0;          ///< |<oat|output>|^2
    double purity = 0.0;           ///< Tr rho_spin^2
    double min_return_fidelity = 0.0;
    GateTrace trace;
};

/// Effective twisting strength realized by the gate. The phase e^{+i a m^2}
/// equals exp(-i chi_t m^2) for chi_t = -a.
double effective_chi_t(const GateParams& params);

/// Runs the gate on |0> (x) spin_in, traces out the motion and compares the
/// result with oat_evolve(spin_in, effective_chi_t(params)).
/// Throws OpenLoopError when some sector returns with fidelity < 1 - 1e-6.
GateSqueezeResult gate_as_squeezer(const GateParams& params, const SpinState& spin_in,
                                   const EvolveOptions& options = {});

/// Samples per loop needed so consecutive phase samples differ by < pi/2.
int samples_per_loop_for(const GateParams& params, double max_abs_m);

namespace serial {
GateEvolution evolve_numeric(const GateParams& params, const JointState& initial, double t_end,
                             const EvolveOptions& options = {});
}  // namespace serial

}  // namespace squeeze
