#include "squeeze/spinboson.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "squeeze/errors.hpp"
#include "squeeze/squeezing.hpp"

namespace squeeze {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double norm_drift_tolerance = 1e-9;
constexpr double top_population_tolerance = 1e-8;
constexpr double convergence_tolerance = 1e-8;
constexpr double return_fidelity_tolerance = 1e-6;

// Everything one sector's integration produces.
struct SectorRun {
    CVector psi;
    std::vector<double> nbar;
    std::vector<double> phase;  // unwrapped, not yet referenced to m = 0
    std::vector<double> fidelity;
    double norm_drift = 0.0;  // relative to the sector weight
    double top_population = 0.0;
};

// out = -i lambda m (e^{i delta t} a^dagger psi + e^{-i delta t} a psi)
void drive_derivative(double coupling, double delta, double t, const CVector& psi,
                      const Eigen::VectorXd& sqrt_n, CVector& out) {
    const Eigen::Index d = psi.size();
    const cplx up = cplx(0.0, -coupling) * std::polar(1.0, delta * t);
    const cplx down = cplx(0.0, -coupling) * std::polar(1.0, -delta * t);
    for (Eigen::Index n = 0; n < d; ++n) {
        cplx acc = 0.0;
        if (n > 0) acc += up * sqrt_n(n) * psi(n - 1);
        if (n + 1 < d) acc += down * sqrt_n(n + 1) * psi(n + 1);
        out(n) = acc;
    }
}

SectorRun integrate_sector(const GateParams& p, double m, const CVector& psi0,
                           const std::vector<double>& times, int steps_per_sample) {
    const Eigen::Index d = psi0.size();
    Eigen::VectorXd sqrt_n(d);
    for (Eigen::Index n = 0; n < d; ++n) sqrt_n(n) = std::sqrt(static_cast<double>(n));
    Eigen::VectorXd n_values = sqrt_n.array().square();

    const double coupling = p.lambda_c * m;
    const double weight = psi0.squaredNorm();
    const CVector reference = psi0 / std::sqrt(weight);

    SectorRun run;
    run.psi = psi0;
    run.nbar.reserve(times.size());
    run.phase.reserve(times.size());
    run.fidelity.reserve(times.size());

    CVector k1(d), k2(d), k3(d), k4(d), tmp(d);
    double last_raw = 0.0;
    double unwrapped = 0.0;

    auto record = [&](bool first) {
        const double w = run.psi.squaredNorm();
        run.norm_drift = std::max(run.norm_drift, std::abs(w / weight - 1.0));
        double top = std::norm(run.psi(d - 1));
        if (d >= 2) top += std::norm(run.psi(d - 2));
        run.top_population = std::max(run.top_population, top / weight);
        run.nbar.push_back(n_values.dot(run.psi.cwiseAbs2()) / weight);
        const cplx ov = reference.dot(run.psi) / std::sqrt(weight);
        run.fidelity.push_back(std::norm(ov));
        const double raw = std::arg(ov);
        if (first) {
            unwrapped = raw;
        } else {
            unwrapped += std::remainder(raw - last_raw, two_pi);
        }
        last_raw = raw;
        run.phase.push_back(unwrapped);
    };

    record(true);
    for (std::size_t s = 1; s < times.size(); ++s) {
        const double t0 = times[s - 1];
        const double h = (times[s] - t0) / steps_per_sample;
        for (int k = 0; k < steps_per_sample; ++k) {
            const double t = t0 + k * h;
            drive_derivative(coupling, p.delta_p, t, run.psi, sqrt_n, k1);
            tmp = run.psi + (0.5 * h) * k1;
            drive_derivative(coupling, p.delta_p, t + 0.5 * h, tmp, sqrt_n, k2);
            tmp = run.psi + (0.5 * h) * k2;
            drive_derivative(coupling, p.delta_p, t + 0.5 * h, tmp, sqrt_n, k3);
            tmp = run.psi + h * k3;
            drive_derivative(coupling, p.delta_p, t + h, tmp, sqrt_n, k4);
            run.psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        record(false);
    }
    return run;
}

struct RawEvolution {
    std::vector<int> sectors;  // Dicke indices with nonzero weight
    std::vector<SectorRun> runs;
};

RawEvolution run_sectors(const GateParams& p, const JointState& initial,
                         const std::vector<double>& times, int steps_per_sample, bool parallel) {
    RawEvolution raw;
    const DickeBasis& b = initial.basis();
    for (int i = 0; i < b.dim(); ++i)
        if (initial.amplitudes().col(i).squaredNorm() > 0.0) raw.sectors.push_back(i);
    raw.runs.resize(raw.sectors.size());
    const auto count = static_cast<long long>(raw.sectors.size());
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (long long s = 0; s < count; ++s) {
            const int i = raw.sectors[s];
            raw.runs[s] = integrate_sector(p, b.m(i), initial.amplitudes().col(i), times,
                                           steps_per_sample);
        }
    } else {
        for (long long s = 0; s < count; ++s) {
            const int i = raw.sectors[s];
            raw.runs[s] = integrate_sector(p, b.m(i), initial.amplitudes().col(i), times,
                                           steps_per_sample);
        }
    }
    return raw;
}

double max_observable_difference(const RawEvolution& a, const RawEvolution& b) {
    double dev = 0.0;
    for (std::size_t s = 0; s < a.runs.size(); ++s) {
        const SectorRun& x = a.runs[s];
        const SectorRun& y = b.runs[s];
        for (std::size_t k = 0; k < x.nbar.size(); ++k) {
            dev = std::max(dev, std::abs(x.nbar[k] - y.nbar[k]));
            dev = std::max(dev, std::abs(x.phase[k] - y.phase[k]));
            dev = std::max(dev, std::abs(x.fidelity[k] - y.fidelity[k]));
        }
    }
    return dev;
}

GateEvolution evolve_impl(const GateParams& params, const JointState& initial, double t_end,
                          const EvolveOptions& options, bool parallel) {
    validate(params);
    if (initial.n_max() != params.n_max) {
        throw InvalidArgument("joint state n_max " + std::to_string(initial.n_max()) +
                              " does not match params.n_max " + std::to_string(params.n_max));
    }
    if (initial.basis().particle_count() != params.particle_count) {
        throw InvalidArgument("joint state particle count does not match params");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("t_end must be positive");
    if (options.steps_per_loop < 1) throw InvalidArgument("steps_per_loop must be >= 1");
    if (std::abs(initial.norm() - 1.0) > 1e-12) {
        throw InvalidArgument("initial joint state is not normalized");
    }
    const double loops_covered = t_end / params.period();
    const int min_samples = 64 * static_cast<int>(std::ceil(loops_covered - 1e-9));
    if (options.sample_count < std::max(64, min_samples)) {
        throw InvalidArgument("sample_count " + std::to_string(options.sample_count) +
                              " is below 64 per loop (need " +
                              std::to_string(std::max(64, min_samples)) + ")");
    }

    const DickeBasis& b = initial.basis();
    double max_abs_m = 0.0;
    for (int i = 0; i < b.dim(); ++i)
        if (initial.amplitudes().col(i).squaredNorm() > 0.0)
            max_abs_m = std::max(max_abs_m, std::abs(b.m(i)));
    const int required = cutoff_for(params.ratio(), max_abs_m);
    if (params.n_max < required) {
        throw CutoffOverflow("n_max=" + std::to_string(params.n_max) +
                                 " is below the cutoff rule; use n_max >= " +
                                 std::to_string(required),
                             required);
    }

    std::vector<double> times(options.sample_count + 1);
    for (int s = 0; s <= options.sample_count; ++s)
        times[s] = t_end * static_cast<double>(s) / options.sample_count;
    times.back() = t_end;

    const double max_step = params.period() / options.steps_per_loop;
    const double interval = t_end / options.sample_count;
    const int steps = std::max(1, static_cast<int>(std::ceil(interval / max_step - 1e-9)));

    RawEvolution raw = run_sectors(params, initial, times, steps, parallel);

    GateTrace tr;
    tr.times = times;
    tr.step = interval / steps;
    tr.steps_per_sample = steps;

    double total_initial = 0.0;
    double total_final = 0.0;
    for (std::size_t s = 0; s < raw.sectors.size(); ++s) {
        const SectorRun& r = raw.runs[s];
        const double w = initial.amplitudes().col(raw.sectors[s]).squaredNorm();
        total_initial += w;
        total_final += r.psi.squaredNorm();
        tr.max_sector_norm_drift = std::max(tr.max_sector_norm_drift, r.norm_drift);
        tr.max_norm_drift = std::max(tr.max_norm_drift, r.norm_drift * w);
        tr.max_top_population = std::max(tr.max_top_population, r.top_population);
    }
    tr.max_norm_drift = std::max(tr.max_norm_drift, std::abs(total_final - total_initial));

    // The truncated Hamiltonian is Hermitian, so norm drift can only come from
    // the integrator; check it before blaming the cutoff.
    if (tr.max_norm_drift > norm_drift_tolerance) {
        throw StepSizeError("norm drift " + std::to_string(tr.max_norm_drift) +
                            " exceeds tolerance; reduce the step");
    }
    if (tr.max_top_population >= top_population_tolerance) {
        const int suggested = std::max(required, 2 * params.n_max + 2);
        throw CutoffOverflow("population " + std::to_string(tr.max_top_population) +
                                 " in the top two Fock levels; increase n_max to at least " +
                                 std::to_string(suggested),
                             suggested);
    }
    if (options.convergence_check) {
        const RawEvolution fine = run_sectors(params, initial, times, 2 * steps, parallel);
        tr.convergence_deviation = max_observable_difference(raw, fine);
        if (tr.convergence_deviation > convergence_tolerance) {
            throw StepSizeError("step-halving check failed: observables differ by " +
                                std::to_string(tr.convergence_deviation));
        }
    }

    // Phases are reported relative to the m = 0 sector when it is present.
    std::vector<double> reference(times.size(), 0.0);
    for (std::size_t s = 0; s < raw.sectors.size(); ++s)
        if (b.m(raw.sectors[s]) == 0.0) reference = raw.runs[s].phase;

    std::vector<std::size_t> closures;
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double cycles = times[k] / params.period();
        if (std::abs(cycles - std::round(cycles)) < 1e-9 * std::max(1.0, cycles)) {
            closures.push_back(k);
            tr.closure_times.push_back(times[k]);
        }
    }

    CMatrix final_amps = CMatrix::Zero(params.n_max + 1, b.dim());
    for (std::size_t s = 0; s < raw.sectors.size(); ++s) {
        SectorRun& r = raw.runs[s];
        tr.sector_m.push_back(b.m(raw.sectors[s]));
        tr.sector_weight.push_back(initial.amplitudes().col(raw.sectors[s]).squaredNorm());
        for (std::size_t k = 0; k < r.phase.size(); ++k) r.phase[k] -= reference[k];
        std::vector<double> closure_fid;
        for (std::size_t k : closures) closure_fid.push_back(r.fidelity[k]);
        tr.closure_fidelity.push_back(std::move(closure_fid));
        tr.nbar.push_back(std::move(r.nbar));
        tr.phase.push_back(std::move(r.phase));
        tr.return_fidelity.push_back(std::move(r.fidelity));
        final_amps.col(raw.sectors[s]) = r.psi;
    }

    return {std::move(tr), JointState(params.n_max, b, std::move(final_amps))};
}

}  // namespace

double GateParams::period() const noexcept { return two_pi / delta_p; }

int cutoff_for(double lambda_over_delta, double max_abs_m) {
    const double alpha = 2.0 * std::abs(lambda_over_delta) * std::abs(max_abs_m);
    return static_cast<int>(std::ceil(alpha * alpha + 8.0 * alpha + 10.0));
}

GateParams make_gate_params(double lambda_over_delta, int particle_count, int loops,
                            std::optional<int> n_max_override, double delta_p, double eta) {
    GateParams p;
    p.delta_p = delta_p;
    p.lambda_c = lambda_over_delta * delta_p;
    p.particle_count = particle_count;
    p.loops = loops;
    p.eta = eta;
    p.n_max = n_max_override ? *n_max_override
                             : cutoff_for(lambda_over_delta, 0.5 * particle_count);
    validate(p);
    return p;
}

void validate(const GateParams& p) {
    if (!(p.delta_p > 0.0) || !std::isfinite(p.delta_p))
        throw InvalidArgument("delta' must be positive and finite");
    if (!std::isfinite(p.lambda_c)) throw InvalidArgument("lambda_c must be finite");
    if (p.n_max < 1) throw InvalidArgument("n_max must be >= 1");
    if (p.particle_count < 1) throw InvalidArgument("particle count must be >= 1");
    if (p.loops < 1) throw InvalidArgument("loops must be >= 1");
    if (!std::isfinite(p.eta) || p.eta < 0.0) throw InvalidArgument("eta must be >= 0");
    if (p.gate_time_override && !(*p.gate_time_override > 0.0 && std::isfinite(*p.gate_time_override)))
        throw InvalidArgument("gate time override must be positive");
}

bool lamb_dicke_ok(const GateParams& p) { return p.eta < 0.3; }

JointState::JointState(int n_max, DickeBasis basis, CMatrix amplitudes)
    : n_max_(n_max), basis_(basis), amps_(std::move(amplitudes)) {
    if (n_max < 0) throw InvalidArgument("n_max must be >= 0");
    if (amps_.rows() != n_max + 1 || amps_.cols() != basis_.dim()) {
        throw InvalidArgument("joint amplitudes must be (n_max+1) x (N+1)");
    }
}

JointState JointState::ground(int n_max, const SpinState& spin) {
    CMatrix a = CMatrix::Zero(n_max + 1, spin.basis().dim());
    a.row(0) = spin.amplitudes().transpose();
    return JointState(n_max, spin.basis(), std::move(a));
}

SweepResult GateTrace::to_table() const {
    SweepResult out;
    out.columns = {"t", "m", "nbar", "phase", "return_fidelity"};
    for (std::size_t s = 0; s < sector_m.size(); ++s)
        for (std::size_t k = 0; k < times.size(); ++k)
            out.add_row({times[k], sector_m[s], nbar[s][k], phase[s][k], return_fidelity[s][k]});
    return out;
}

std::size_t GateTrace::sector_index(double m) const {
    for (std::size_t s = 0; s < sector_m.size(); ++s)
        if (sector_m[s] == m) return s;
    throw InvalidArgument("no traced sector with M_J=" + std::to_string(m));
}

GateEvolution evolve_numeric(const GateParams& params, const JointState& initial, double t_end,
                             const EvolveOptions& options) {
    return evolve_impl(params, initial, t_end, options, true);
}

namespace serial {
GateEvolution evolve_numeric(const GateParams& params, const JointState& initial, double t_end,
                             const EvolveOptions& options) {
    return evolve_impl(params, initial, t_end, options, false);
}
}  // namespace serial

AnalyticSector evolve_analytic(const GateParams& params, double m, double t) {
    const double c = params.lambda_c * m / params.delta_p;
    const double wt = params.delta_p * t;
    const cplx alpha = -c * (std::polar(1.0, wt) - 1.0);
    return {alpha, c * c * (wt - std::sin(wt))};
}

int samples_per_loop_for(const GateParams& params, double max_abs_m) {
    const double c = params.ratio() * max_abs_m;
    return std::max(64, static_cast<int>(std::ceil(16.0 * c * c)));
}

double effective_chi_t(const GateParams& params) {
    const double r = params.ratio();
    return -params.loops * two_pi * r * r;
}

PhaseFit phase_vs_m(const GateParams& params, const EvolveOptions& options) {
    validate(params);
    const DickeBasis basis(params.particle_count);
    CMatrix a = CMatrix::Zero(params.n_max + 1, basis.dim());
    a.row(0).setConstant(1.0 / std::sqrt(static_cast<double>(basis.dim())));
    const JointState initial(params.n_max, basis, std::move(a));

    EvolveOptions opts = options;
    opts.sample_count = std::max(options.sample_count,
                                 params.loops * samples_per_loop_for(params, basis.total_spin()));
    GateEvolution ev = evolve_numeric(params, initial, params.gate_time(), opts);

    PhaseFit fit;
    const GateTrace& tr = ev.trace;
    double num = 0.0, den = 0.0;
    for (std::size_t s = 0; s < tr.sector_m.size(); ++s) {
        const double m = tr.sector_m[s];
        num += tr.phase[s].back() * m * m;
        den += m * m * m * m;
    }
    fit.coefficient = num / den;
    const double r = params.ratio();
    fit.expected_coefficient = params.loops * two_pi * r * r;
    fit.quoted_curve_coefficient =
        params.loops * 2.0 * two_pi * params.lambda_c * params.lambda_c / params.delta_p;

    fit.table.columns = {"m", "phase", "fit_residual"};
    // ascending m
    for (std::size_t s = tr.sector_m.size(); s-- > 0;) {
        const double m = tr.sector_m[s];
        const double phase = tr.phase[s].back();
        const double residual = phase - fit.coefficient * m * m;
        fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(residual));
        const double mirrored = tr.phase[tr.sector_index(-m)].back();
        fit.max_odd_component = std::max(fit.max_odd_component, 0.5 * std::abs(phase - mirrored));
        fit.table.add_row({m, phase, residual});
    }
    fit.table.metadata = {{"coefficient", fit.coefficient},
                          {"expected_coefficient", fit.expected_coefficient},
                          {"quoted_curve_coefficient", fit.quoted_curve_coefficient},
                          {"max_abs_residual", fit.max_abs_residual},
                          {"max_odd_component", fit.max_odd_component}};
    fit.trace = std::move(ev.trace);
    return fit;
}

GateSqueezeResult gate_as_squeezer(const GateParams& params, const SpinState& spin_in,
                                   const EvolveOptions& options) {
    validate(params);
    if (std::abs(spin_in.norm() - 1.0) > 1e-12) throw InvalidArgument("spin_in is not normalized");
    const DickeBasis& b = spin_in.basis();
    EvolveOptions opts = options;
    opts.sample_count = std::max(options.sample_count,
                                 params.loops * samples_per_loop_for(params, b.total_spin()));
    GateEvolution ev =
        evolve_numeric(params, JointState::ground(params.n_max, spin_in), params.gate_time(), opts);

    double min_fid = 1.0;
    for (std::size_t s = 0; s < ev.trace.sector_m.size(); ++s)
        min_fid = std::min(min_fid, ev.trace.return_fidelity[s].back());
    if (min_fid < 1.0 - return_fidelity_tolerance) {
        throw OpenLoopError("motional return fidelity " + std::to_string(min_fid) +
                            " at the end of the gate; the loop is not closed");
    }

    const CMatrix& amps = ev.final_state.amplitudes();
    const CMatrix rho = amps.transpose() * amps.conjugate();
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho);
    CVector top = solver.eigenvectors().col(b.dim() - 1);
    const cplx align = top.dot(CVector(amps.row(0).transpose()));
    if (std::abs(align) > 0.0) top *= align / std::abs(align);
    top.normalize();

    GateSqueezeResult out{SpinState(b, top), 0.0, 0.0, 0.0, 0.0, 0.0, {}};
    out.chi_t_eff = effective_chi_t(params);
    const SpinState ideal = oat_evolve(spin_in, out.chi_t_eff);
    out.oat_fidelity = ideal.amplitudes().dot(rho * ideal.amplitudes()).real();
    out.overlap = std::norm(ideal.amplitudes().dot(top));
    out.purity = rho.cwiseAbs2().sum();
    out.min_return_fidelity = min_fid;
    out.trace = std::move(ev.trace);
    return out;
}

}  // namespace squeeze
