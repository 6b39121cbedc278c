#include "squeeze/squeezing.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include "squeeze/errors.hpp"

namespace squeeze {

namespace {

void check_chi(double chi_t) {
    if (!std::isfinite(chi_t)) throw InvalidArgument("chi_t must be finite");
}

void check_chi_grid(const std::vector<double>& chi_t_values) {
    if (chi_t_values.empty()) throw InvalidArgument("chi_t grid is empty");
    for (double c : chi_t_values) {
        if (!std::isfinite(c) || c < 0.0) {
            throw InvalidArgument("chi_t values must be finite and nonnegative, got " +
                                  std::to_string(c));
        }
    }
}

double smaller_eigenvalue(const Eigen::Matrix2d& m) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
    return std::max(0.0, mean - std::hypot(half_diff, m(0, 1)));
}

std::vector<double> sweep_row(const SpinState& cs, double chi_t) {
    const SpinState twisted = oat_evolve(cs, chi_t);
    const TangentCovariance tc = covariance_tangent(twisted);
    const double j = cs.basis().total_spin();
    const double xi = std::sqrt(smaller_eigenvalue(tc.covariance) / (0.5 * j));
    return {chi_t, xi, tc.mean.norm()};
}

SweepResult empty_sweep(int particle_count) {
    SweepResult out;
    out.columns = {"chi_t", "xi", "bloch_length"};
    out.metadata = {{"N", particle_count}, {"J", 0.5 * particle_count}};
    return out;
}

struct OverlapKernel {
    OverlapKernel(const SpinState& state, const std::vector<double>& thetas,
                  const std::vector<double>& phis)
        : amps(state.amplitudes()), phis(phis) {
        if (thetas.empty() || phis.empty()) throw InvalidArgument("overlap_grid: empty angle grid");
        for (double a : thetas)
            if (!std::isfinite(a)) throw InvalidArgument("overlap_grid: non-finite theta");
        for (double a : phis)
            if (!std::isfinite(a)) throw InvalidArgument("overlap_grid: non-finite phi");
        const DickeBasis& b = state.basis();
        m = Eigen::VectorXd(b.dim());
        for (int i = 0; i < b.dim(); ++i) m(i) = b.m(i);
        const SpinState cs = coherent_state(b.particle_count());
        const Rotation tilt(b, Axis::Y);
        probes.reserve(thetas.size());
        for (double t : thetas) probes.push_back(tilt.apply(cs.amplitudes(), t));
    }

    void row(std::size_t i, double* out) const {
        const CVector& probe = probes[i];
        for (std::size_t j = 0; j < phis.size(); ++j) {
            cplx acc = 0.0;
            for (Eigen::Index k = 0; k < amps.size(); ++k) {
                acc += std::conj(probe(k)) * std::polar(1.0, phis[j] * m(k)) * amps(k);
            }
            out[j] = std::clamp(std::norm(acc), 0.0, 1.0);
        }
    }

    const CVector& amps;
    const std::vector<double>& phis;
    Eigen::VectorXd m;
    std::vector<CVector> probes;
};

OverlapGrid empty_grid(const std::vector<double>& thetas, const std::vector<double>& phis) {
    OverlapGrid g;
    g.theta_values = thetas;
    g.phi_values = phis;
    g.probabilities.assign(thetas.size() * phis.size(), 0.0);
    return g;
}

}  // namespace

SpinState coherent_state(int particle_count) {
    const DickeBasis basis(particle_count);
    const long double n = particle_count;
    const long double log_norm = 0.5L * n * std::log(2.0L);
    CVector amps(basis.dim());
    for (int i = 0; i < basis.dim(); ++i) {
        // index i has N/2 + M = N - i up-spins; C(N, N - i) = C(N, i)
        const long double k = i;
        const long double log_binom =
            std::lgamma(n + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(n - k + 1.0L);
        amps(i) = static_cast<double>(std::exp(0.5L * log_binom - log_norm));
    }
    return SpinState(basis, std::move(amps));
}

SpinState oat_evolve(const SpinState& state, double chi_t) {
    check_chi(chi_t);
    const DickeBasis& b = state.basis();
    CVector out(b.dim());
    for (int i = 0; i < b.dim(); ++i) {
        const double m = b.m(i);
        out(i) = std::polar(1.0, -chi_t * m * m) * state[i];
    }
    return SpinState(b, std::move(out));
}

double squeezing_xi(const SpinState& state) {
    const TangentCovariance tc = covariance_tangent(state);
    return std::sqrt(smaller_eigenvalue(tc.covariance) / (0.5 * state.basis().total_spin()));
}

double squeezing_db(double var_squeezed, double var_unsqueezed) {
    if (!(var_squeezed > 0.0) || !(var_unsqueezed > 0.0) || !std::isfinite(var_squeezed) ||
        !std::isfinite(var_unsqueezed)) {
        throw InvalidArgument("squeezing_db: variances must be finite and strictly positive");
    }
    return 10.0 * std::log10(var_squeezed / var_unsqueezed);
}

OverlapGrid overlap_grid(const SpinState& state, const std::vector<double>& theta_values,
                         const std::vector<double>& phi_values) {
    const OverlapKernel kernel(state, theta_values, phi_values);
    OverlapGrid g = empty_grid(theta_values, phi_values);
    const auto rows = static_cast<long long>(theta_values.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < rows; ++i) {
        kernel.row(static_cast<std::size_t>(i), g.probabilities.data() + i * phi_values.size());
    }
    return g;
}

SweepResult xi_sweep(int particle_count, const std::vector<double>& chi_t_values) {
    check_chi_grid(chi_t_values);
    const SpinState cs = coherent_state(particle_count);
    const auto count = static_cast<long long>(chi_t_values.size());
    std::vector<std::vector<double>> rows(chi_t_values.size());
    // Errors cannot cross the parallel region; collect the first one.
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < count; ++i) {
        try {
            rows[i] = sweep_row(cs, chi_t_values[i]);
        } catch (...) {
#pragma omp critical(xi_sweep_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    SweepResult out = empty_sweep(particle_count);
    for (auto& r : rows) out.add_row(std::move(r));
    return out;
}

namespace serial {

OverlapGrid overlap_grid(const SpinState& state, const std::vector<double>& theta_values,
                         const std::vector<double>& phi_values) {
    const OverlapKernel kernel(state, theta_values, phi_values);
    OverlapGrid g = empty_grid(theta_values, phi_values);
    for (std::size_t i = 0; i < theta_values.size(); ++i) {
        kernel.row(i, g.probabilities.data() + i * phi_values.size());
    }
    return g;
}

SweepResult xi_sweep(int particle_count, const std::vector<double>& chi_t_values) {
    check_chi_grid(chi_t_values);
    const SpinState cs = coherent_state(particle_count);
    SweepResult out = empty_sweep(particle_count);
    for (double c : chi_t_values) out.add_row(sweep_row(cs, c));
    return out;
}

}  // namespace serial

XiMinimum find_min_xi(int particle_count, double chi_t_max, int grid_points, double tolerance) {
    if (!(chi_t_max > 0.0) || !std::isfinite(chi_t_max))
        throw InvalidArgument("find_min_xi: chi_t_max must be positive");
    if (grid_points < 2) throw InvalidArgument("find_min_xi: need at least 2 grid points");
    if (!(tolerance > 0.0)) throw InvalidArgument("find_min_xi: tolerance must be positive");

    std::vector<double> grid(grid_points);
    for (int k = 0; k < grid_points; ++k) grid[k] = chi_t_max * (k + 1) / grid_points;
    const SweepResult scan = xi_sweep(particle_count, grid);
    const std::vector<double> xi = scan.column("xi");
    const auto best = static_cast<std::size_t>(std::min_element(xi.begin(), xi.end()) - xi.begin());

    const SpinState cs = coherent_state(particle_count);
    auto eval = [&](double c) { return sweep_row(cs, c)[1]; };

    double lo = best == 0 ? 0.0 : grid[best - 1];
    double hi = best + 1 < grid.size() ? grid[best + 1] : grid[best];
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = eval(a);
    double fb = eval(b);
    while (hi - lo > tolerance) {
        if (fa < fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = eval(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = eval(b);
        }
    }
    XiMinimum out{grid[best], xi[best]};
    const double mid = 0.5 * (lo + hi);
    if (mid > 0.0) {
        const double fm = eval(mid);
        if (fm < out.xi) out = {mid, fm};
    }
    return out;
}

GridShape half_max_shape(const OverlapGrid& grid) {
    const double peak = *std::max_element(grid.probabilities.begin(), grid.probabilities.end());
    double w = 0.0, mt = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < grid.theta_values.size(); ++i) {
        for (std::size_t j = 0; j < grid.phi_values.size(); ++j) {
            const double p = grid.at(i, j);
            if (p < 0.5 * peak) continue;
            w += p;
            mt += p * grid.theta_values[i];
            mp += p * grid.phi_values[j];
        }
    }
    if (!(w > 0.0)) throw InvalidArgument("half_max_shape: grid is identically zero");
    mt /= w;
    mp /= w;
    GridShape s{0.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < grid.theta_values.size(); ++i) {
        for (std::size_t j = 0; j < grid.phi_values.size(); ++j) {
            const double p = grid.at(i, j);
            if (p < 0.5 * peak) continue;
            const double dt = grid.theta_values[i] - mt;
            const double dp = grid.phi_values[j] - mp;
            s.var_theta += p * dt * dt;
            s.var_phi += p * dp * dp;
            s.cov_theta_phi += p * dt * dp;
        }
    }
    s.var_theta /= w;
    s.var_phi /= w;
    s.cov_theta_phi /= w;
    const double denom = std::sqrt(s.var_theta * s.var_phi);
    s.correlation = denom > 0.0 ? s.cov_theta_phi / denom : 0.0;
    s.tilt = 0.5 * std::atan2(2.0 * s.cov_theta_phi, s.var_theta - s.var_phi);
    return s;
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw InvalidArgument("linspace: count must be >= 1");
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    for (int k = 0; k < count; ++k) out[k] = lo + (hi - lo) * k / (count - 1);
    out.back() = hi;
    return out;
}

}  // namespace squeeze
