#pragma once

// Coherent spin states, one-axis twisting exp(-i chi_t Jz^2), and the
// squeezing metrics built on them.

#include <vector>

#include "squeeze/dicke.hpp"
#include "squeeze/sweep.hpp"

namespace squeeze {

struct SqueezeParams {
    double chi_t = 0.0;  ///< dimensionless twisting strength chi * t
    int particle_count = 1;
};

/// Binomial coherent state c_M = 2^{-N/2} sqrt(C(N, N/2 + M)); all
/// amplitudes real and positive, so the Bloch vector points along +x.
SpinState coherent_state(int particle_count);

/// Multiplies the amplitude at M_J = m by exp(-i chi_t m^2).
SpinState oat_evolve(const SpinState& state, double chi_t);

/// xi = sqrt(lambda_min) / sqrt(J/2), lambda_min the smaller eigenvalue of
/// the tangent covariance.
double squeezing_xi(const SpinState& state);

/// 10 log10(var_squeezed / var_unsqueezed); negative means squeezed.
double squeezing_db(double var_squeezed, double var_unsqueezed);

struct OverlapGrid {
    std::vector<double> theta_values;
    std::vector<double> phi_values;
    /// Row-major, probabilities[i * phi_values.size() + j] for (theta_i, phi_j).
    std::vector<double> probabilities;

    double at(std::size_t i, std::size_t j) const {
        return probabilities[i * phi_values.size() + j];
    }
};

/// P(theta, phi) = |<CS| exp(i theta Jy) exp(i phi Jz) |state>|^2, the squared
/// overlap with the probe exp(-i phi Jz) exp(-i theta Jy)|CS>. Theta tilts the
/// probe out of the equator (Jy is the equatorial axis orthogonal to the +x
/// coherent state), phi moves it along the equator.
OverlapGrid overlap_grid(const SpinState& state, const std::vector<double>& theta_values,
                         const std::vector<double>& phi_values);

/// Columns: chi_t, xi, bloch_length.
SweepResult xi_sweep(int particle_count, const std::vector<double>& chi_t_values);

struct XiMinimum {
    double chi_t;
    double xi;
};

/// Minimizes xi(chi_t) for the twisted coherent state over (0, chi_t_max]:
/// uniform scan of `grid_points` points, then golden-section refinement of
/// the best bracket down to `tolerance` in chi_t.
XiMinimum find_min_xi(int particle_count, double chi_t_max = 0.5, int grid_points = 2000,
                      double tolerance = 1e-6);

/// Orientation of the region where `grid` is at least half its maximum,
/// from weighted second moments in the (theta, phi) plane.
struct GridShape {
    double var_theta;
    double var_phi;
    double cov_theta_phi;
    double correlation;  ///< cov / sqrt(var_theta var_phi)
    double tilt;         ///< principal-axis angle from the theta axis, radians
};
GridShape half_max_shape(const OverlapGrid& grid);

/// `count` evenly spaced values from `lo` to `hi` inclusive.
std::vector<double> linspace(double lo, double hi, int count);

/// Single-threaded reference versions of the OpenMP kernels. Every grid point
/// is computed by the same arithmetic, so results are bitwise identical.
namespace serial {
OverlapGrid overlap_grid(const SpinState& state, const std::vector<double>& theta_values,
                         const std::vector<double>& phi_values);
SweepResult xi_sweep(int particle_count, const std::vector<double>& chi_t_values);
}  // namespace serial

}  // namespace squeeze
