#pragma once

// Brute-force 2^N product-space representation used to check the Dicke
// subspace machinery. Configurations are bitmasks; bit j set means particle
// j is down.

#include <cstdint>
#include <string>
#include <vector>

#include "squeeze/dicke.hpp"

namespace squeeze::oracle {

inline constexpr int max_particles = 12;

struct FullState {
    int particle_count;
    CVector amplitudes;  ///< length 2^N, indexed by configuration
};

/// Normalized |N/2, N/2 - q>: amplitude sqrt(q!(N-q)!/N!) on every
/// configuration with exactly q down spins.
FullState dicke_to_full(int particle_count, int q);

/// All configurations of N bits with exactly q set, in increasing order.
std::vector<std::uint32_t> configurations(int particle_count, int q);

/// Collective operator acting configuration by configuration as a sum of
/// single-particle terms; never stores a 2^N x 2^N matrix.
class FullOperator {
public:
    FullOperator(int particle_count, OperatorLabel label);

    int particle_count() const noexcept { return n_; }
    OperatorLabel label() const noexcept { return label_; }
    CVector apply(const CVector& amplitudes) const;
    FullState apply(const FullState& state) const;

private:
    int n_;
    OperatorLabel label_;
};

/// Throws ResourceError for N > max_particles.
FullOperator collective_full(int particle_count, OperatorLabel label);

/// exp(-i angle Jx) as the product of single-particle rotations
/// exp(-i angle sigma_x / 2) on every bit.
CVector rotate_x_full(int particle_count, const CVector& amplitudes, double angle);

struct CheckResult {
    std::string name;
    double max_deviation;
    double threshold;
    bool passed;
};

struct SubspaceReport {
    int particle_count;
    std::vector<CheckResult> checks;

    bool passed() const;
    double max_deviation() const;
};

/// Checks that span{dicke_to_full(N, q)} is invariant under Jz, J+-, Jx, Jy,
/// J^2 and exp(-i theta Jx) for each theta, and that the matrix elements in
/// that basis match the Dicke-subspace operators. Throws ResourceError for
/// N > max_particles.
SubspaceReport verify_subspace(int particle_count,
                               const std::vector<double>& thetas = {0.3, 0.7, 1.9});

}  // namespace squeeze::oracle
