#pragma once

// Symmetric (Dicke) subspace of N spin-1/2 particles and the collective
// angular-momentum operators acting on it.
//
// Amplitude index i corresponds to M_J = J - i, so index 0 is the all-up
// state |J, J> and index N is |J, -J>.

#include <array>
#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace squeeze {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

class DickeBasis {
public:
    explicit DickeBasis(int particle_count);

    int particle_count() const noexcept { return n_; }
    /// Total pseudo-spin J = N/2.
    double total_spin() const noexcept { return 0.5 * n_; }
    int dim() const noexcept { return n_ + 1; }
    /// M_J value stored at amplitude index `i`.
    double m(int i) const noexcept { return 0.5 * (n_ - 2 * i); }
    /// Amplitude index of M_J = `m`; throws InvalidArgument when `m` is not
    /// in {J, J-1, ..., -J}.
    int index_of(double m) const;
    std::vector<double> m_values() const;

    bool operator==(const DickeBasis&) const = default;

private:
    int n_;
};

DickeBasis make_basis(int particle_count);

class SpinState {
public:
    SpinState(DickeBasis basis, CVector amplitudes);

    const DickeBasis& basis() const noexcept { return basis_; }
    const CVector& amplitudes() const noexcept { return amps_; }
    cplx operator[](int i) const { return amps_(i); }
    double norm() const { return amps_.norm(); }

    /// |J, m>.
    static SpinState dicke(const DickeBasis& basis, double m);

private:
    DickeBasis basis_;
    CVector amps_;
};

enum class OperatorLabel { Jz, Jplus, Jminus, Jx, Jy, Jsq, Custom };

std::string_view to_string(OperatorLabel label);
/// Parses "Jz", "Jplus", ...; throws InvalidArgument on anything else.
OperatorLabel parse_operator_label(std::string_view name);

class CollectiveOperator {
public:
    CollectiveOperator(DickeBasis basis, CMatrix matrix, OperatorLabel label);

    const DickeBasis& basis() const noexcept { return basis_; }
    const CMatrix& matrix() const noexcept { return matrix_; }
    OperatorLabel label() const noexcept { return label_; }

private:
    DickeBasis basis_;
    CMatrix matrix_;
    OperatorLabel label_;
};

/// Builds one of the named collective operators. `Custom` is rejected; use
/// the CollectiveOperator constructor for arbitrary matrices.
CollectiveOperator build_operator(const DickeBasis& basis, OperatorLabel label);
CollectiveOperator build_operator(const DickeBasis& basis, std::string_view label);
CollectiveOperator identity_operator(const DickeBasis& basis);

/// Matrix-vector product; the result is not renormalized.
CVector apply(const CollectiveOperator& op, const SpinState& state);
cplx expectation(const CollectiveOperator& op, const SpinState& state);

enum class Axis { X, Y, Z };

/// Precomputed eigendecomposition of J_axis, so exp(-i angle J_axis) can be
/// applied for many angles at the cost of two matrix-vector products each.
class Rotation {
public:
    Rotation(const DickeBasis& basis, Axis axis);

    const DickeBasis& basis() const noexcept { return basis_; }
    Axis axis() const noexcept { return axis_; }

    /// exp(-i angle J_axis) |state>.
    SpinState apply(const SpinState& state, double angle) const;
    CVector apply(const CVector& amplitudes, double angle) const;
    /// Dense exp(-i angle J_axis).
    CMatrix unitary(double angle) const;

private:
    DickeBasis basis_;
    Axis axis_;
    CMatrix eigenvectors_;  // unused for Axis::Z
    Eigen::VectorXd eigenvalues_;
};

SpinState rotate(const SpinState& state, Axis axis, double angle);

/// Ramsey Hamiltonian delta Jz + rabi (J+ + J-), labelled Custom. For
/// delta = 0 its evolution is a rotation about x by 2 rabi t.
CollectiveOperator ramsey_hamiltonian(const DickeBasis& basis, double delta, double rabi);

/// exp(-i H t)|state> for a Hermitian H, by eigendecomposition.
SpinState evolve(const CollectiveOperator& hamiltonian, const SpinState& state, double t);

/// Renormalizes an amplitude vector into a state; throws on a zero vector.
SpinState normalized(const DickeBasis& basis, const CVector& amplitudes);

/// Mean spin <J> = (<Jx>, <Jy>, <Jz>).
Eigen::Vector3d mean_spin(const SpinState& state);

struct TangentCovariance {
    Eigen::Vector3d mean;       ///< <J>
    Eigen::Vector3d direction;  ///< <J> / |<J>|
    Eigen::Vector3d u1;         ///< tangent axis 1
    Eigen::Vector3d u2;         ///< direction x u1
    Eigen::Matrix2d covariance; ///< Cov(J.u_a, J.u_b), symmetrized
};

/// Threshold on |<J>| below which the mean-spin direction is undefined.
double direction_threshold(const DickeBasis& basis);

/// Covariance of the two spin components orthogonal to the mean spin.
/// u1 is the normalized projection of z onto the tangent plane, or x when
/// the mean spin is along +-z. Throws DegenerateDirection when |<J>| is at
/// or below direction_threshold().
TangentCovariance covariance_tangent(const SpinState& state);

}  // namespace squeeze
