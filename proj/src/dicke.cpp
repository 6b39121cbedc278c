#include "squeeze/dicke.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "squeeze/errors.hpp"

namespace squeeze {

namespace {

void require_same_basis(const DickeBasis& a, const DickeBasis& b, const char* where) {
    if (!(a == b)) {
        throw InvalidArgument(std::string(where) + ": basis mismatch (N=" +
                              std::to_string(a.particle_count()) + " vs N=" +
                              std::to_string(b.particle_count()) + ")");
    }
}

// Coefficient of J+ |J, m> = c |J, m+1>.
double raising_coefficient(double j, double m) {
    return std::sqrt(j * (j + 1.0) - m * (m + 1.0));
}

CMatrix raising_matrix(const DickeBasis& basis) {
    const int d = basis.dim();
    const double j = basis.total_spin();
    CMatrix out = CMatrix::Zero(d, d);
    for (int i = 1; i < d; ++i) {
        out(i - 1, i) = raising_coefficient(j, basis.m(i));
    }
    return out;
}

}  // namespace

DickeBasis::DickeBasis(int particle_count) : n_(particle_count) {
    if (particle_count < 1) {
        throw InvalidArgument("particle count must be >= 1, got " + std::to_string(particle_count));
    }
}

int DickeBasis::index_of(double m) const {
    const double twice = 2.0 * m;
    const double rounded = std::round(twice);
    if (!std::isfinite(m) || std::abs(twice - rounded) > 1e-9) {
        throw InvalidArgument("M_J must be a half-integer, got " + std::to_string(m));
    }
    const long long diff = static_cast<long long>(n_) - static_cast<long long>(rounded);
    if (diff < 0 || diff > 2LL * n_ || diff % 2 != 0) {
        throw InvalidArgument("M_J=" + std::to_string(m) + " is not in the J=" +
                              std::to_string(total_spin()) + " multiplet");
    }
    return static_cast<int>(diff / 2);
}

std::vector<double> DickeBasis::m_values() const {
    std::vector<double> out(dim());
    for (int i = 0; i < dim(); ++i) out[i] = m(i);
    return out;
}

DickeBasis make_basis(int particle_count) { return DickeBasis(particle_count); }

SpinState::SpinState(DickeBasis basis, CVector amplitudes)
    : basis_(basis), amps_(std::move(amplitudes)) {
    if (amps_.size() != basis_.dim()) {
        throw InvalidArgument("amplitude vector has length " + std::to_string(amps_.size()) +
                              ", basis dimension is " + std::to_string(basis_.dim()));
    }
}

SpinState SpinState::dicke(const DickeBasis& basis, double m) {
    CVector v = CVector::Zero(basis.dim());
    v(basis.index_of(m)) = 1.0;
    return SpinState(basis, std::move(v));
}

std::string_view to_string(OperatorLabel label) {
    switch (label) {
        case OperatorLabel::Jz: return "Jz";
        case OperatorLabel::Jplus: return "Jplus";
        case OperatorLabel::Jminus: return "Jminus";
        case OperatorLabel::Jx: return "Jx";
        case OperatorLabel::Jy: return "Jy";
        case OperatorLabel::Jsq: return "Jsq";
        case OperatorLabel::Custom: return "custom";
    }
    return "custom";
}

OperatorLabel parse_operator_label(std::string_view name) {
    for (auto l : {OperatorLabel::Jz, OperatorLabel::Jplus, OperatorLabel::Jminus,
                   OperatorLabel::Jx, OperatorLabel::Jy, OperatorLabel::Jsq}) {
        if (name == to_string(l)) return l;
    }
    throw InvalidArgument("unknown operator label '" + std::string(name) + "'");
}

CollectiveOperator::CollectiveOperator(DickeBasis basis, CMatrix matrix, OperatorLabel label)
    : basis_(basis), matrix_(std::move(matrix)), label_(label) {
    if (matrix_.rows() != basis_.dim() || matrix_.cols() != basis_.dim()) {
        throw InvalidArgument("operator matrix shape does not match basis dimension " +
                              std::to_string(basis_.dim()));
    }
}

CollectiveOperator build_operator(const DickeBasis& basis, OperatorLabel label) {
    const int d = basis.dim();
    switch (label) {
        case OperatorLabel::Jz: {
            CMatrix m = CMatrix::Zero(d, d);
            for (int i = 0; i < d; ++i) m(i, i) = basis.m(i);
            return {basis, std::move(m), label};
        }
        case OperatorLabel::Jplus:
            return {basis, raising_matrix(basis), label};
        case OperatorLabel::Jminus:
            return {basis, raising_matrix(basis).adjoint(), label};
        case OperatorLabel::Jx: {
            const CMatrix up = raising_matrix(basis);
            return {basis, 0.5 * (up + up.adjoint()), label};
        }
        case OperatorLabel::Jy: {
            const CMatrix up = raising_matrix(basis);
            return {basis, (up - up.adjoint()) / cplx(0.0, 2.0), label};
        }
        case OperatorLabel::Jsq: {
            const CMatrix jx = build_operator(basis, OperatorLabel::Jx).matrix();
            const CMatrix jy = build_operator(basis, OperatorLabel::Jy).matrix();
            const CMatrix jz = build_operator(basis, OperatorLabel::Jz).matrix();
            return {basis, jx * jx + jy * jy + jz * jz, label};
        }
        case OperatorLabel::Custom:
            break;
    }
    throw InvalidArgument("build_operator: label must name a collective operator");
}

CollectiveOperator build_operator(const DickeBasis& basis, std::string_view label) {
    return build_operator(basis, parse_operator_label(label));
}

CollectiveOperator identity_operator(const DickeBasis& basis) {
    return {basis, CMatrix::Identity(basis.dim(), basis.dim()), OperatorLabel::Custom};
}

CVector apply(const CollectiveOperator& op, const SpinState& state) {
    require_same_basis(op.basis(), state.basis(), "apply");
    return op.matrix() * state.amplitudes();
}

cplx expectation(const CollectiveOperator& op, const SpinState& state) {
    require_same_basis(op.basis(), state.basis(), "expectation");
    return state.amplitudes().dot(op.matrix() * state.amplitudes());
}

Rotation::Rotation(const DickeBasis& basis, Axis axis) : basis_(basis), axis_(axis) {
    const int d = basis.dim();
    const double j = basis.total_spin();
    eigenvalues_.resize(d);
    if (axis == Axis::Z) {
        for (int i = 0; i < d; ++i) eigenvalues_(i) = basis.m(i);
        return;
    }

    // Jx is real symmetric tridiagonal in the Dicke basis.
    Eigen::MatrixXd jx = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) {
        const double c = 0.5 * raising_coefficient(j, basis.m(i));
        jx(i - 1, i) = c;
        jx(i, i - 1) = c;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jx);
    if (solver.info() != Eigen::Success) {
        throw Error("Rotation: eigendecomposition of Jx failed");
    }
    // The spectrum of any spin component is exactly {-J, ..., J}; snap the
    // ascending eigenvalues onto it.
    for (int k = 0; k < d; ++k) {
        const double exact = -j + k;
        const double got = solver.eigenvalues()(k);
        eigenvalues_(k) = std::abs(got - exact) < 1e-8 * (1.0 + j) ? exact : got;
    }
    eigenvectors_ = solver.eigenvectors().cast<cplx>();

    if (axis == Axis::Y) {
        // Jy = Rz Jx Rz^dagger with Rz = exp(-i pi/2 Jz).
        for (int i = 0; i < d; ++i) {
            eigenvectors_.row(i) *= std::polar(1.0, -0.5 * std::numbers::pi * basis.m(i));
        }
    }
}

CVector Rotation::apply(const CVector& amplitudes, double angle) const {
    if (!std::isfinite(angle)) throw InvalidArgument("rotation angle must be finite");
    if (amplitudes.size() != basis_.dim()) throw InvalidArgument("rotate: basis mismatch");
    const int d = basis_.dim();
    if (axis_ == Axis::Z) {
        CVector out(d);
        for (int i = 0; i < d; ++i) out(i) = std::polar(1.0, -angle * eigenvalues_(i)) * amplitudes(i);
        return out;
    }
    CVector coeffs = eigenvectors_.adjoint() * amplitudes;
    for (int k = 0; k < d; ++k) coeffs(k) *= std::polar(1.0, -angle * eigenvalues_(k));
    return eigenvectors_ * coeffs;
}

SpinState Rotation::apply(const SpinState& state, double angle) const {
    require_same_basis(basis_, state.basis(), "rotate");
    return SpinState(basis_, apply(state.amplitudes(), angle));
}

CMatrix Rotation::unitary(double angle) const {
    if (!std::isfinite(angle)) throw InvalidArgument("rotation angle must be finite");
    const int d = basis_.dim();
    CVector phases(d);
    for (int k = 0; k < d; ++k) phases(k) = std::polar(1.0, -angle * eigenvalues_(k));
    if (axis_ == Axis::Z) return phases.asDiagonal();
    return eigenvectors_ * phases.asDiagonal() * eigenvectors_.adjoint();
}

SpinState rotate(const SpinState& state, Axis axis, double angle) {
    if (!std::isfinite(angle)) throw InvalidArgument("rotation angle must be finite");
    return Rotation(state.basis(), axis).apply(state, angle);
}

CollectiveOperator ramsey_hamiltonian(const DickeBasis& basis, double delta, double rabi) {
    const CMatrix up = raising_matrix(basis);
    CMatrix h = rabi * (up + up.adjoint());
    for (int i = 0; i < basis.dim(); ++i) h(i, i) += delta * basis.m(i);
    return {basis, std::move(h), OperatorLabel::Custom};
}

SpinState evolve(const CollectiveOperator& hamiltonian, const SpinState& state, double t) {
    require_same_basis(hamiltonian.basis(), state.basis(), "evolve");
    if (!std::isfinite(t)) throw InvalidArgument("evolution time must be finite");
    const CMatrix& h = hamiltonian.matrix();
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff())) {
        throw InvalidArgument("evolve: Hamiltonian is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    CVector coeffs = solver.eigenvectors().adjoint() * state.amplitudes();
    for (Eigen::Index k = 0; k < coeffs.size(); ++k)
        coeffs(k) *= std::polar(1.0, -t * solver.eigenvalues()(k));
    return SpinState(state.basis(), solver.eigenvectors() * coeffs);
}

SpinState normalized(const DickeBasis& basis, const CVector& amplitudes) {
    const double n = amplitudes.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero vector");
    return SpinState(basis, amplitudes / n);
}

Eigen::Vector3d mean_spin(const SpinState& state) {
    const DickeBasis& b = state.basis();
    const CVector& a = state.amplitudes();
    const double j = b.total_spin();
    // <J+> = sum_i conj(a_{i-1}) c_i a_i, with Jx = Re<J+>, Jy = Im<J+>.
    cplx plus = 0.0;
    double z = 0.0;
    for (int i = 0; i < b.dim(); ++i) {
        z += b.m(i) * std::norm(a(i));
        if (i > 0) plus += std::conj(a(i - 1)) * raising_coefficient(j, b.m(i)) * a(i);
    }
    return {plus.real(), plus.imag(), z};
}

double direction_threshold(const DickeBasis& basis) { return 1e-9 * basis.total_spin(); }

TangentCovariance covariance_tangent(const SpinState& state) {
    const DickeBasis& b = state.basis();
    const std::array<CollectiveOperator, 3> ops = {build_operator(b, OperatorLabel::Jx),
                                                   build_operator(b, OperatorLabel::Jy),
                                                   build_operator(b, OperatorLabel::Jz)};
    std::array<CVector, 3> applied;
    Eigen::Vector3d mean;
    for (int a = 0; a < 3; ++a) {
        applied[a] = apply(ops[a], state);
        mean(a) = state.amplitudes().dot(applied[a]).real();
    }
    const double length = mean.norm();
    if (!(length > direction_threshold(b))) {
        throw DegenerateDirection("mean spin length " + std::to_string(length) +
                                  " is below the direction threshold " +
                                  std::to_string(direction_threshold(b)));
    }

    // Symmetrized second moments: Re <J_a J_b> = Re <J_a psi | J_b psi>.
    Eigen::Matrix3d cov;
    for (int a = 0; a < 3; ++a) {
        for (int c = a; c < 3; ++c) {
            cov(a, c) = applied[a].dot(applied[c]).real() - mean(a) * mean(c);
            cov(c, a) = cov(a, c);
        }
    }

    TangentCovariance out;
    out.mean = mean;
    out.direction = mean / length;
    const Eigen::Vector3d z_axis = Eigen::Vector3d::UnitZ();
    Eigen::Vector3d proj = z_axis - out.direction.dot(z_axis) * out.direction;
    out.u1 = proj.norm() > 1e-12 ? Eigen::Vector3d(proj.normalized()) : Eigen::Vector3d::UnitX();
    out.u2 = out.direction.cross(out.u1);
    const Eigen::Vector3d* u[2] = {&out.u1, &out.u2};
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) out.covariance(a, c) = u[a]->dot(cov * *u[c]);
    out.covariance(0, 1) = out.covariance(1, 0) =
        0.5 * (out.covariance(0, 1) + out.covariance(1, 0));
    return out;
}

}  // namespace squeeze
