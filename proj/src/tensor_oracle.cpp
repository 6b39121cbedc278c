#include "squeeze/tensor_oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include "squeeze/errors.hpp"

namespace squeeze::oracle {

namespace {

void check_size(int particle_count) {
    if (particle_count < 1) throw InvalidArgument("particle count must be >= 1");
    if (particle_count > max_particles) {
        throw ResourceError("the product-space oracle is limited to N <= " +
                            std::to_string(max_particles) + ", got N=" +
                            std::to_string(particle_count));
    }
}

std::uint64_t binomial(int n, int k) {
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

CVector raise(int n, const CVector& a) {
    CVector out = CVector::Zero(a.size());
    for (std::uint32_t c = 0; c < static_cast<std::uint32_t>(a.size()); ++c) {
        if (a(c) == cplx(0.0)) continue;
        for (int j = 0; j < n; ++j) {
            const std::uint32_t bit = 1u << j;
            if (c & bit) out(c ^ bit) += a(c);
        }
    }
    return out;
}

CVector lower(int n, const CVector& a) {
    CVector out = CVector::Zero(a.size());
    for (std::uint32_t c = 0; c < static_cast<std::uint32_t>(a.size()); ++c) {
        if (a(c) == cplx(0.0)) continue;
        for (int j = 0; j < n; ++j) {
            const std::uint32_t bit = 1u << j;
            if (!(c & bit)) out(c | bit) += a(c);
        }
    }
    return out;
}

CVector apply_z(int n, const CVector& a) {
    CVector out(a.size());
    for (std::uint32_t c = 0; c < static_cast<std::uint32_t>(a.size()); ++c)
        out(c) = 0.5 * (n - 2 * std::popcount(c)) * a(c);
    return out;
}

std::string angle_label(double theta) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "exp(-i*%g*Jx)", theta);
    return buf;
}

}  // namespace

std::vector<std::uint32_t> configurations(int particle_count, int q) {
    check_size(particle_count);
    if (q < 0 || q > particle_count) {
        throw InvalidArgument("q=" + std::to_string(q) + " outside 0.." +
                              std::to_string(particle_count));
    }
    std::vector<std::uint32_t> out;
    out.reserve(binomial(particle_count, q));
    if (q == 0) {
        out.push_back(0);
        return out;
    }
    const std::uint32_t limit = 1u << particle_count;
    // Gosper's hack: next larger integer with the same popcount.
    for (std::uint32_t c = (1u << q) - 1; c < limit;) {
        out.push_back(c);
        const std::uint32_t low = c & (~c + 1);
        const std::uint32_t ripple = c + low;
        c = (((ripple ^ c) >> 2) / low) | ripple;
    }
    return out;
}

FullState dicke_to_full(int particle_count, int q) {
    const auto configs = configurations(particle_count, q);
    // sqrt(q!(N-q)!/N!) = 1/sqrt(C(N, q))
    const double amp = 1.0 / std::sqrt(static_cast<double>(binomial(particle_count, q)));
    FullState s{particle_count, CVector::Zero(Eigen::Index{1} << particle_count)};
    for (auto c : configs) s.amplitudes(c) = amp;
    return s;
}

FullOperator::FullOperator(int particle_count, OperatorLabel label)
    : n_(particle_count), label_(label) {
    check_size(particle_count);
    if (label == OperatorLabel::Custom) {
        throw InvalidArgument("collective_full: label must name a collective operator");
    }
}

CVector FullOperator::apply(const CVector& a) const {
    if (a.size() != (Eigen::Index{1} << n_)) throw InvalidArgument("FullOperator: wrong length");
    switch (label_) {
        case OperatorLabel::Jz: return apply_z(n_, a);
        case OperatorLabel::Jplus: return raise(n_, a);
        case OperatorLabel::Jminus: return lower(n_, a);
        case OperatorLabel::Jx: return 0.5 * (raise(n_, a) + lower(n_, a));
        case OperatorLabel::Jy: return (raise(n_, a) - lower(n_, a)) / cplx(0.0, 2.0);
        case OperatorLabel::Jsq: {
            const FullOperator x(n_, OperatorLabel::Jx), y(n_, OperatorLabel::Jy),
                z(n_, OperatorLabel::Jz);
            return x.apply(x.apply(a)) + y.apply(y.apply(a)) + z.apply(z.apply(a));
        }
        case OperatorLabel::Custom: break;
    }
    throw InvalidArgument("FullOperator: unsupported label");
}

FullState FullOperator::apply(const FullState& state) const {
    return {state.particle_count, apply(state.amplitudes)};
}

FullOperator collective_full(int particle_count, OperatorLabel label) {
    return FullOperator(particle_count, label);
}

CVector rotate_x_full(int particle_count, const CVector& amplitudes, double angle) {
    check_size(particle_count);
    if (!std::isfinite(angle)) throw InvalidArgument("rotation angle must be finite");
    CVector a = amplitudes;
    const double c = std::cos(0.5 * angle);
    const cplx s(0.0, -std::sin(0.5 * angle));
    for (int j = 0; j < particle_count; ++j) {
        const std::uint32_t bit = 1u << j;
        for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(a.size()); ++k) {
            if (k & bit) continue;
            const cplx a0 = a(k);
            const cplx a1 = a(k | bit);
            a(k) = c * a0 + s * a1;
            a(k | bit) = s * a0 + c * a1;
        }
    }
    return a;
}

bool SubspaceReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

double SubspaceReport::max_deviation() const {
    double m = 0.0;
    for (const auto& c : checks) m = std::max(m, c.max_deviation);
    return m;
}

SubspaceReport verify_subspace(int particle_count, const std::vector<double>& thetas) {
    check_size(particle_count);
    constexpr double threshold = 1e-12;
    const DickeBasis basis(particle_count);
    const int d = basis.dim();
    const Eigen::Index full = Eigen::Index{1} << particle_count;

    CMatrix b(full, d);
    for (int q = 0; q < d; ++q) b.col(q) = dicke_to_full(particle_count, q).amplitudes;

    SubspaceReport report{particle_count, {}};
    auto add = [&](std::string name, double dev) {
        report.checks.push_back({std::move(name), dev, threshold, dev <= threshold});
    };

    double norm_dev = 0.0;
    for (int q = 0; q < d; ++q) norm_dev = std::max(norm_dev, std::abs(b.col(q).norm() - 1.0));
    add("normalization", norm_dev);
    add("orthogonality",
        (b.adjoint() * b - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff());

    // Compares the image of every Dicke vector under a full-space map with
    // the expected Dicke-subspace column.
    auto compare = [&](const std::string& name, auto&& full_map, const CMatrix& expected) {
        double leak = 0.0;
        double elem = 0.0;
        for (int q = 0; q < d; ++q) {
            const CVector w = full_map(CVector(b.col(q)));
            const CVector coeffs = b.adjoint() * w;
            leak = std::max(leak, (w - b * coeffs).cwiseAbs().maxCoeff());
            elem = std::max(elem, (coeffs - expected.col(q)).cwiseAbs().maxCoeff());
        }
        add(name + "/invariance", leak);
        add(name + "/elements", elem);
    };

    for (auto label : {OperatorLabel::Jz, OperatorLabel::Jplus, OperatorLabel::Jminus,
                       OperatorLabel::Jx, OperatorLabel::Jy, OperatorLabel::Jsq}) {
        const FullOperator op(particle_count, label);
        compare(std::string(to_string(label)), [&](const CVector& v) { return op.apply(v); },
                build_operator(basis, label).matrix());
    }
    const Rotation rx(basis, Axis::X);
    for (double theta : thetas) {
        compare(angle_label(theta),
                [&](const CVector& v) { return rotate_x_full(particle_count, v, theta); },
                rx.unitary(theta));
    }
    return report;
}

}  // namespace squeeze::oracle
