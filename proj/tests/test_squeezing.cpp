#include <cmath>
#include <numbers>

#include "doctest.h"
#include "squeeze/errors.hpp"
#include "squeeze/squeezing.hpp"
#include "test_support.hpp"

using namespace squeeze;
using squeeze::testing::max_abs;
using squeeze::testing::oat_bloch_length;
using squeeze::testing::oat_xi_closed_form;
using squeeze::testing::random_state;

namespace {

// C(N, k) / 2^N by repeated multiplication, independent of lgamma.
std::vector<long double> binomial_weights(int n) {
    std::vector<long double> w(n + 1);
    long double c = 1.0L;
    for (int k = 0; k <= n; ++k) {
        w[k] = c;
        c = c * (n - k) / (k + 1);
    }
    for (auto& x : w) x = std::ldexp(x, -n);
    return w;
}

}  // namespace

TEST_CASE("coherent_state amplitudes") {
    const SpinState two = coherent_state(2);
    CHECK(two[0].real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(two[1].real() == doctest::Approx(0.7071067811865476).epsilon(1e-15));
    CHECK(two[2].real() == doctest::Approx(0.5).epsilon(1e-15));

    const SpinState one = coherent_state(1);
    CHECK(std::abs(one[0] - cplx(1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::abs(one[1] - cplx(1.0 / std::sqrt(2.0))) < 1e-15);

    for (int n : {1, 3, 10, 50, 100, 400}) {
        const SpinState cs = coherent_state(n);
        CHECK(std::abs(cs.norm() - 1.0) < 1e-12);
        for (int i = 0; i <= n; ++i) {
            CHECK(cs[i].imag() == 0.0);
            CHECK(cs[i].real() > 0.0);
        }
    }
    for (int n : {5, 20, 60}) {
        const auto w = binomial_weights(n);
        const SpinState cs = coherent_state(n);
        for (int i = 0; i <= n; ++i)
            CHECK(std::abs(cs[i].real() - static_cast<double>(std::sqrt(w[i]))) < 1e-14);
    }
    CHECK_THROWS_AS(coherent_state(0), InvalidArgument);
}

TEST_CASE("coherent_state moments for N = 50") {
    const auto w = binomial_weights(50);
    long double mean = 0.0L, second = 0.0L;
    for (int k = 0; k <= 50; ++k) {
        const long double m = 25 - k;
        mean += m * w[k];
        second += m * m * w[k];
    }
    CHECK(std::abs(static_cast<double>(mean)) < 1e-15);
    CHECK(std::abs(static_cast<double>(second) - 12.5) < 1e-13);

    const SpinState cs = coherent_state(50);
    const DickeBasis& b = cs.basis();
    const double jz = expectation(build_operator(b, OperatorLabel::Jz), cs).real();
    const CVector jz_cs = apply(build_operator(b, OperatorLabel::Jz), cs);
    CHECK(std::abs(jz) < 1e-12);
    CHECK(std::abs(jz_cs.squaredNorm() - jz * jz - 12.5) < 1e-10);
}

TEST_CASE("coherent_state equals a quarter turn of the pole state about y") {
    for (int n : {1, 2, 7, 30}) {
        const DickeBasis b(n);
        const SpinState turned = rotate(SpinState::dicke(b, b.total_spin()), Axis::Y, 0.5 * std::numbers::pi);
        const double overlap = std::abs(coherent_state(n).amplitudes().dot(turned.amplitudes()));
        CHECK(overlap == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("oat_evolve") {
    const SpinState cs = coherent_state(8);
    CHECK(max_abs(oat_evolve(cs, 0.0).amplitudes() - cs.amplitudes()) == 0.0);

    const double chi = 0.23;
    const SpinState tw = oat_evolve(cs, chi);
    const int i2 = cs.basis().index_of(2.0), i1 = cs.basis().index_of(1.0);
    const double dphi = std::arg(tw[i2] / cs[i2]) - std::arg(tw[i1] / cs[i1]);
    CHECK(std::remainder(dphi + 3.0 * chi, 2.0 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-14));

    // Elementwise oracle for N = 6.
    const SpinState s = random_state(DickeBasis(6), 6);
    const double c = 0.77;
    const SpinState out = oat_evolve(s, c);
    for (int i = 0; i <= 6; ++i) {
        const double m = 3.0 - i;
        const cplx expected = cplx(std::cos(c * m * m), -std::sin(c * m * m)) * s[i];
        CHECK(std::abs(out[i] - expected) <= 1e-14);
    }
    CHECK_THROWS_AS(oat_evolve(cs, NAN), InvalidArgument);
}

TEST_CASE("oat_evolve commutes with z rotations and keeps purity") {
    for (int seed = 0; seed < 10; ++seed) {
        const SpinState s = random_state(DickeBasis(3 + 4 * seed), seed);
        const double phi = 0.3 * seed - 1.0;
        const double chi = 0.05 * seed;
        const SpinState a = oat_evolve(rotate(s, Axis::Z, phi), chi);
        const SpinState b = rotate(oat_evolve(s, chi), Axis::Z, phi);
        CHECK(max_abs(a.amplitudes() - b.amplitudes()) <= 1e-12);

        const SpinState mixed = rotate(oat_evolve(rotate(s, Axis::X, 0.4), chi), Axis::Y, -1.1);
        CHECK(std::abs(mixed.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("squeezing_xi of coherent states is 1") {
    for (int n : {1, 2, 3, 10, 50, 101}) {
        CHECK(std::abs(squeezing_xi(coherent_state(n)) - 1.0) < 1e-9);
        const DickeBasis b(n);
        const SpinState pole = SpinState::dicke(b, b.total_spin());
        CHECK(std::abs(squeezing_xi(pole) - 1.0) < 1e-9);
        const SpinState tilted = rotate(rotate(pole, Axis::X, 0.7), Axis::Z, 2.1);
        CHECK(std::abs(squeezing_xi(tilted) - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(squeezing_xi(SpinState::dicke(DickeBasis(4), 0.0)), DegenerateDirection);
}

TEST_CASE("squeezing_xi matches the closed form for twisted coherent states") {
    for (int n : {2, 4, 10, 50, 100}) {
        for (double chi : {0.001, 0.01, 0.05, 0.1, 0.2, 0.3}) {
            const double xi = squeezing_xi(oat_evolve(coherent_state(n), chi));
            CHECK(xi == doctest::Approx(oat_xi_closed_form(n, chi)).epsilon(1e-9));
        }
    }
    // Frozen from the closed form above.
    CHECK(squeezing_xi(oat_evolve(coherent_state(50), 0.05)) ==
          doctest::Approx(0.35908349979834).epsilon(1e-11));
}

TEST_CASE("twisting squeezes immediately for N >= 4") {
    for (int n = 4; n <= 40; n += 3) {
        for (double chi : linspace(1e-3, 0.05, 25)) {
            CHECK(squeezing_xi(oat_evolve(coherent_state(n), chi)) < 1.0);
        }
    }
}

TEST_CASE("squeezing_db") {
    CHECK(squeezing_db(2.0, 2.0) == 0.0);
    CHECK(squeezing_db(0.5, 1.0) == doctest::Approx(-3.0103).epsilon(1e-5));
    CHECK(std::abs(squeezing_db(0.4571, 1.0) + 3.40) <= 0.01);
    CHECK_THROWS_AS(squeezing_db(0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(squeezing_db(1.0, -1.0), InvalidArgument);
    CHECK_THROWS_AS(squeezing_db(NAN, 1.0), InvalidArgument);
}

TEST_CASE("overlap_grid") {
    const SpinState cs = coherent_state(50);
    const auto axis = linspace(-0.6, 0.6, 41);

    SUBCASE("self overlap and peak location") {
        const OverlapGrid g = overlap_grid(cs, {0.0}, {0.0});
        CHECK(g.at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

        const OverlapGrid full = overlap_grid(cs, axis, axis);
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < axis.size(); ++i)
            for (std::size_t j = 0; j < axis.size(); ++j)
                if (full.at(i, j) > full.at(bi, bj)) bi = i, bj = j;
        CHECK(axis[bi] == 0.0);
        CHECK(axis[bj] == 0.0);
    }
    SUBCASE("bounded, and symmetric in phi without twisting") {
        const OverlapGrid g = overlap_grid(cs, axis, axis);
        for (double p : g.probabilities) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
        const std::size_t n = axis.size();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(g.at(i, j) - g.at(i, n - 1 - j)) <= 1e-10);
    }
    SUBCASE("theta tilts toward the pole") {
        // Overlap of two coherent states separated by angle theta is cos^{2N}(theta/2).
        for (double theta : {0.1, 0.3, 0.5}) {
            const OverlapGrid g = overlap_grid(cs, {theta}, {0.0});
            CHECK(g.at(0, 0) == doctest::Approx(std::pow(std::cos(0.5 * theta), 100)).epsilon(1e-10));
            const OverlapGrid h = overlap_grid(cs, {0.0}, {theta});
            CHECK(h.at(0, 0) == doctest::Approx(std::pow(std::cos(0.5 * theta), 100)).epsilon(1e-10));
        }
    }
    SUBCASE("twisting shears the half-maximum region") {
        const auto fine = linspace(-0.8, 0.8, 81);
        const GridShape round = half_max_shape(overlap_grid(cs, fine, fine));
        const GridShape sheared = half_max_shape(overlap_grid(oat_evolve(cs, 0.1), fine, fine));
        CHECK(std::abs(round.correlation) < 1e-10);
        CHECK(std::abs(sheared.correlation) > 0.5);
        CHECK(std::abs(std::sin(2.0 * sheared.tilt)) > 0.2);
    }
    CHECK_THROWS_AS(overlap_grid(cs, {}, axis), InvalidArgument);
    CHECK_THROWS_AS(overlap_grid(cs, axis, {}), InvalidArgument);
}

TEST_CASE("xi_sweep") {
    SUBCASE("single zero point") {
        const SweepResult r = xi_sweep(20, {0.0});
        REQUIRE(r.rows.size() == 1);
        CHECK(r.columns == std::vector<std::string>{"chi_t", "xi", "bloch_length"});
        CHECK(std::abs(r.rows[0][1] - 1.0) < 1e-9);
        CHECK(r.rows[0][2] == doctest::Approx(10.0));
    }
    SUBCASE("Bloch vector shortens monotonically") {
        const SweepResult r = xi_sweep(50, linspace(0.0, 0.3, 301));
        const auto len = r.column("bloch_length");
        const auto chi = r.column("chi_t");
        for (std::size_t k = 1; k < len.size(); ++k) CHECK(len[k] < len[k - 1]);
        for (std::size_t k = 0; k < len.size(); ++k)
            CHECK(len[k] == doctest::Approx(oat_bloch_length(50, chi[k])).epsilon(1e-10));
        CHECK(len[100] < len[0]);
    }
    SUBCASE("single spin cannot be squeezed") {
        const SweepResult r = xi_sweep(1, linspace(0.0, 0.5, 51));
        for (double x : r.column("xi")) CHECK(std::abs(x - 1.0) < 1e-9);
    }
    CHECK_THROWS_AS(xi_sweep(10, {}), InvalidArgument);
    CHECK_THROWS_AS(xi_sweep(10, {0.1, -0.2}), InvalidArgument);
}

TEST_CASE("find_min_xi") {
    const XiMinimum m50 = find_min_xi(50);
    CHECK(m50.xi == doctest::Approx(0.2739341).epsilon(1e-6));
    CHECK(m50.chi_t == doctest::Approx(0.0861).epsilon(1e-2));
    // Refinement lands on the closed-form minimum to within the tolerance.
    CHECK(m50.xi <= oat_xi_closed_form(50, m50.chi_t) + 1e-9);
    CHECK(oat_xi_closed_form(50, m50.chi_t - 1e-4) > m50.xi);
    CHECK(oat_xi_closed_form(50, m50.chi_t + 1e-4) > m50.xi);

    const double m10 = find_min_xi(10).xi;
    const double m100 = find_min_xi(100).xi;
    CHECK(m10 > m50.xi);
    CHECK(m50.xi > m100);
    CHECK_THROWS_AS(find_min_xi(10, -1.0), InvalidArgument);
}
