// Wall-clock comparison of the OpenMP kernels against their serial
// references. Usage: bench_parallel [repeats]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "squeeze/spinboson.hpp"
#include "squeeze/squeezing.hpp"

using namespace squeeze;

namespace {

double best_of(int repeats, const std::function<void()>& f) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void row(const char* name, int repeats, const std::function<void()>& par, const std::function<void()>& ser) {
    const double tp = best_of(repeats, par);
    const double ts = best_of(repeats, ser);
    std::printf("%-34s %10.4f %10.4f %8.2fx\n", name, ts, tp, ts / tp);
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
    std::printf("threads: %d, best of %d\n", omp_get_max_threads(), repeats);
    std::printf("%-34s %10s %10s %9s\n", "kernel", "serial s", "openmp s", "speedup");

    const SpinState sq = oat_evolve(coherent_state(100), 0.05);
    const auto th = linspace(-0.8, 0.8, 121), ph = linspace(-0.8, 0.8, 121);
    row("overlap_grid N=100 121x121", repeats, [&] { overlap_grid(sq, th, ph); },
        [&] { serial::overlap_grid(sq, th, ph); });

    const auto chis = linspace(0.0, 0.3, 2001);
    row("xi_sweep N=200 2001 points", repeats, [&] { xi_sweep(200, chis); },
        [&] { serial::xi_sweep(200, chis); });

    const GateParams p = make_gate_params(0.05, 20, 5);
    const JointState init = JointState::ground(p.n_max, coherent_state(20));
    EvolveOptions opts;
    opts.sample_count = 5 * 64;
    row("evolve_numeric N=20 5 loops", repeats, [&] { evolve_numeric(p, init, p.gate_time(), opts); },
        [&] { serial::evolve_numeric(p, init, p.gate_time(), opts); });
}
