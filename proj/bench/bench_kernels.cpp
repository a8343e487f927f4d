// Times the GEMM/OpenMP kernels against the plain-loop reference
// implementations on matched inputs.

#include "symdisc/rng.hpp"
#include "symdisc/selection.hpp"
#include "symdisc/serial.hpp"
#include "symdisc/spectral.hpp"

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

double time_of(const std::function<void()>& fn, int reps) {
    // One warm-up, then the best of `reps`.
    fn();
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s < best) best = s;
    }
    return best;
}

}  // namespace

int main() {
    using namespace symdisc;
    Rng rng(42);

    std::printf("%-24s %10s %10s %8s\n", "kernel", "optimized", "serial", "speedup");
    for (const Index n : {256L, 1024L, 4096L}) {
        const Index d = 10;
        Matrix Xa(n, d), Xb(n, d);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j) {
                Xa(i, j) = rng.normal();
                Xb(i, j) = rng.normal();
            }
        const KernelSpec kernel = KernelSpec::spherical(3.0);
        volatile double sink = 0;

        const double opt = time_of([&] { sink = mmd2(Xa, Xb, kernel); }, 3);
        const double ser = time_of([&] { sink = serial::mmd2(Xa, Xb, kernel); }, 3);
        std::printf("%-18s n=%-5ld %9.2fms %9.2fms %7.2fx\n", "mmd2", static_cast<long>(n),
                    opt * 1e3, ser * 1e3, ser / opt);
        (void)sink;
    }

    for (const Index n : {10000L, 100000L}) {
        const Index d = 10;
        Matrix X(n, d);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < d; ++j) X(i, j) = rng.normal();
        volatile double sink = 0;
        const double opt = time_of([&] { sink = moments(X).second(0, 0); }, 3);
        const double ser = time_of([&] { sink = serial::moments(X).second(0, 0); }, 3);
        std::printf("%-18s n=%-5ld %9.2fms %9.2fms %7.2fx\n", "moments", static_cast<long>(n),
                    opt * 1e3, ser * 1e3, ser / opt);
        (void)sink;
    }
    return 0;
}
