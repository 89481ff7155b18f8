// Benchmark: serial reference vs OpenMP energy-grid determinant scan on the
// bundled confinement problem, with a bitwise agreement check.

#include <chrono>
#include <cstdio>
#include <vector>

#include "fv/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace fv;
using namespace fv::fvcore;
using namespace fv::potentials;

int main(int argc, char** argv) {
    int points = argc > 1 ? std::atoi(argv[1]) : 64;
    PhysicalSystem sys;
    PotentialModel model({PotentialTerm::coulomb(-1.0)}, {PotentialTerm::linear(1.0)},
                         ScalarMeaning::effective_u);
    FVProblem problem = make_problem(sys, ChannelSpace::fv0(0), model, 0.5, 60);

    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i) grid[i] = 0.1 + 7.4 * i / (points - 1.0);
    std::size_t depth = default_tail_depth(problem);

    auto t0 = std::chrono::steady_clock::now();
    auto serial = solver::scan_determinants(problem, grid, depth, 1);
    double t_serial =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    t0 = std::chrono::steady_clock::now();
    auto parallel = solver::scan_determinants(problem, grid, depth, 0);
    double t_parallel =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    double max_diff = 0.0;
    bool identical = true;
    for (int i = 0; i < points; ++i) {
        if (serial[i].mantissa != parallel[i].mantissa ||
            serial[i].exponent2 != parallel[i].exponent2)
            identical = false;
        max_diff = std::max(max_diff, std::abs(serial[i].mantissa - parallel[i].mantissa));
    }

    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    std::printf("grid points:        %d (tail depth %zu, dim %d)\n", points, depth,
                problem.dim());
    std::printf("serial scan:        %.3f s\n", t_serial);
    std::printf("parallel scan (%d): %.3f s\n", nthreads, t_parallel);
    std::printf("speedup:            %.2fx\n", t_serial / t_parallel);
    std::printf("bitwise identical:  %s (max mantissa diff %.3g)\n", identical ? "yes" : "no",
                max_diff);
    return identical ? 0 : 1;
}
