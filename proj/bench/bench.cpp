// Timing comparison between the OpenMP kernels and the serial reference
// implementations, plus an agreement check. Usage: icd_bench [length_pow2].

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "icd/fluctuation.hpp"
#include "icd/multifractal.hpp"
#include "icd/reference.hpp"
#include "icd/scaling.hpp"
#include "icd/synth.hpp"

using namespace icd;
namespace chrono = std::chrono;

namespace {

double ms_since(chrono::steady_clock::time_point t0) {
    return chrono::duration<double, std::milli>(chrono::steady_clock::now() - t0).count();
}

struct Row {
    const char* kernel;
    double serial_ms;
    double parallel_ms;
    double max_rel_diff;
};

void print(const Row& row) {
    std::printf("%-18s %10.1f ms %10.1f ms %8.2fx   max rel diff %.2e\n", row.kernel,
                row.serial_ms, row.parallel_ms, row.serial_ms / row.parallel_ms,
                row.max_rel_diff);
}

}  // namespace

int main(int argc, char** argv) {
    int pow2 = 18;
    if (argc > 1) pow2 = std::stoi(argv[1]);
    const size_t n = size_t{1} << pow2;

    GeneratorSpec spec;
    spec.kind = GeneratorKind::FGN;
    spec.hurst = 0.76;
    spec.length = n;
    spec.seed = 7;
    const std::vector<double> series = gen_fgn(spec);

#ifdef _OPENMP
    std::printf("series length 2^%d = %zu, omp threads %d\n\n", pow2, n, omp_get_max_threads());
#else
    std::printf("series length 2^%d = %zu, built without OpenMP\n\n", pow2, n);
#endif
    std::printf("%-18s %13s %13s %9s\n", "kernel", "serial ref", "library", "speedup");

    const auto dfa_scales = default_scales(n, ScalingMethod::DFA);
    const auto cdma_scales = default_scales(n, ScalingMethod::CDMA);

    {
        auto t0 = chrono::steady_clock::now();
        std::vector<double> ref_f;
        for (int s : dfa_scales) ref_f.push_back(ref::dfa_fluctuation(series, s));
        const double serial = ms_since(t0);

        t0 = chrono::steady_clock::now();
        const ScalingResult res = dfa(series, dfa_scales);
        const double parallel = ms_since(t0);

        double worst = 0.0;
        for (size_t i = 0; i < ref_f.size(); ++i)
            worst = std::max(worst, std::fabs(res.fluctuations[i] - ref_f[i]) / ref_f[i]);
        print({"dfa", serial, parallel, worst});
    }
    {
        auto t0 = chrono::steady_clock::now();
        std::vector<double> ref_f;
        for (int s : cdma_scales) ref_f.push_back(ref::cdma_fluctuation(series, s));
        const double serial = ms_since(t0);

        t0 = chrono::steady_clock::now();
        const ScalingResult res = cdma(series, cdma_scales);
        const double parallel = ms_since(t0);

        double worst = 0.0;
        for (size_t i = 0; i < ref_f.size(); ++i)
            worst = std::max(worst, std::fabs(res.fluctuations[i] - ref_f[i]) / ref_f[i]);
        print({"cdma", serial, parallel, worst});
    }
    {
        const auto grid = default_q_grid();
        auto t0 = chrono::steady_clock::now();
        double ref_acc = 0.0;
        for (double q : {-4.0, -2.0, 0.0, 2.0, 4.0})
            for (int s : dfa_scales) ref_acc += ref::fluctuation_function(series, s, q);
        const double serial = ms_since(t0);

        t0 = chrono::steady_clock::now();
        const MultifractalResult res = mfdfa(series, grid, dfa_scales);
        const double parallel = ms_since(t0);

        double lib_acc = 0.0;
        const size_t nsc = dfa_scales.size();
        for (double q : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
            size_t iq = 0;
            for (size_t i = 0; i < grid.size(); ++i)
                if (std::fabs(grid[i] - q) < 1e-9) iq = i;
            for (size_t k = 0; k < nsc; ++k)
                lib_acc += std::pow(10.0, res.log10_fq[iq * nsc + k]);
        }
        print({"mfdfa (5 q, ref)", serial, parallel,
               std::fabs(lib_acc - ref_acc) / ref_acc});
    }
    {
        const int reps = 16;
        std::vector<double> serial_vals, parallel_vals;
#ifdef _OPENMP
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        auto t0 = chrono::steady_clock::now();
        serial_vals = shuffle_test(series, ShuffleEstimator::DFA, reps, 3).values;
        const double serial = ms_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        t0 = chrono::steady_clock::now();
        parallel_vals = shuffle_test(series, ShuffleEstimator::DFA, reps, 3).values;
        const double parallel = ms_since(t0);

        double worst = 0.0;
        for (size_t i = 0; i < serial_vals.size(); ++i)
            worst = std::max(worst, std::fabs(serial_vals[i] - parallel_vals[i]));
        std::printf("%-18s %10.1f ms %10.1f ms %8.2fx   bitwise diff %.1e\n", "shuffle x16",
                    serial, parallel, serial / parallel, worst);
    }
    return 0;
}
