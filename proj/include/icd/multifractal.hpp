#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icd/scaling.hpp"

namespace icd {

struct MfdfaOptions {
    // a segment is excluded when its residual variance falls below this
    // fraction of the series variance; more than 1% exclusions flags the result
    double degenerate_rel_var = 1e-12;
    double min_fit_r2 = 0.95;
    double max_excluded_fraction = 0.01;
};

std::vector<double> default_q_grid(double q_min = -4.0, double q_max = 4.0, double step = 0.25);

// q-th order fluctuation at a single scale (strict form: every segment
// enters; zero-variance segments raise an error for q <= 0, and an all-zero
// scale is degenerate for any q). q = 0 uses the log-average form.
double fluctuation_function(std::span<const double> series, int s, double q);

struct MultifractalResult {
    std::vector<double> q_grid;
    std::vector<double> h;             // generalized Hurst exponents
    std::vector<double> tau;           // q*h(q) - 1
    std::vector<double> alpha;         // finite-difference d tau / d q
    std::vector<double> f_alpha;       // q*alpha - tau
    std::vector<double> per_q_fit_r2;
    double delta_alpha = 0.0;          // max(alpha) - min(alpha)
    std::vector<int> scales;
    std::vector<double> log10_fq;      // row-major [q][scale], for plot dumps
    std::vector<std::string> flags;

    bool flagged() const { return !flags.empty(); }
};

MultifractalResult mfdfa(std::span<const double> series, std::span<const double> q_grid,
                         std::span<const int> scales, const MfdfaOptions& opts = {});

// Spectrum width of permuted copies, plus the residual R = width - mean
// shuffled width. Replicate k is driven by Rng(base_seed, k).
ShuffleReport width_shuffle_test(std::span<const double> series,
                                 std::span<const double> q_grid, std::span<const int> scales,
                                 int n_replicates, uint64_t base_seed,
                                 const MfdfaOptions& opts = {});

// Same, with the default q grid and the default DFA scale grid.
ShuffleReport width_shuffle_test(std::span<const double> series, int n_replicates = 100,
                                 uint64_t base_seed = 0, const MfdfaOptions& opts = {});

}  // namespace icd
