#include "icd/multifractal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icd/fluctuation.hpp"
#include "icd/rng.hpp"

namespace icd {

std::vector<double> default_q_grid(double q_min, double q_max, double step) {
    if (!(step > 0.0) || !(q_max > q_min)) throw std::invalid_argument("bad q grid");
    std::vector<double> grid;
    const int n = static_cast<int>(std::lround((q_max - q_min) / step));
    for (int i = 0; i <= n; ++i) {
        double q = q_min + i * step;
        if (std::fabs(q) < 1e-12) q = 0.0;
        grid.push_back(q);
    }
    return grid;
}

namespace {

double aggregate(std::span<const double> segs, double q) {
    const auto n = static_cast<double>(segs.size());
    if (q == 0.0) {
        double acc = 0.0;
        for (double f : segs) acc += std::log(f);
        return std::exp(acc / n);
    }
    double acc = 0.0;
    for (double f : segs) acc += std::pow(f, q);
    return std::pow(acc / n, 1.0 / q);
}

bool grid_contains(std::span<const double> grid, double q) {
    for (double g : grid)
        if (std::fabs(g - q) < 1e-9) return true;
    return false;
}

double series_variance(std::span<const double> series) {
    double mean = 0.0;
    for (double x : series) mean += x;
    mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (double x : series) var += (x - mean) * (x - mean);
    return var / static_cast<double>(series.size());
}

}  // namespace

double fluctuation_function(std::span<const double> series, int s, double q) {
    if (series.size() < 60) throw std::invalid_argument("fluctuation_function: series too short");
    if (s < 10 || static_cast<size_t>(s) > series.size() / 6)
        throw std::invalid_argument("fluctuation_function: scale out of range");

    std::vector<double> prof = profile(series);
    remove_ramp(prof);
    const auto segs = segment_fluctuations(prof, s);

    bool any_zero = false, all_zero = true;
    for (double f : segs) {
        if (f == 0.0) any_zero = true;
        else all_zero = false;
    }
    if (all_zero || (any_zero && q <= 0.0))
        throw std::runtime_error("fluctuation_function: degenerate segment");
    return aggregate(segs, q);
}

MultifractalResult mfdfa(std::span<const double> series, std::span<const double> q_grid,
                         std::span<const int> scales, const MfdfaOptions& opts) {
    if (series.size() < 600) throw std::invalid_argument("mfdfa: series shorter than 600");
    if (q_grid.size() < 3) throw std::invalid_argument("mfdfa: q grid too small");
    for (size_t i = 1; i < q_grid.size(); ++i)
        if (!(q_grid[i] > q_grid[i - 1]))
            throw std::invalid_argument("mfdfa: q grid must be strictly increasing");
    if (!grid_contains(q_grid, -4.0) || !grid_contains(q_grid, 0.0) || !grid_contains(q_grid, 4.0))
        throw std::invalid_argument("mfdfa: q grid must include -4, 0 and 4");
    if (scales.size() < 3) throw std::invalid_argument("mfdfa: need at least 3 scales");
    for (size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] < 10 || static_cast<size_t>(scales[i]) > series.size() / 6)
            throw std::invalid_argument("mfdfa: scale out of range");
        if (i > 0 && scales[i] <= scales[i - 1])
            throw std::invalid_argument("mfdfa: scales must be strictly increasing");
    }

    const double var = series_variance(series);
    if (!(var > 0.0)) throw std::runtime_error("mfdfa: constant series");
    const double threshold = opts.degenerate_rel_var * var;

    std::vector<double> prof = profile(series);
    remove_ramp(prof);

    MultifractalResult res;
    res.q_grid.assign(q_grid.begin(), q_grid.end());
    res.scales.assign(scales.begin(), scales.end());

    const size_t nq = q_grid.size();
    const size_t nsc = scales.size();
    res.log10_fq.resize(nq * nsc);
    std::vector<double>& log_fq = res.log10_fq;
    size_t excluded_total = 0, segments_total = 0;

    for (size_t k = 0; k < nsc; ++k) {
        auto segs = segment_fluctuations(prof, scales[k]);
        segments_total += segs.size();
        std::vector<double> usable;
        usable.reserve(segs.size());
        for (double f : segs) {
            if (f * f < threshold) ++excluded_total;
            else usable.push_back(f);
        }
        if (usable.empty()) throw std::runtime_error("mfdfa: all segments degenerate");
        for (size_t iq = 0; iq < nq; ++iq)
            log_fq[iq * nsc + k] = std::log10(aggregate(usable, q_grid[iq]));
    }

    const double excluded_fraction =
        static_cast<double>(excluded_total) / static_cast<double>(segments_total);
    if (excluded_fraction > opts.max_excluded_fraction)
        res.flags.push_back("excluded_segments=" + std::to_string(excluded_fraction));

    res.h.resize(nq);
    res.tau.resize(nq);
    res.per_q_fit_r2.resize(nq);
    std::vector<double> lx(nsc);
    for (size_t k = 0; k < nsc; ++k) lx[k] = std::log10(static_cast<double>(scales[k]));
    double mx = 0.0;
    for (double x : lx) mx += x;
    mx /= static_cast<double>(nsc);

    size_t low_r2 = 0;
    for (size_t iq = 0; iq < nq; ++iq) {
        double my = 0.0;
        for (size_t k = 0; k < nsc; ++k) my += log_fq[iq * nsc + k];
        my /= static_cast<double>(nsc);
        double sxx = 0.0, sxy = 0.0, syy = 0.0;
        for (size_t k = 0; k < nsc; ++k) {
            const double dx = lx[k] - mx;
            const double dy = log_fq[iq * nsc + k] - my;
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
        }
        const double slope = sxy / sxx;
        double sse = 0.0;
        for (size_t k = 0; k < nsc; ++k) {
            const double r = (log_fq[iq * nsc + k] - my) - slope * (lx[k] - mx);
            sse += r * r;
        }
        res.h[iq] = slope;
        res.tau[iq] = q_grid[iq] * slope - 1.0;
        res.per_q_fit_r2[iq] = syy > 0.0 ? 1.0 - sse / syy : 1.0;
        if (res.per_q_fit_r2[iq] < opts.min_fit_r2) ++low_r2;
    }
    if (low_r2 > 0) res.flags.push_back("low_fit_r2_count=" + std::to_string(low_r2));

    for (size_t iq = 1; iq < nq; ++iq) {
        if (res.h[iq] > res.h[iq - 1] + 0.01) {
            res.flags.push_back("h_not_nonincreasing");
            break;
        }
    }

    // singularity strength by central differences, one-sided at the ends
    res.alpha.resize(nq);
    res.f_alpha.resize(nq);
    for (size_t iq = 0; iq < nq; ++iq) {
        const size_t lo = iq == 0 ? 0 : iq - 1;
        const size_t hi = iq == nq - 1 ? nq - 1 : iq + 1;
        res.alpha[iq] = (res.tau[hi] - res.tau[lo]) / (q_grid[hi] - q_grid[lo]);
        res.f_alpha[iq] = q_grid[iq] * res.alpha[iq] - res.tau[iq];
    }
    const auto [amin, amax] = std::minmax_element(res.alpha.begin(), res.alpha.end());
    res.delta_alpha = *amax - *amin;
    return res;
}

ShuffleReport width_shuffle_test(std::span<const double> series,
                                 std::span<const double> q_grid, std::span<const int> scales,
                                 int n_replicates, uint64_t base_seed,
                                 const MfdfaOptions& opts) {
    if (n_replicates < 1) throw std::invalid_argument("width_shuffle_test: need >= 1 replicate");
    const std::vector<double> grid(q_grid.begin(), q_grid.end());
    const std::vector<int> scale_grid(scales.begin(), scales.end());

    const MultifractalResult original = mfdfa(series, grid, scale_grid, opts);

    ShuffleReport rep;
    rep.estimator = ShuffleEstimator::MFDFA_WIDTH;
    rep.n_replicates = n_replicates;
    rep.base_seed = base_seed;
    rep.values.assign(static_cast<size_t>(n_replicates), 0.0);

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_replicates; ++k) {
        try {
            std::vector<double> copy(series.begin(), series.end());
            Rng rng(base_seed, static_cast<uint64_t>(k));
            shuffle_in_place(std::span<double>(copy), rng);
            rep.values[static_cast<size_t>(k)] = mfdfa(copy, grid, scale_grid, opts).delta_alpha;
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    double mean = 0.0;
    for (double v : rep.values) mean += v;
    mean /= static_cast<double>(rep.values.size());
    double varacc = 0.0;
    for (double v : rep.values) varacc += (v - mean) * (v - mean);
    rep.mean = mean;
    rep.stddev = rep.values.size() > 1
                     ? std::sqrt(varacc / (static_cast<double>(rep.values.size()) - 1.0))
                     : 0.0;
    rep.residual = original.delta_alpha - mean;
    return rep;
}

ShuffleReport width_shuffle_test(std::span<const double> series, int n_replicates,
                                 uint64_t base_seed, const MfdfaOptions& opts) {
    const std::vector<double> grid = default_q_grid();
    const std::vector<int> scales = default_scales(series.size(), ScalingMethod::DFA);
    return width_shuffle_test(series, grid, scales, n_replicates, base_seed, opts);
}

}  // namespace icd
