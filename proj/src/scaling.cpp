#include "icd/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icd/fluctuation.hpp"
#include "icd/rng.hpp"

namespace icd {

const char* to_token(ScalingMethod m) { return m == ScalingMethod::DFA ? "dfa" : "cdma"; }

const char* to_token(ShuffleEstimator e) {
    switch (e) {
        case ShuffleEstimator::DFA: return "dfa";
        case ShuffleEstimator::CDMA: return "cdma";
        default: return "mfdfa_width";
    }
}

std::vector<int> default_scales(size_t n, ScalingMethod method, int count) {
    const int s_min = method == ScalingMethod::DFA ? 10 : 11;
    const int s_max = static_cast<int>(n / 6);
    if (s_max < s_min) throw std::invalid_argument("default_scales: series too short");
    if (count < 2) throw std::invalid_argument("default_scales: need at least 2 scales");

    std::vector<int> scales;
    const double l0 = std::log(static_cast<double>(s_min));
    const double l1 = std::log(static_cast<double>(s_max));
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        int s = static_cast<int>(std::lround(std::exp(l0 + t * (l1 - l0))));
        s = std::clamp(s, s_min, s_max);
        if (method == ScalingMethod::CDMA && s % 2 == 0) {
            s = s + 1 <= s_max ? s + 1 : s - 1;
        }
        if (scales.empty() || s > scales.back()) scales.push_back(s);
    }
    return scales;
}

namespace {

void validate_scales(std::span<const double> series, std::span<const int> scales, bool odd_only) {
    if (series.size() < 60) throw std::invalid_argument("scaling: series shorter than 60");
    if (scales.size() < 3) throw std::invalid_argument("scaling: need at least 3 scales");
    const int s_min = odd_only ? 11 : 10;
    const int s_max = static_cast<int>(series.size() / 6);
    int prev = 0;
    for (int s : scales) {
        if (s < s_min || s > s_max) throw std::invalid_argument("scaling: scale out of range");
        if (s <= prev) throw std::invalid_argument("scaling: scales must be strictly increasing");
        if (odd_only && s % 2 == 0) throw std::invalid_argument("cdma: scales must be odd");
        prev = s;
    }
}

ScalingResult finish(ScalingMethod method, std::vector<int> scales,
                     std::vector<double> fluctuations) {
    ScalingResult res;
    res.method = method;
    res.scales = std::move(scales);
    res.fluctuations = std::move(fluctuations);
    for (double f : res.fluctuations)
        if (!(f > 0.0)) throw std::runtime_error("scaling: zero fluctuation (degenerate series)");
    const LogLogFit fit = fit_loglog(res.scales, res.fluctuations);
    res.hurst = fit.slope;
    res.slope_se = fit.slope_se;
    res.r_squared = fit.r_squared;
    res.fit_range = {res.scales.front(), res.scales.back()};
    res.reliable = fit.r_squared >= 0.98;
    return res;
}

}  // namespace

ScalingResult dfa(std::span<const double> series, std::span<const int> scales) {
    validate_scales(series, scales, false);
    std::vector<double> prof = profile(series);
    remove_ramp(prof);

    std::vector<double> fs(scales.size());
    for (size_t k = 0; k < scales.size(); ++k) {
        const auto segs = segment_fluctuations(prof, scales[k]);
        double acc = 0.0;
        for (double f : segs) acc += f * f;
        fs[k] = std::sqrt(acc / static_cast<double>(segs.size()));
    }
    return finish(ScalingMethod::DFA, {scales.begin(), scales.end()}, std::move(fs));
}

ScalingResult cdma(std::span<const double> series, std::span<const int> scales) {
    validate_scales(series, scales, true);
    std::vector<double> prof = profile(series);
    remove_ramp(prof);
    const size_t n = prof.size();

    // exclusive prefix sums of the conditioned profile
    std::vector<double> pre(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] + prof[i];

    std::vector<double> fs(scales.size());
    for (size_t k = 0; k < scales.size(); ++k) {
        const int s = scales[k];
        const size_t h = static_cast<size_t>(s - 1) / 2;
        const size_t first = h, last = n - h;  // [first, last): full windows only
        const size_t m = last - first;

        // fixed-size blocks keep the summation order independent of threads
        constexpr size_t kBlock = 8192;
        const size_t nblocks = (m + kBlock - 1) / kBlock;
        std::vector<double> partial(nblocks, 0.0);
        const auto nb = static_cast<ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
        for (ptrdiff_t blk = 0; blk < nb; ++blk) {
            const size_t lo = first + static_cast<size_t>(blk) * kBlock;
            const size_t hi = std::min(lo + kBlock, last);
            double acc = 0.0;
            for (size_t i = lo; i < hi; ++i) {
                const double ma = (pre[i + h + 1] - pre[i - h]) / s;
                const double e = prof[i] - ma;
                acc += e * e;
            }
            partial[static_cast<size_t>(blk)] = acc;
        }
        double rss = 0.0;
        for (double p : partial) rss += p;
        fs[k] = std::sqrt(rss / static_cast<double>(m));
    }
    return finish(ScalingMethod::CDMA, {scales.begin(), scales.end()}, std::move(fs));
}

ShuffleReport shuffle_test(std::span<const double> series, ShuffleEstimator estimator,
                           int n_replicates, uint64_t base_seed) {
    if (estimator == ShuffleEstimator::MFDFA_WIDTH)
        throw std::invalid_argument("shuffle_test: use width_shuffle_test for MFDFA_WIDTH");
    if (n_replicates < 1) throw std::invalid_argument("shuffle_test: need >= 1 replicate");

    const ScalingMethod method =
        estimator == ShuffleEstimator::DFA ? ScalingMethod::DFA : ScalingMethod::CDMA;
    const std::vector<int> scales = default_scales(series.size(), method);

    ShuffleReport rep;
    rep.estimator = estimator;
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
            const ScalingResult r =
                method == ScalingMethod::DFA ? dfa(copy, scales) : cdma(copy, scales);
            rep.values[static_cast<size_t>(k)] = r.hurst;
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    double mean = 0.0;
    for (double v : rep.values) mean += v;
    mean /= static_cast<double>(rep.values.size());
    double var = 0.0;
    for (double v : rep.values) var += (v - mean) * (v - mean);
    rep.mean = mean;
    rep.stddev = rep.values.size() > 1
                     ? std::sqrt(var / (static_cast<double>(rep.values.size()) - 1.0))
                     : 0.0;
    return rep;
}

}  // namespace icd
