#include "icd/fluctuation.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace icd {

std::vector<double> profile(std::span<const double> series) {
    std::vector<double> prof(series.size());
    double acc = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        prof[i] = acc;
    }
    return prof;
}

void remove_ramp(std::span<double> prof) {
    const size_t n = prof.size();
    if (n < 2) return;
    const double y0 = prof[0];
    const double slope = (prof[n - 1] - y0) / static_cast<double>(n - 1);
    for (size_t i = 0; i < n; ++i) prof[i] -= y0 + slope * static_cast<double>(i);
}

std::vector<double> segment_fluctuations(std::span<const double> prof, int s) {
    const size_t n = prof.size();
    if (s < 2 || static_cast<size_t>(s) > n)
        throw std::invalid_argument("segment_fluctuations: scale out of range");
    const ptrdiff_t ns = static_cast<ptrdiff_t>(n / static_cast<size_t>(s));
    std::vector<double> out(2 * static_cast<size_t>(ns));

    const double half = (s - 1) / 2.0;
    const double sjj = static_cast<double>(s) * (static_cast<double>(s) * s - 1.0) / 12.0;

#pragma omp parallel for schedule(static)
    for (ptrdiff_t v = 0; v < 2 * ns; ++v) {
        const size_t start = v < ns ? static_cast<size_t>(v) * s
                                    : n - static_cast<size_t>(v - ns + 1) * s;
        const double* y = prof.data() + start;
        double sum_y = 0.0, sum_jy = 0.0;
        for (int j = 0; j < s; ++j) {
            sum_y += y[j];
            sum_jy += j * y[j];
        }
        const double mean = sum_y / s;
        const double slope = (sum_jy - half * sum_y) / sjj;
        double rss = 0.0;
        for (int j = 0; j < s; ++j) {
            const double e = y[j] - mean - slope * (j - half);
            rss += e * e;
        }
        out[static_cast<size_t>(v)] = std::sqrt(rss / s);
    }
    return out;
}

LogLogFit fit_loglog(std::span<const int> scales, std::span<const double> values) {
    const size_t n = scales.size();
    if (n != values.size() || n < 3)
        throw std::invalid_argument("fit_loglog: need at least 3 matching points");

    double mx = 0.0, my = 0.0;
    std::vector<double> lx(n), ly(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(values[i] > 0.0)) throw std::invalid_argument("fit_loglog: non-positive value");
        lx[i] = std::log10(static_cast<double>(scales[i]));
        ly[i] = std::log10(values[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog: degenerate scale grid");

    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = ly[i] - fit.intercept - fit.slope * lx[i];
        sse += r * r;
    }
    fit.slope_se = n > 2 ? std::sqrt(sse / (static_cast<double>(n) - 2.0) / sxx) : 0.0;
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace icd
