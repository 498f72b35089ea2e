#include "icd/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace icd::ref {

namespace {

// cumulative sum, straight line through the endpoints removed
std::vector<double> conditioned_profile(std::span<const double> series) {
    std::vector<double> y(series.size());
    double acc = 0.0;
    for (size_t i = 0; i < series.size(); ++i) {
        acc += series[i];
        y[i] = acc;
    }
    if (y.size() > 1) {
        const double y0 = y.front();
        const double slope = (y.back() - y0) / static_cast<double>(y.size() - 1);
        for (size_t i = 0; i < y.size(); ++i) y[i] -= y0 + slope * static_cast<double>(i);
    }
    return y;
}

double segment_rms(const double* y, int s) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int j = 0; j < s; ++j) {
        sx += j;
        sy += y[j];
        sxx += static_cast<double>(j) * j;
        sxy += j * y[j];
    }
    const double n = s;
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double rss = 0.0;
    for (int j = 0; j < s; ++j) {
        const double e = y[j] - (intercept + slope * j);
        rss += e * e;
    }
    return std::sqrt(rss / n);
}

}  // namespace

std::vector<double> segment_fluctuations(std::span<const double> series, int s) {
    const auto y = conditioned_profile(series);
    const size_t n = y.size();
    if (s < 2 || static_cast<size_t>(s) > n)
        throw std::invalid_argument("ref::segment_fluctuations: scale out of range");
    const size_t ns = n / static_cast<size_t>(s);
    std::vector<double> out;
    out.reserve(2 * ns);
    for (size_t v = 0; v < ns; ++v) out.push_back(segment_rms(y.data() + v * s, s));
    for (size_t v = 0; v < ns; ++v)
        out.push_back(segment_rms(y.data() + (n - (v + 1) * static_cast<size_t>(s)), s));
    return out;
}

double dfa_fluctuation(std::span<const double> series, int s) {
    const auto segs = segment_fluctuations(series, s);
    double acc = 0.0;
    for (double f : segs) acc += f * f;
    return std::sqrt(acc / static_cast<double>(segs.size()));
}

double cdma_fluctuation(std::span<const double> series, int s) {
    if (s % 2 == 0) throw std::invalid_argument("ref::cdma_fluctuation: scale must be odd");
    const auto y = conditioned_profile(series);
    const size_t n = y.size();
    const size_t h = static_cast<size_t>(s - 1) / 2;
    if (n < static_cast<size_t>(s)) throw std::invalid_argument("ref::cdma_fluctuation: too short");
    double rss = 0.0;
    size_t m = 0;
    for (size_t i = h; i + h < n; ++i) {
        double window = 0.0;
        for (size_t j = i - h; j <= i + h; ++j) window += y[j];
        const double e = y[i] - window / static_cast<double>(s);
        rss += e * e;
        ++m;
    }
    return std::sqrt(rss / static_cast<double>(m));
}

double fluctuation_function(std::span<const double> series, int s, double q) {
    const auto segs = segment_fluctuations(series, s);
    const auto n = static_cast<double>(segs.size());
    if (q == 0.0) {
        double acc = 0.0;
        for (double f : segs) {
            if (f == 0.0) throw std::runtime_error("ref::fluctuation_function: degenerate segment");
            acc += std::log(f);
        }
        return std::exp(acc / n);
    }
    double acc = 0.0;
    for (double f : segs) {
        if (f == 0.0 && q < 0.0)
            throw std::runtime_error("ref::fluctuation_function: degenerate segment");
        acc += std::pow(f, q);
    }
    return std::pow(acc / n, 1.0 / q);
}

}  // namespace icd::ref
