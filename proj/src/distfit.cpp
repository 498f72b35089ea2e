#include "icd/distfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "optim.hpp"

namespace icd {

namespace {

constexpr double kLn10 = 2.302585092994046;
constexpr double kQEps = 1e-6;       // q-exponential shape kept inside (1+kQEps, 2-kQEps)
constexpr double kLogFloor = -400.0;  // natural-log density clamp for underflowed tails

double clamped_log_pdf(const DistributionParams& p, double d) {
    const double v = log_pdf(p, d);
    return std::isfinite(v) ? std::max(v, kLogFloor) : kLogFloor;
}

}  // namespace

const char* to_token(Family f) { return f == Family::Weibull ? "weibull" : "qexp"; }
const char* to_token(FitMethod m) { return m == FitMethod::MLE ? "mle" : "nlse"; }

void validate(const DistributionParams& p) {
    if (!(p.scale > 0.0) || !std::isfinite(p.scale))
        throw std::invalid_argument("distribution scale must be positive");
    if (p.family == Family::Weibull) {
        if (!(p.shape > 0.0) || !std::isfinite(p.shape))
            throw std::invalid_argument("weibull shape must be positive");
    } else {
        if (!(p.shape > 1.0) || !(p.shape < 2.0))
            throw std::invalid_argument("q-exponential shape must lie in (1,2)");
    }
}

double evaluate_pdf(const DistributionParams& p, double d) {
    validate(p);
    if (d < 0.0) throw std::invalid_argument("evaluate_pdf: negative argument");
    if (p.family == Family::Weibull) {
        const double a = p.scale, b = p.shape;
        if (d == 0.0) {
            if (b < 1.0) throw std::invalid_argument("evaluate_pdf: density diverges at origin");
            return b == 1.0 ? 1.0 / a : 0.0;
        }
        const double z = d / a;
        return (b / a) * std::pow(z, b - 1.0) * std::exp(-std::pow(z, b));
    }
    const double kappa = p.scale, q = p.shape;
    return (1.0 / kappa) * std::pow(1.0 + (q - 1.0) * d / kappa, -q / (q - 1.0));
}

double log_pdf(const DistributionParams& p, double d) {
    validate(p);
    if (d < 0.0) throw std::invalid_argument("log_pdf: negative argument");
    if (p.family == Family::Weibull) {
        const double a = p.scale, b = p.shape;
        if (d == 0.0) {
            if (b < 1.0) throw std::invalid_argument("log_pdf: density diverges at origin");
            return b == 1.0 ? -std::log(a) : -std::numeric_limits<double>::infinity();
        }
        const double lz = std::log(d / a);
        return std::log(b / a) + (b - 1.0) * lz - std::exp(b * lz);
    }
    const double kappa = p.scale, q = p.shape;
    return -std::log(kappa) - q / (q - 1.0) * std::log1p((q - 1.0) * d / kappa);
}

double weibull_quantile(double u, double scale_a, double shape_b) {
    return scale_a * std::pow(-std::log1p(-u), 1.0 / shape_b);
}

double qexp_quantile(double u, double scale_kappa, double shape_q) {
    const double qm1 = shape_q - 1.0;
    return scale_kappa * (std::pow(1.0 - u, -qm1) - 1.0) / qm1;
}

// ---------------------------------------------------------------------------
// Histogram construction

namespace {

struct RawBins {
    std::vector<double> edges;
    std::vector<uint64_t> counts;
};

RawBins count_into(const std::vector<double>& edges, std::span<const double> samples) {
    RawBins rb;
    rb.edges = edges;
    rb.counts.assign(edges.size() - 1, 0);
    for (double x : samples) {
        auto it = std::upper_bound(rb.edges.begin(), rb.edges.end(), x);
        size_t idx = static_cast<size_t>(it - rb.edges.begin());
        idx = idx == 0 ? 0 : idx - 1;
        if (idx >= rb.counts.size()) idx = rb.counts.size() - 1;
        ++rb.counts[idx];
    }
    return rb;
}

std::vector<double> geometric_edges(double lo, double hi, double ratio) {
    std::vector<double> edges{lo};
    double e = lo;
    while (e <= hi) {
        e *= ratio;
        edges.push_back(e);
    }
    return edges;
}

// merge_below == 0 drops empty bins and keeps the rest untouched; a positive
// value additionally coalesces adjacent bins until each kept bin holds at
// least that many samples (trailing remainders widen the last kept bin).
BinnedPdf finalize(const RawBins& rb, uint64_t total, uint64_t merge_below) {
    BinnedPdf out;
    out.total_count = total;
    const size_t nb = rb.counts.size();
    if (merge_below == 0) {
        for (size_t i = 0; i < nb; ++i) {
            if (rb.counts[i] == 0) continue;
            out.lower.push_back(rb.edges[i]);
            out.upper.push_back(rb.edges[i + 1]);
            out.counts.push_back(rb.counts[i]);
        }
    } else {
        size_t i = 0;
        while (i < nb) {
            while (i < nb && rb.counts[i] == 0) ++i;  // a bin never starts empty
            if (i >= nb) break;
            const double lo = rb.edges[i];
            uint64_t count = 0;
            size_t j = i;
            while (j < nb) {
                count += rb.counts[j];
                ++j;
                if (count >= merge_below) break;
            }
            const double hi = rb.edges[j];
            if (count >= merge_below || out.counts.empty()) {
                out.lower.push_back(lo);
                out.upper.push_back(hi);
                out.counts.push_back(count);
            } else {
                // undersized trailing remainder widens the last kept bin
                out.upper.back() = hi;
                out.counts.back() += count;
            }
            i = j;
        }
    }
    for (size_t k = 0; k < out.counts.size(); ++k) {
        out.centers.push_back(std::sqrt(out.lower[k] * out.upper[k]));
        const double width = out.upper[k] - out.lower[k];
        out.densities.push_back(static_cast<double>(out.counts[k]) /
                                (static_cast<double>(total) * width));
    }
    return out;
}

}  // namespace

BinnedPdf empirical_pdf(std::span<const double> samples, Binning binning,
                        const BinningOptions& opts) {
    if (samples.empty()) throw std::invalid_argument("empirical_pdf: empty sample");
    double lo = samples[0], hi = samples[0];
    for (double x : samples) {
        if (!(x > 0.0)) throw std::invalid_argument("empirical_pdf: non-positive sample");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }

    if (binning == Binning::Hybrid && lo < 0.5) binning = Binning::Logarithmic;

    std::vector<double> edges;
    uint64_t merge_below = 0;
    switch (binning) {
        case Binning::Unit: {
            if (lo < 0.5) throw std::invalid_argument("empirical_pdf: unit bins need samples >= 0.5");
            const auto k_lo = static_cast<uint64_t>(std::floor(lo + 0.5));
            const auto k_hi = static_cast<uint64_t>(std::floor(hi + 0.5));
            for (uint64_t k = k_lo; k <= k_hi + 1; ++k)
                edges.push_back(static_cast<double>(k) - 0.5);
            break;
        }
        case Binning::Logarithmic: {
            edges = geometric_edges(lo / std::sqrt(opts.ratio), hi, opts.ratio);
            break;
        }
        case Binning::Hybrid: {
            const auto k_top = static_cast<uint64_t>(std::floor(opts.unit_threshold));
            const auto k_hi =
                std::min<uint64_t>(k_top, static_cast<uint64_t>(std::floor(hi + 0.5)));
            for (uint64_t k = 1; k <= k_hi + 1; ++k)
                edges.push_back(static_cast<double>(k) - 0.5);
            if (hi >= edges.back()) {
                auto geo = geometric_edges(edges.back(), hi, opts.ratio);
                edges.insert(edges.end(), geo.begin() + 1, geo.end());
            }
            merge_below = opts.min_count;
            break;
        }
    }

    const RawBins rb = count_into(edges, samples);
    return finalize(rb, samples.size(), merge_below);
}

double chi_rms(const DistributionParams& p, const BinnedPdf& pdf, ChiSpace space) {
    validate(p);
    if (pdf.bin_count() == 0) throw std::invalid_argument("chi_rms: empty pdf");
    double sum = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < pdf.bin_count(); ++i) {
        if (pdf.counts[i] == 0) continue;
        double diff;
        if (space == ChiSpace::Log10) {
            diff = clamped_log_pdf(p, pdf.centers[i]) / kLn10 - std::log10(pdf.densities[i]);
        } else {
            diff = evaluate_pdf(p, pdf.centers[i]) - pdf.densities[i];
        }
        sum += diff * diff;
        ++n;
    }
    if (n == 0) throw std::invalid_argument("chi_rms: no occupied bins");
    return std::sqrt(sum / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Maximum likelihood

namespace {

// q in (1+kQEps, 2-kQEps) <-> unconstrained t
double q_from_t(double t) { return 1.0 + kQEps + (1.0 - 2.0 * kQEps) / (1.0 + std::exp(-t)); }
double t_from_q(double q) {
    const double f = (q - 1.0 - kQEps) / (1.0 - 2.0 * kQEps);
    return std::log(f / (1.0 - f));
}

struct WeibullProfile {
    // shifted exponential sums at shape b: S = sum exp(b*(w-m)),
    // Sw = sum exp(b*(w-m))*w, Sww = sum exp(b*(w-m))*w^2
    double ratio;     // Sw/S
    double ratio_d;   // d(ratio)/db = Sww/S - (Sw/S)^2
    double log_mean;  // log(S/n)
};

WeibullProfile weibull_profile(const std::vector<double>& w, double m, double b) {
    double s = 0.0, sw = 0.0, sww = 0.0;
    for (double wi : w) {
        const double e = std::exp(b * (wi - m));
        s += e;
        sw += e * wi;
        sww += e * wi * wi;
    }
    const double r = sw / s;
    return {r, sww / s - r * r, std::log(s / static_cast<double>(w.size()))};
}

FitResult weibull_mle(const std::vector<double>& x, const FitOptions& opts) {
    const size_t n = x.size();
    std::vector<double> w(n);
    double wbar = 0.0, m = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        w[i] = std::log(x[i]);
        wbar += w[i];
        m = std::max(m, w[i]);
    }
    wbar /= static_cast<double>(n);

    constexpr double b_lo = 1e-4, b_hi = 1e4;
    auto g = [&](double b) { return weibull_profile(w, m, b).ratio - 1.0 / b - wbar; };

    FitResult res;
    res.method = FitMethod::MLE;
    res.params.family = Family::Weibull;

    if (g(b_hi) <= 0.0) {
        // no interior stationary point: shape runs into the upper bound
        const auto prof = weibull_profile(w, m, b_hi);
        res.params.shape = b_hi;
        res.params.scale = std::exp(m + prof.log_mean / b_hi);
        res.converged = false;
        res.iterations = 1;
        return res;
    }

    double var_w = 0.0;
    for (double wi : w) var_w += (wi - wbar) * (wi - wbar);
    var_w /= static_cast<double>(n);
    double b = var_w > 1e-16 ? 1.28254983016186 / std::sqrt(var_w) : 1.0;
    b = std::clamp(b, b_lo * 2, b_hi / 2);

    double lo = b_lo, hi = b_hi;
    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iterations) {
        ++iter;
        const auto prof = weibull_profile(w, m, b);
        const double gb = prof.ratio - 1.0 / b - wbar;
        const double gpb = prof.ratio_d + 1.0 / (b * b);
        if (gb > 0.0) hi = b;
        else lo = b;
        double step = gpb > 0.0 ? gb / gpb : 0.0;
        double bn = b - step;
        if (!(bn > lo && bn < hi)) bn = 0.5 * (lo + hi);  // bisect when Newton leaves bracket
        const double delta = std::fabs(bn - b);
        b = bn;
        if (delta <= opts.tolerance * std::max(1.0, b)) {
            converged = true;
            break;
        }
    }

    const auto prof = weibull_profile(w, m, b);
    const double log_a = m + prof.log_mean / b;
    res.params.shape = b;
    res.params.scale = std::exp(log_a);
    res.converged = converged;
    res.iterations = iter;

    double sum_pow = 0.0;
    for (double wi : w) sum_pow += std::exp(b * (wi - log_a));
    res.log_likelihood = static_cast<double>(n) * (std::log(b) - b * log_a) +
                         (b - 1.0) * wbar * static_cast<double>(n) - sum_pow;
    return res;
}

FitResult qexp_mle(const std::vector<double>& x, const FitOptions& opts) {
    const size_t n = x.size();
    double mean = 0.0;
    for (double xi : x) mean += xi;
    mean /= static_cast<double>(n);

    // mean negative log-likelihood over (log kappa, logit-mapped q)
    auto nll = [&](double u, double t) {
        const double kappa = std::exp(u);
        const double q = q_from_t(t);
        const double beta = (q - 1.0) / kappa;
        double acc = 0.0;
        for (double xi : x) acc += std::log1p(beta * xi);
        return u + q / (q - 1.0) * acc / static_cast<double>(n);
    };

    const auto min2 = detail::nelder_mead_2d(nll, {std::log(mean / 2.0), t_from_q(1.3)},
                                             {0.3, 0.3}, opts.tolerance, opts.max_iterations);

    FitResult res;
    res.method = FitMethod::MLE;
    res.params.family = Family::QExponential;
    res.params.scale = std::exp(min2.x[0]);
    res.params.shape = q_from_t(min2.x[1]);
    res.converged = min2.converged;
    res.iterations = min2.iterations;
    res.log_likelihood = -static_cast<double>(n) * min2.fx;
    return res;
}

}  // namespace

FitResult fit_mle(std::span<const double> samples, Family family, const FitOptions& opts) {
    if (samples.size() < 100)
        throw std::invalid_argument("fit_mle: need at least 100 samples");
    std::vector<double> x(samples.begin(), samples.end());
    for (double xi : x)
        if (!(xi > 0.0)) throw std::invalid_argument("fit_mle: non-positive sample");
    std::sort(x.begin(), x.end());  // canonical order: fits see a multiset

    FitResult res = family == Family::Weibull ? weibull_mle(x, opts) : qexp_mle(x, opts);
    const BinnedPdf pdf = empirical_pdf(x, opts.chi_binning, opts.binning);
    res.chi = chi_rms(res.params, pdf, opts.chi_space);
    return res;
}

FitResult fit_nlse(const BinnedPdf& pdf, Family family, const FitOptions& opts) {
    if (pdf.bin_count() < 8)
        throw std::invalid_argument("fit_nlse: need at least 8 occupied bins");

    std::vector<double> log_density(pdf.bin_count());
    for (size_t i = 0; i < pdf.bin_count(); ++i) {
        if (!(pdf.densities[i] > 0.0))
            throw std::invalid_argument("fit_nlse: empty bin in pdf");
        log_density[i] = std::log10(pdf.densities[i]);
    }

    // moment-style initial guess from the binned data
    double total = 0.0, mean = 0.0, mlog = 0.0, mlog2 = 0.0;
    for (size_t i = 0; i < pdf.bin_count(); ++i) {
        const auto c = static_cast<double>(pdf.counts[i]);
        total += c;
        mean += c * pdf.centers[i];
        const double lc = std::log(pdf.centers[i]);
        mlog += c * lc;
        mlog2 += c * lc * lc;
    }
    mean /= total;
    mlog /= total;
    const double sd_log = std::sqrt(std::max(mlog2 / total - mlog * mlog, 1e-12));

    auto sse = [&](const DistributionParams& p) {
        double acc = 0.0;
        for (size_t i = 0; i < pdf.bin_count(); ++i) {
            const double diff = clamped_log_pdf(p, pdf.centers[i]) / kLn10 - log_density[i];
            acc += diff * diff;
        }
        return acc;
    };

    FitResult res;
    res.method = FitMethod::NLSE;
    res.params.family = family;
    res.log_likelihood = std::numeric_limits<double>::quiet_NaN();

    if (family == Family::Weibull) {
        auto obj = [&](double u, double v) {
            return sse({Family::Weibull, std::exp(u), std::exp(v)});
        };
        const double b0 = std::clamp(1.28254983016186 / sd_log, 0.05, 20.0);
        const auto min2 = detail::nelder_mead_2d(obj, {std::log(mean), std::log(b0)}, {0.3, 0.3},
                                                 opts.tolerance, opts.max_iterations);
        res.params.scale = std::exp(min2.x[0]);
        res.params.shape = std::exp(min2.x[1]);
        res.converged = min2.converged;
        res.iterations = min2.iterations;
    } else {
        auto obj = [&](double u, double t) {
            return sse({Family::QExponential, std::exp(u), q_from_t(t)});
        };
        const auto min2 = detail::nelder_mead_2d(obj, {std::log(mean / 2.0), t_from_q(1.3)},
                                                 {0.3, 0.3}, opts.tolerance, opts.max_iterations);
        res.params.scale = std::exp(min2.x[0]);
        res.params.shape = q_from_t(min2.x[1]);
        res.converged = min2.converged;
        res.iterations = min2.iterations;
    }

    res.chi = chi_rms(res.params, pdf, ChiSpace::Log10);
    return res;
}

ComparisonReport compare(const FitResult& a, const FitResult& b) {
    ComparisonReport rep;
    rep.chi_delta = a.chi - b.chi;
    if (std::fabs(rep.chi_delta) < 1e-12) {
        rep.preferred = -1;
        rep.text = "indistinguishable";
    } else if (rep.chi_delta < 0.0) {
        rep.preferred = 0;
        rep.text = std::string(to_token(a.params.family)) + " preferred";
    } else {
        rep.preferred = 1;
        rep.text = std::string(to_token(b.params.family)) + " preferred";
    }
    return rep;
}

}  // namespace icd
