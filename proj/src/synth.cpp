#include "icd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fft.hpp"
#include "icd/distfit.hpp"
#include "icd/rng.hpp"

namespace icd {

const char* to_token(GeneratorKind k) {
    switch (k) {
        case GeneratorKind::WeibullIID: return "weibull_iid";
        case GeneratorKind::QExpIID: return "qexp_iid";
        case GeneratorKind::FGN: return "fgn";
        case GeneratorKind::BinomialCascade: return "cascade";
        case GeneratorKind::PoissonFlow: return "poisson_flow";
        default: return "longmem_heavytail";
    }
}

namespace {

bool power_of_two(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

void require_length(const GeneratorSpec& spec) {
    if (spec.length == 0) throw std::invalid_argument("generator: length must be positive");
}

// Day block sizes: linear ramp over the blocks, totals exactly n.
std::vector<size_t> day_sizes(size_t n, int days) {
    if (days < 1) throw std::invalid_argument("generator: days must be >= 1");
    const auto d = static_cast<size_t>(days);
    if (d > n) throw std::invalid_argument("generator: more days than events");
    std::vector<double> weights(d);
    double total = 0.0;
    for (size_t b = 0; b < d; ++b) {
        weights[b] = d == 1 ? 1.0 : 0.5 + static_cast<double>(b) / static_cast<double>(d - 1);
        total += weights[b];
    }
    std::vector<size_t> sizes(d);
    size_t assigned = 0;
    for (size_t b = 0; b < d; ++b) {
        sizes[b] = std::max<size_t>(1, static_cast<size_t>(std::floor(
                                           static_cast<double>(n) * weights[b] / total)));
        assigned += sizes[b];
    }
    while (assigned < n) {
        ++sizes[d - 1];
        ++assigned;
    }
    while (assigned > n) {
        for (size_t b = 0; b < d && assigned > n; ++b) {
            if (sizes[b] > 1) {
                --sizes[b];
                --assigned;
            }
        }
    }
    return sizes;
}

EventStream build_stream(const std::vector<std::pair<Side, Action>>& records, int days,
                         Date start_day) {
    const auto sizes = day_sizes(records.size(), days);
    EventStream stream;
    stream.events.reserve(records.size());
    size_t idx = 0;
    for (size_t b = 0; b < sizes.size(); ++b) {
        const Date day = advance(start_day, static_cast<int64_t>(b));
        stream.day_offsets.push_back(stream.events.size());
        stream.per_day.push_back(DayCounts{day});
        DayCounts& counts = stream.per_day.back();
        for (size_t j = 0; j < sizes[b]; ++j, ++idx) {
            const auto [side, action] = records[idx];
            OrderEvent ev;
            ev.day = day;
            ev.seq = j + 1;
            ev.side = side;
            ev.action = action;
            stream.events.push_back(ev);
            ++counts.total;
            if (side == Side::Buy) {
                if (action == Action::Submit) ++counts.buy_submits;
                else ++counts.buy_cancels;
            } else {
                if (action == Action::Submit) ++counts.sell_submits;
                else ++counts.sell_cancels;
            }
        }
    }
    return stream;
}

}  // namespace

std::vector<double> gen_iid(const GeneratorSpec& spec) {
    require_length(spec);
    if (spec.kind != GeneratorKind::WeibullIID && spec.kind != GeneratorKind::QExpIID)
        throw std::invalid_argument("gen_iid: wrong generator kind");
    const DistributionParams params{
        spec.kind == GeneratorKind::WeibullIID ? Family::Weibull : Family::QExponential,
        spec.scale, spec.shape};
    validate(params);

    Rng rng(spec.seed);
    std::vector<double> out(spec.length);
    if (spec.kind == GeneratorKind::WeibullIID) {
        for (auto& x : out) x = weibull_quantile(rng.uniform(), spec.scale, spec.shape);
    } else {
        for (auto& x : out) x = qexp_quantile(rng.uniform(), spec.scale, spec.shape);
    }
    return out;
}

std::vector<double> gen_fgn(const GeneratorSpec& spec) {
    require_length(spec);
    if (!power_of_two(spec.length))
        throw std::invalid_argument("gen_fgn: length must be a power of 2");
    if (!(spec.hurst > 0.0) || !(spec.hurst < 1.0))
        throw std::invalid_argument("gen_fgn: H must lie in (0,1)");

    const size_t n = spec.length;
    const size_t m = 2 * n;
    const double two_h = 2.0 * spec.hurst;

    // circulant embedding of the autocovariance
    auto gamma = [&](double k) {
        return 0.5 * (std::pow(std::fabs(k + 1.0), two_h) - 2.0 * std::pow(std::fabs(k), two_h) +
                      std::pow(std::fabs(k - 1.0), two_h));
    };
    std::vector<std::complex<double>> c(m);
    for (size_t j = 0; j <= n; ++j) c[j] = gamma(static_cast<double>(j));
    for (size_t j = n + 1; j < m; ++j) c[j] = c[m - j];

    detail::fft_inplace(c, false);
    double lambda_max = 0.0;
    for (const auto& v : c) lambda_max = std::max(lambda_max, v.real());
    std::vector<double> lambda(m);
    for (size_t j = 0; j < m; ++j) {
        double l = c[j].real();
        if (l < 0.0) {
            if (l < -1e-8 * lambda_max)
                throw std::runtime_error("gen_fgn: embedding not nonnegative definite");
            l = 0.0;
        }
        lambda[j] = l;
    }

    Rng rng(spec.seed);
    std::vector<std::complex<double>> z(m);
    for (size_t j = 0; j < m; ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        z[j] = std::sqrt(lambda[j]) * std::complex<double>(re, im);
    }
    detail::fft_inplace(z, true);

    const double norm = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = z[i].real() * norm;
    return out;
}

std::vector<double> gen_cascade(const GeneratorSpec& spec) {
    require_length(spec);
    if (!power_of_two(spec.length))
        throw std::invalid_argument("gen_cascade: length must be a power of 2");
    if (!(spec.cascade_p > 0.0) || !(spec.cascade_p < 1.0))
        throw std::invalid_argument("gen_cascade: p must lie in (0,1)");

    std::vector<double> mass{1.0};
    while (mass.size() < spec.length) {
        std::vector<double> next(mass.size() * 2);
        for (size_t i = 0; i < mass.size(); ++i) {
            next[2 * i] = mass[i] * spec.cascade_p;
            next[2 * i + 1] = mass[i] * (1.0 - spec.cascade_p);
        }
        mass.swap(next);
    }
    return mass;
}

EventStream gen_poisson_flow(const GeneratorSpec& spec) {
    require_length(spec);
    const double p1 = spec.p_buy_submit, p2 = spec.p_buy_cancel, p3 = spec.p_sell_submit,
                 p4 = spec.p_sell_cancel;
    if (!(p1 >= 0) || !(p2 >= 0) || !(p3 >= 0) || !(p4 >= 0) ||
        std::fabs(p1 + p2 + p3 + p4 - 1.0) > 1e-9)
        throw std::invalid_argument("gen_poisson_flow: category probabilities must sum to 1");

    Rng rng(spec.seed);
    std::vector<std::pair<Side, Action>> records;
    records.reserve(spec.length);
    for (size_t i = 0; i < spec.length; ++i) {
        const double u = rng.uniform();
        if (u < p1) records.emplace_back(Side::Buy, Action::Submit);
        else if (u < p1 + p2) records.emplace_back(Side::Buy, Action::Cancel);
        else if (u < p1 + p2 + p3) records.emplace_back(Side::Sell, Action::Submit);
        else records.emplace_back(Side::Sell, Action::Cancel);
    }
    return build_stream(records, spec.days, spec.start_day);
}

std::vector<uint64_t> gen_longmem_heavytail(const GeneratorSpec& spec) {
    require_length(spec);
    if (!(spec.hurst > 0.5) || !(spec.hurst < 1.0))
        throw std::invalid_argument("gen_longmem_heavytail: H must lie in (0.5,1)");
    const DistributionParams params{Family::QExponential, spec.scale, spec.shape};
    validate(params);

    size_t n2 = 1;
    while (n2 < spec.length) n2 <<= 1;
    GeneratorSpec fgn_spec = spec;
    fgn_spec.kind = GeneratorKind::FGN;
    fgn_spec.length = n2;
    std::vector<double> noise = gen_fgn(fgn_spec);
    noise.resize(spec.length);

    Rng rng(spec.seed, 1);
    std::vector<double> marginals(spec.length);
    for (auto& x : marginals) x = qexp_quantile(rng.uniform(), spec.scale, spec.shape);
    std::sort(marginals.begin(), marginals.end());

    // rank remap: i-th smallest noise value receives the i-th smallest draw
    std::vector<size_t> order(spec.length);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return noise[a] < noise[b]; });

    std::vector<uint64_t> out(spec.length);
    for (size_t rank = 0; rank < spec.length; ++rank) {
        // nearest integer, floored at 1; ceiling would shift the fitted
        // scale parameter by several percent
        const double v = std::round(marginals[rank]);
        out[order[rank]] = v < 1.0 ? 1 : static_cast<uint64_t>(v);
    }
    return out;
}

EventStream flow_from_durations(std::span<const uint64_t> durations, Side side, int days,
                                Date start_day) {
    if (durations.empty()) throw std::invalid_argument("flow_from_durations: empty durations");
    for (uint64_t d : durations)
        if (d == 0) throw std::invalid_argument("flow_from_durations: durations must be >= 1");

    std::vector<std::pair<Side, Action>> records;
    size_t total = 1;
    for (uint64_t d : durations) total += d;
    records.reserve(total);

    size_t filler = 0;
    records.emplace_back(side, Action::Cancel);  // anchor
    for (uint64_t d : durations) {
        for (uint64_t j = 1; j < d; ++j, ++filler)
            records.emplace_back(filler % 2 == 0 ? Side::Buy : Side::Sell, Action::Submit);
        records.emplace_back(side, Action::Cancel);
    }
    return build_stream(records, days, start_day);
}

}  // namespace icd
