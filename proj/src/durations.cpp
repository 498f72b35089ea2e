#include "icd/durations.hpp"

#include <stdexcept>

namespace icd {

DurationSeries extract_durations(const EventStream& stream, Side side, DayPolicy policy) {
    if (stream.events.empty()) throw std::invalid_argument("extract_durations: empty event stream");

    DurationSeries out;
    out.side = side;

    uint64_t clock = 0;
    std::optional<uint64_t> anchor;
    size_t next_day = 0;

    for (size_t i = 0; i < stream.events.size(); ++i) {
        if (next_day < stream.day_offsets.size() && i == stream.day_offsets[next_day]) {
            out.day_offsets.push_back(out.durations.size());
            if (policy == DayPolicy::ResetAtDayBoundary) anchor.reset();
            ++next_day;
        }
        ++clock;
        const OrderEvent& ev = stream.events[i];
        if (ev.side == side && ev.action == Action::Cancel) {
            if (anchor) out.durations.push_back(clock - *anchor);
            anchor = clock;
            ++out.cancel_count;
        }
    }

    if (!out.durations.empty()) {
        uint64_t sum = 0;
        for (uint64_t d : out.durations) sum += d;
        out.mean_duration = static_cast<double>(sum) / static_cast<double>(out.durations.size());
    }
    return out;
}

CancellationStats compute_stats(const EventStream& stream, Side side,
                                const DurationSeries& series) {
    const FlowSummary summary = summarize(stream);
    const SideCounts& counts = summary.side(side);
    if (counts.all() == 0) throw std::invalid_argument("compute_stats: no orders on side");

    CancellationStats stats;
    stats.side = side;
    stats.cancels = counts.cancels;
    stats.orders = counts.all();
    stats.ratio = static_cast<double>(counts.cancels) / static_cast<double>(counts.all());
    stats.mean_duration = series.mean_duration;

    if (stream.day_count() >= 2) {
        // OLS with a free intercept on daily (N_A, N_C) points; slope only.
        const size_t n = stream.per_day.size();
        double mx = 0.0, my = 0.0;
        for (const auto& day : stream.per_day) {
            const double x = static_cast<double>(side == Side::Buy
                                                     ? day.buy_submits + day.buy_cancels
                                                     : day.sell_submits + day.sell_cancels);
            const double y = static_cast<double>(side == Side::Buy ? day.buy_cancels
                                                                   : day.sell_cancels);
            mx += x;
            my += y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double sxx = 0.0, sxy = 0.0;
        for (const auto& day : stream.per_day) {
            const double x = static_cast<double>(side == Side::Buy
                                                     ? day.buy_submits + day.buy_cancels
                                                     : day.sell_submits + day.sell_cancels);
            const double y = static_cast<double>(side == Side::Buy ? day.buy_cancels
                                                                   : day.sell_cancels);
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if (sxx > 0.0) stats.gamma = sxy / sxx;
    }
    return stats;
}

std::vector<double> rescale(const DurationSeries& series) {
    if (series.durations.empty()) throw std::invalid_argument("rescale: empty duration series");
    if (!(series.mean_duration > 0.0))
        throw std::invalid_argument("rescale: non-positive mean duration");
    std::vector<double> out;
    out.reserve(series.durations.size());
    for (uint64_t d : series.durations)
        out.push_back(static_cast<double>(d) / series.mean_duration);
    return out;
}

std::vector<double> ensemble(std::span<const DurationSeries> series_list) {
    if (series_list.empty()) throw std::invalid_argument("ensemble: empty series list");
    size_t total = 0;
    for (const auto& s : series_list) {
        if (s.durations.empty()) throw std::invalid_argument("ensemble: empty series in list");
        total += s.durations.size();
    }
    std::vector<double> out;
    out.reserve(total);
    for (const auto& s : series_list) {
        const auto r = rescale(s);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

std::vector<double> to_doubles(std::span<const uint64_t> v) {
    std::vector<double> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
}

}  // namespace icd
