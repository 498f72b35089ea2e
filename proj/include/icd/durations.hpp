#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "icd/events.hpp"

namespace icd {

enum class DayPolicy : uint8_t { ResetAtDayBoundary, Continuous };

// Event-time gaps between consecutive same-side cancellations. The event
// clock ticks once per record of either side and either action, so every
// gap is >= 1.
struct DurationSeries {
    Side side = Side::Buy;
    std::vector<uint64_t> durations;
    std::vector<size_t> day_offsets;  // first duration index of each stream day
    double mean_duration = 0.0;
    uint64_t cancel_count = 0;  // cancellations of the requested side

    bool short_sample() const { return durations.size() < 2; }
};

DurationSeries extract_durations(const EventStream& stream, Side side,
                                 DayPolicy policy = DayPolicy::ResetAtDayBoundary);

struct CancellationStats {
    Side side = Side::Buy;
    uint64_t cancels = 0;          // N_C
    uint64_t orders = 0;           // N_A, same side, submits plus cancels
    double ratio = 0.0;            // r = N_C / N_A
    std::optional<double> gamma;   // slope of daily N_C vs N_A; absent with < 2 days
    double mean_duration = 0.0;
};

CancellationStats compute_stats(const EventStream& stream, Side side,
                                const DurationSeries& series);

// d / <d>; the result has mean 1 up to rounding.
std::vector<double> rescale(const DurationSeries& series);

// Concatenated rescale() of each series.
std::vector<double> ensemble(std::span<const DurationSeries> series_list);

std::vector<double> to_doubles(std::span<const uint64_t> v);

}  // namespace icd
