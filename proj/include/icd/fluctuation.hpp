#pragma once

#include <span>
#include <vector>

namespace icd {

// Cumulative-sum profile of a series.
std::vector<double> profile(std::span<const double> series);

// Subtract the straight line through the profile's endpoints. Linear segment
// detrending and the centered moving average both annihilate affine terms, so
// this changes nothing mathematically; it keeps the running sums small enough
// that double precision holds at large N.
void remove_ramp(std::span<double> prof);

// Per-segment RMS residual after linear detrending at scale s: 2*floor(N/s)
// values, the first half tiling the profile from the front, the second half
// from the back. Slots are filled independently, so results do not depend on
// the OpenMP schedule or thread count.
std::vector<double> segment_fluctuations(std::span<const double> prof, int s);

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

// OLS of log10(values) on log10(scales), equal weight per point.
LogLogFit fit_loglog(std::span<const int> scales, std::span<const double> values);

}  // namespace icd
