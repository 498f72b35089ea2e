#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace icd {

enum class ScalingMethod : uint8_t { DFA, CDMA };
const char* to_token(ScalingMethod m);  // "dfa" / "cdma"

struct ScalingResult {
    ScalingMethod method = ScalingMethod::DFA;
    std::vector<int> scales;
    std::vector<double> fluctuations;
    double hurst = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
    std::pair<int, int> fit_range{0, 0};
    bool reliable = false;  // r_squared >= 0.98
};

// ~count log-spaced integer scales in [method minimum, N/6], deduplicated;
// CDMA scales are rounded to odd.
std::vector<int> default_scales(size_t n, ScalingMethod method, int count = 20);

// Detrended fluctuation analysis with linear segment detrending; F(s) is the
// RMS over the 2*floor(N/s) segments tiled from both ends.
ScalingResult dfa(std::span<const double> series, std::span<const int> scales);

// Centered detrending moving average: residuals of the profile against its
// centered moving average, windows that fit entirely; scales must be odd.
ScalingResult cdma(std::span<const double> series, std::span<const int> scales);

enum class ShuffleEstimator : uint8_t { DFA, CDMA, MFDFA_WIDTH };
const char* to_token(ShuffleEstimator e);

struct ShuffleReport {
    ShuffleEstimator estimator = ShuffleEstimator::DFA;
    int n_replicates = 0;
    uint64_t base_seed = 0;
    std::vector<double> values;      // per-replicate statistic
    double mean = 0.0;               // H_SFL or width_SFL
    double stddev = 0.0;             // sample standard deviation
    std::optional<double> residual;  // MFDFA_WIDTH only: original width - mean
};

// Re-estimates the Hurst exponent on permuted copies; replicate k is driven
// by Rng(base_seed, k), so parallel and serial runs agree bit for bit.
// MFDFA_WIDTH lives in multifractal.hpp (width_shuffle_test).
ShuffleReport shuffle_test(std::span<const double> series, ShuffleEstimator estimator,
                           int n_replicates = 100, uint64_t base_seed = 0);

}  // namespace icd
