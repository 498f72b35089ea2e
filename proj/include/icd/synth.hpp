#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "icd/events.hpp"

namespace icd {

enum class GeneratorKind : uint8_t {
    WeibullIID,
    QExpIID,
    FGN,
    BinomialCascade,
    PoissonFlow,
    LongMemoryHeavyTail,
};

const char* to_token(GeneratorKind k);

// One spec covers every generator; fields outside a generator's parameter
// set are ignored. All outputs are pure functions of (spec, seed).
struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::WeibullIID;
    size_t length = 0;
    uint64_t seed = 0;

    double scale = 1.0;  // Weibull a / q-exponential kappa
    double shape = 1.0;  // Weibull b / q-exponential q

    double hurst = 0.5;      // FGN, LongMemoryHeavyTail
    double cascade_p = 0.3;  // BinomialCascade

    // PoissonFlow per-event category probabilities; must sum to 1
    double p_buy_submit = 0.42;
    double p_buy_cancel = 0.08;
    double p_sell_submit = 0.42;
    double p_sell_cancel = 0.08;

    int days = 1;
    Date start_day{2003, 1, 2};
};

// iid draws by inverse CDF: Weibull a*(-ln(1-u))^(1/b) or q-exponential
// kappa*((1-u)^-(q-1) - 1)/(q-1).
std::vector<double> gen_iid(const GeneratorSpec& spec);

// Stationary fractional Gaussian noise with autocovariance
// 0.5*(|k+1|^2H - 2|k|^2H + |k-1|^2H), exact circulant embedding synthesis.
// length must be a power of two, 0 < H < 1.
std::vector<double> gen_fgn(const GeneratorSpec& spec);

// Deterministic binomial multiplicative measure over 2^k cells: each dyadic
// halving sends fraction p left and 1-p right. The seed is unused.
std::vector<double> gen_cascade(const GeneratorSpec& spec);

// iid categorical order flow split into day blocks. Daily volumes ramp
// linearly from 0.5x to 1.5x the mean so day-level regressions have leverage.
EventStream gen_poisson_flow(const GeneratorSpec& spec);

// Rank-remaps fractional Gaussian noise onto iid q-exponential draws
// (monotone marginal replacement), then rounds to integers clamped to >= 1.
std::vector<uint64_t> gen_longmem_heavytail(const GeneratorSpec& spec);

// Embeds a duration series into a valid order-flow stream: an anchor
// cancellation, then d(i)-1 alternating-side submits before cancellation i.
// Extracting the same side under the continuous policy recovers the input.
EventStream flow_from_durations(std::span<const uint64_t> durations, Side side, int days = 1,
                                Date start_day = Date{2003, 1, 2});

}  // namespace icd
