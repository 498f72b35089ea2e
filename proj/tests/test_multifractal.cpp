#include <cmath>

#include "doctest.h"
#include "icd/fluctuation.hpp"
#include "icd/multifractal.hpp"
#include "icd/reference.hpp"
#include "icd/scaling.hpp"
#include "icd/synth.hpp"
#include "oracles.hpp"

using namespace icd;

namespace {

std::vector<double> fgn(double hurst, size_t n, uint64_t seed) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::FGN;
    spec.hurst = hurst;
    spec.length = n;
    spec.seed = seed;
    return gen_fgn(spec);
}

std::vector<double> cascade(double p, size_t n) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::BinomialCascade;
    spec.cascade_p = p;
    spec.length = n;
    return gen_cascade(spec);
}

// power-of-two scales keep segments aligned with the dyadic construction;
// straddling segments damp the positive-q slopes otherwise
std::vector<int> dyadic_scales(size_t n) {
    std::vector<int> scales;
    for (int s = 16; static_cast<size_t>(s) <= n / 6; s *= 2) scales.push_back(s);
    return scales;
}

double chord_deviation(const MultifractalResult& res) {
    const double q0 = res.q_grid.front(), q1 = res.q_grid.back();
    const double t0 = res.tau.front(), t1 = res.tau.back();
    double worst = 0.0;
    for (size_t i = 0; i < res.q_grid.size(); ++i) {
        const double chord = t0 + (t1 - t0) * (res.q_grid[i] - q0) / (q1 - q0);
        worst = std::max(worst, std::fabs(res.tau[i] - chord));
    }
    return worst;
}

}  // namespace

TEST_CASE("fluctuation_function") {
    const auto x = fgn(0.7, 1 << 13, 201);

    SUBCASE("q = 2 equals the dfa fluctuation") {
        const auto scales = default_scales(x.size(), ScalingMethod::DFA);
        const ScalingResult res = dfa(x, scales);
        for (size_t k = 0; k < scales.size(); ++k) {
            const double fq = fluctuation_function(x, scales[k], 2.0);
            CHECK(std::fabs(fq - res.fluctuations[k]) <= 1e-12 * res.fluctuations[k]);
        }
    }
    SUBCASE("matches the serial reference across q") {
        for (double q : {-4.0, -1.0, 0.0, 1.0, 3.0}) {
            const double a = fluctuation_function(x, 64, q);
            const double b = ref::fluctuation_function(x, 64, q);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
    SUBCASE("constant series is degenerate") {
        const std::vector<double> constant(4096, 2.0);
        CHECK_THROWS(fluctuation_function(constant, 16, 2.0));
        CHECK_THROWS(fluctuation_function(constant, 16, -2.0));
        CHECK_THROWS(fluctuation_function(constant, 16, 0.0));
    }
    SUBCASE("white noise is flat across moments") {
        const auto w = fgn(0.5, 1 << 16, 202);
        const auto scales = default_scales(w.size(), ScalingMethod::DFA);
        for (double q : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
            std::vector<double> fq;
            for (int s : scales) fq.push_back(fluctuation_function(w, s, q));
            const LogLogFit fit = fit_loglog(scales, fq);
            CHECK(std::fabs(fit.slope - 0.5) <= 0.03);
        }
    }
    SUBCASE("scale bounds enforced") {
        CHECK_THROWS(fluctuation_function(x, 9, 2.0));
        CHECK_THROWS(fluctuation_function(x, static_cast<int>(x.size()) / 6 + 1, 2.0));
    }
}

TEST_CASE("mfdfa on the binomial cascade") {
    const double p = 0.3;
    const auto x = cascade(p, 1 << 16);
    const auto grid = default_q_grid();
    const auto scales = dyadic_scales(x.size());
    const MultifractalResult res = mfdfa(x, grid, scales);

    SUBCASE("h(q) tracks the closed form") {
        for (double q : {-4.0, -2.0, -1.0, 1.0, 2.0, 4.0}) {
            size_t idx = grid.size();
            for (size_t i = 0; i < grid.size(); ++i)
                if (std::fabs(grid[i] - q) < 1e-9) idx = i;
            REQUIRE(idx < grid.size());
            CAPTURE(q);
            CHECK(std::fabs(res.h[idx] - oracles::cascade_h(q, p)) <= 0.05);
        }
        CHECK(oracles::cascade_h(2.0, p) == doctest::Approx(0.893).epsilon(1e-3));
    }
    SUBCASE("tau at q = 0 is exactly -1") {
        size_t zero = grid.size();
        for (size_t i = 0; i < grid.size(); ++i)
            if (grid[i] == 0.0) zero = i;
        REQUIRE(zero < grid.size());
        CHECK(res.tau[zero] == -1.0);
    }
    SUBCASE("spectrum width matches the closed form") {
        const double expected = oracles::cascade_delta_alpha(p);
        CHECK(expected == doctest::Approx(1.1426).epsilon(1e-3));
        CHECK(std::fabs(res.delta_alpha - expected) <= 0.1 * expected);
    }
    SUBCASE("tau is strongly nonlinear") { CHECK(chord_deviation(res) > 0.2); }
    SUBCASE("h is non-increasing and f peaks near 1") {
        for (size_t i = 1; i < res.h.size(); ++i) CHECK(res.h[i] <= res.h[i - 1] + 0.01);
        double fmax = -1e9;
        for (double f : res.f_alpha) {
            CHECK(f <= 1.05);
            fmax = std::max(fmax, f);
        }
        CHECK(std::fabs(fmax - 1.0) <= 0.05);
    }
}

TEST_CASE("mfdfa on a monofractal control") {
    const auto x = fgn(0.76, 1 << 16, 203);
    const auto grid = default_q_grid();
    const auto scales = default_scales(x.size(), ScalingMethod::DFA);
    const MultifractalResult res = mfdfa(x, grid, scales);

    for (double h : res.h) CHECK(std::fabs(h - 0.76) <= 0.05);
    CHECK(res.delta_alpha <= 0.2);
    CHECK(chord_deviation(res) < 0.05);

    SUBCASE("h(2) is consistent with the dfa estimate") {
        const ScalingResult sres = dfa(x, scales);
        size_t idx = grid.size();
        for (size_t i = 0; i < grid.size(); ++i)
            if (std::fabs(grid[i] - 2.0) < 1e-9) idx = i;
        REQUIRE(idx < grid.size());
        CHECK(std::fabs(res.h[idx] - sres.hurst) <= 0.01);
    }
}

TEST_CASE("mfdfa preconditions and flags") {
    SUBCASE("series too short") {
        const auto x = fgn(0.5, 256, 204);
        CHECK_THROWS(mfdfa(x, default_q_grid(), std::vector<int>{10, 20, 40}));
    }
    SUBCASE("q grid must cover -4, 0, 4") {
        const auto x = fgn(0.5, 1 << 12, 205);
        const auto scales = default_scales(x.size(), ScalingMethod::DFA);
        CHECK_THROWS(mfdfa(x, default_q_grid(-2.0, 2.0, 0.25), scales));
        CHECK_NOTHROW(mfdfa(x, default_q_grid(), scales));
    }
    SUBCASE("degenerate stretches are excluded and flagged") {
        auto x = fgn(0.5, 1 << 12, 206);
        for (size_t i = 500; i < 1000; ++i) x[i] = 4.0;  // long flat run
        const auto scales = default_scales(x.size(), ScalingMethod::DFA);
        const MultifractalResult res = mfdfa(x, default_q_grid(), scales);
        bool excluded_flag = false;
        for (const auto& f : res.flags)
            if (f.rfind("excluded_segments", 0) == 0) excluded_flag = true;
        CHECK(excluded_flag);
    }
    SUBCASE("constant series is an error") {
        const std::vector<double> constant(4096, 1.0);
        CHECK_THROWS(mfdfa(constant, default_q_grid(),
                           default_scales(constant.size(), ScalingMethod::DFA)));
    }
}

TEST_CASE("width shuffle test") {
    SUBCASE("uncorrelated monofractal input gives R near 0") {
        const auto x = fgn(0.5, 1 << 14, 207);
        const ShuffleReport rep = width_shuffle_test(x, 10, 31);
        REQUIRE(rep.residual.has_value());
        CHECK(std::fabs(*rep.residual) <= 0.1);
    }
    SUBCASE("long memory plus heavy tails gives positive residual") {
        GeneratorSpec spec;
        spec.kind = GeneratorKind::LongMemoryHeavyTail;
        spec.length = 1 << 15;
        spec.seed = 208;
        spec.hurst = 0.8;
        spec.scale = 7.9;
        spec.shape = 1.25;
        const auto d = gen_longmem_heavytail(spec);
        std::vector<double> x(d.begin(), d.end());
        const ShuffleReport rep = width_shuffle_test(x, 10, 32);
        REQUIRE(rep.residual.has_value());
        CHECK(rep.mean > 0.0);
        CHECK(*rep.residual > 0.0);
    }
    SUBCASE("deterministic in the seed") {
        const auto x = fgn(0.6, 1 << 13, 209);
        const ShuffleReport a = width_shuffle_test(x, 4, 5);
        const ShuffleReport b = width_shuffle_test(x, 4, 5);
        for (size_t i = 0; i < a.values.size(); ++i) REQUIRE(a.values[i] == b.values[i]);
        REQUIRE(a.residual.has_value());
        REQUIRE(b.residual.has_value());
        CHECK(*a.residual == *b.residual);
    }
}
