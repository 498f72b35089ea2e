#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "icd/distfit.hpp"
#include "icd/rng.hpp"
#include "icd/synth.hpp"
#include "oracles.hpp"

using namespace icd;

namespace {

std::vector<double> qexp_sample(double kappa, double q, size_t n, uint64_t seed) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::QExpIID;
    spec.scale = kappa;
    spec.shape = q;
    spec.length = n;
    spec.seed = seed;
    return gen_iid(spec);
}

std::vector<double> weibull_sample(double a, double b, size_t n, uint64_t seed) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::WeibullIID;
    spec.scale = a;
    spec.shape = b;
    spec.length = n;
    spec.seed = seed;
    return gen_iid(spec);
}

// exact-density histogram on a geometric grid
BinnedPdf exact_pdf(const DistributionParams& params, double lo, double hi, int bins) {
    BinnedPdf pdf;
    const double ratio = std::pow(hi / lo, 1.0 / bins);
    double edge = lo;
    for (int i = 0; i < bins; ++i) {
        const double next = edge * ratio;
        pdf.lower.push_back(edge);
        pdf.upper.push_back(next);
        pdf.centers.push_back(std::sqrt(edge * next));
        pdf.densities.push_back(evaluate_pdf(params, pdf.centers.back()));
        pdf.counts.push_back(1000);
        edge = next;
    }
    pdf.total_count = 1000ULL * static_cast<uint64_t>(bins);
    return pdf;
}

}  // namespace

TEST_CASE("evaluate_pdf") {
    CHECK(evaluate_pdf({Family::Weibull, 1.0, 1.0}, 1.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(evaluate_pdf({Family::QExponential, 2.0, 1.5}, 0.0) == doctest::Approx(0.5));
    CHECK_THROWS(evaluate_pdf({Family::Weibull, 1.0, 0.7}, 0.0));
    CHECK_THROWS(evaluate_pdf({Family::Weibull, -1.0, 1.0}, 1.0));
    CHECK_THROWS(evaluate_pdf({Family::QExponential, 1.0, 2.5}, 1.0));

    SUBCASE("q-exponential normalization by quadrature") {
        const DistributionParams params{Family::QExponential, 9.13, 1.22};
        const double total = oracles::integrate_half_line(
            [&](double d) { return evaluate_pdf(params, d); }, params.scale);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("density normalization across the parameter grids") {
    SUBCASE("q-exponential") {
        for (double q : {1.05, 1.22, 1.4, 1.6, 1.9}) {
            for (double kappa : {0.5, 4.0, 9.13, 20.0}) {
                const DistributionParams params{Family::QExponential, kappa, q};
                const double total = oracles::integrate_half_line(
                    [&](double d) { return evaluate_pdf(params, d); }, kappa);
                CAPTURE(q);
                CAPTURE(kappa);
                CHECK(std::fabs(total - 1.0) <= 1e-6);
            }
        }
    }
    SUBCASE("weibull") {
        for (double b : {0.4, 0.6, 0.91, 1.3, 2.0}) {
            for (double a : {0.5, 4.0, 11.21, 20.0}) {
                const DistributionParams params{Family::Weibull, a, b};
                const double total = oracles::integrate_half_line(
                    [&](double d) { return evaluate_pdf(params, d); }, a);
                CAPTURE(b);
                CAPTURE(a);
                CHECK(std::fabs(total - 1.0) <= 1e-6);
            }
        }
    }
}

TEST_CASE("q-exponential tends to the exponential as q -> 1") {
    const double kappa = 3.0;
    const DistributionParams params{Family::QExponential, kappa, 1.0 + 1e-5};
    for (double d = 0.0; d <= 10.0 * kappa; d += kappa / 3.0) {
        const double expref = std::exp(-d / kappa) / kappa;
        CHECK(std::fabs(evaluate_pdf(params, d) - expref) <= 1e-4);
    }
}

TEST_CASE("empirical_pdf") {
    SUBCASE("unit bins on a four-sample input") {
        const std::vector<double> samples{1.0, 1.0, 2.0, 2.0};
        const BinnedPdf pdf = empirical_pdf(samples, Binning::Unit);
        REQUIRE(pdf.bin_count() == 2);
        CHECK(pdf.densities[0] == doctest::Approx(0.5));
        CHECK(pdf.densities[1] == doctest::Approx(0.5));
        CHECK(pdf.lower[0] < 1.0);
        CHECK(pdf.upper[0] > 1.0);
    }
    SUBCASE("interior empty unit bins are dropped") {
        const std::vector<double> samples{1.0, 1.0, 3.0, 3.0};
        const BinnedPdf pdf = empirical_pdf(samples, Binning::Unit);
        REQUIRE(pdf.bin_count() == 2);
        CHECK(pdf.densities[0] == doctest::Approx(0.5));
        CHECK(pdf.densities[1] == doctest::Approx(0.5));
    }
    SUBCASE("rectangle rule covers at most 1") {
        auto samples = qexp_sample(9.13, 1.22, 50'000, 41);
        for (double& x : samples) x = std::max(1.0, std::ceil(x));  // duration-like
        for (Binning binning : {Binning::Unit, Binning::Logarithmic, Binning::Hybrid}) {
            const BinnedPdf pdf = empirical_pdf(samples, binning);
            double integral = 0.0;
            uint64_t covered = 0;
            for (size_t i = 0; i < pdf.bin_count(); ++i) {
                integral += pdf.densities[i] * (pdf.upper[i] - pdf.lower[i]);
                covered += pdf.counts[i];
                CHECK(pdf.lower[i] > 0.0);
                CHECK(pdf.upper[i] > pdf.lower[i]);
                if (i > 0) CHECK(pdf.lower[i] >= pdf.upper[i - 1] - 1e-12);
            }
            CHECK(integral <= 1.0 + 1e-9);
            CHECK(integral >= static_cast<double>(covered) /
                                  static_cast<double>(samples.size()) - 1e-9);
        }
    }
    SUBCASE("hybrid merges sparse tail bins") {
        auto samples = qexp_sample(9.13, 1.22, 100'000, 43);
        for (double& x : samples) x = std::max(1.0, std::ceil(x));
        const BinnedPdf pdf = empirical_pdf(samples, Binning::Hybrid);
        for (size_t i = 0; i + 1 < pdf.bin_count(); ++i) CHECK(pdf.counts[i] >= 10);
        CHECK(pdf.lower.front() == 0.5);  // unit section engaged
    }
    SUBCASE("log-binned density tracks the true pdf") {
        const DistributionParams params{Family::QExponential, 9.13, 1.22};
        const auto samples = qexp_sample(params.scale, params.shape, 100'000, 47);
        const BinnedPdf pdf = empirical_pdf(samples, Binning::Logarithmic);
        for (size_t i = 0; i < pdf.bin_count(); ++i) {
            if (pdf.counts[i] < 100) continue;
            const double expected = evaluate_pdf(params, pdf.centers[i]);
            CHECK(pdf.densities[i] == doctest::Approx(expected).epsilon(0.10));
        }
    }
    SUBCASE("rejects bad inputs") {
        CHECK_THROWS(empirical_pdf(std::vector<double>{}, Binning::Unit));
        CHECK_THROWS(empirical_pdf(std::vector<double>{0.0, 1.0}, Binning::Unit));
        CHECK_THROWS(empirical_pdf(std::vector<double>{0.2, 1.0}, Binning::Unit));
    }
}

TEST_CASE("mle recovery") {
    SUBCASE("weibull") {
        const auto samples = weibull_sample(11.21, 0.91, 100'000, 51);
        const FitResult fit = fit_mle(samples, Family::Weibull);
        CHECK(fit.converged);
        CHECK(fit.params.scale == doctest::Approx(11.21).epsilon(0.02));
        CHECK(fit.params.shape == doctest::Approx(0.91).epsilon(0.02));
        CHECK(std::isfinite(fit.log_likelihood));
    }
    SUBCASE("q-exponential") {
        const auto samples = qexp_sample(9.13, 1.22, 100'000, 52);
        const FitResult fit = fit_mle(samples, Family::QExponential);
        CHECK(fit.converged);
        CHECK(fit.params.scale == doctest::Approx(9.13).epsilon(0.03));
        CHECK(fit.params.shape == doctest::Approx(1.22).epsilon(0.03));
    }
    SUBCASE("constant sample runs the shape into the bound") {
        const std::vector<double> samples(200, 5.0);
        const FitResult fit = fit_mle(samples, Family::Weibull);
        CHECK(!fit.converged);
        CHECK(fit.params.shape >= 1e3);
    }
    SUBCASE("preconditions") {
        const std::vector<double> few(50, 1.0);
        CHECK_THROWS(fit_mle(few, Family::Weibull));
        std::vector<double> with_zero(200, 1.0);
        with_zero[17] = 0.0;
        CHECK_THROWS(fit_mle(with_zero, Family::Weibull));
    }
}

TEST_CASE("mle is permutation invariant bit for bit") {
    auto samples = qexp_sample(7.9, 1.25, 5'000, 53);
    const FitResult base = fit_mle(samples, Family::QExponential);
    Rng rng(99);
    shuffle_in_place(std::span<double>(samples), rng);
    const FitResult shuffled = fit_mle(samples, Family::QExponential);
    CHECK(base.params.scale == shuffled.params.scale);
    CHECK(base.params.shape == shuffled.params.shape);
    CHECK(base.chi == shuffled.chi);
    CHECK(base.log_likelihood == shuffled.log_likelihood);
}

TEST_CASE("mle consistency: error shrinks with sample size") {
    const double kappa = 9.13, q = 1.22;
    double previous = 1e9;
    for (size_t n : {1'000UL, 10'000UL, 100'000UL, 1'000'000UL}) {
        double err = 0.0;
        for (uint64_t seed = 60; seed < 64; ++seed) {
            const FitResult fit = fit_mle(qexp_sample(kappa, q, n, seed), Family::QExponential);
            err += std::fabs(fit.params.scale - kappa) / kappa +
                   std::fabs(fit.params.shape - q) / q;
        }
        CHECK(err < previous);
        previous = err;
    }
}

TEST_CASE("scale equivariance of both fits") {
    const double c = 3.7;
    SUBCASE("mle") {
        const auto base = weibull_sample(6.5, 0.6, 20'000, 71);
        std::vector<double> scaled(base);
        for (double& x : scaled) x *= c;
        const FitResult f0 = fit_mle(base, Family::Weibull);
        const FitResult f1 = fit_mle(scaled, Family::Weibull);
        CHECK(f1.params.scale / f0.params.scale == doctest::Approx(c).epsilon(1e-6));
        CHECK(f1.params.shape == doctest::Approx(f0.params.shape).epsilon(1e-6));

        const auto qbase = qexp_sample(7.9, 1.25, 20'000, 72);
        std::vector<double> qscaled(qbase);
        for (double& x : qscaled) x *= c;
        const FitResult g0 = fit_mle(qbase, Family::QExponential);
        const FitResult g1 = fit_mle(qscaled, Family::QExponential);
        CHECK(g1.params.scale / g0.params.scale == doctest::Approx(c).epsilon(1e-6));
        CHECK(g1.params.shape == doctest::Approx(g0.params.shape).epsilon(1e-6));
    }
    SUBCASE("nlse via sample-anchored log binning") {
        const auto base = qexp_sample(7.9, 1.25, 50'000, 73);
        std::vector<double> scaled(base);
        for (double& x : scaled) x *= c;
        const FitResult f0 = fit_nlse(empirical_pdf(base, Binning::Logarithmic),
                                      Family::QExponential);
        const FitResult f1 = fit_nlse(empirical_pdf(scaled, Binning::Logarithmic),
                                      Family::QExponential);
        CHECK(f1.params.scale / f0.params.scale == doctest::Approx(c).epsilon(1e-6));
        CHECK(f1.params.shape == doctest::Approx(f0.params.shape).epsilon(1e-6));

        const FitResult w0 = fit_nlse(empirical_pdf(base, Binning::Logarithmic), Family::Weibull);
        const FitResult w1 =
            fit_nlse(empirical_pdf(scaled, Binning::Logarithmic), Family::Weibull);
        CHECK(w1.params.scale / w0.params.scale == doctest::Approx(c).epsilon(1e-6));
        CHECK(w1.params.shape == doctest::Approx(w0.params.shape).epsilon(1e-6));
    }
}

TEST_CASE("nlse self consistency on exact densities") {
    SUBCASE("weibull") {
        const DistributionParams truth{Family::Weibull, 6.5, 0.6};
        const BinnedPdf pdf = exact_pdf(truth, 0.5, 2000.0, 40);
        const FitResult fit = fit_nlse(pdf, Family::Weibull);
        CHECK(fit.converged);
        CHECK(fit.params.scale == doctest::Approx(6.5).epsilon(0.001));
        CHECK(fit.params.shape == doctest::Approx(0.6).epsilon(0.001));
        CHECK(fit.chi <= 1e-6);
    }
    SUBCASE("q-exponential") {
        const DistributionParams truth{Family::QExponential, 8.79, 1.25};
        const BinnedPdf pdf = exact_pdf(truth, 0.5, 2000.0, 40);
        const FitResult fit = fit_nlse(pdf, Family::QExponential);
        CHECK(fit.converged);
        CHECK(fit.params.scale == doctest::Approx(8.79).epsilon(0.001));
        CHECK(fit.params.shape == doctest::Approx(1.25).epsilon(0.001));
    }
    SUBCASE("too few bins is an error") {
        const DistributionParams truth{Family::Weibull, 6.5, 0.6};
        const BinnedPdf pdf = exact_pdf(truth, 0.5, 10.0, 4);
        CHECK_THROWS(fit_nlse(pdf, Family::Weibull));
    }
}

TEST_CASE("chi_rms") {
    const DistributionParams truth{Family::QExponential, 9.0, 1.3};
    const BinnedPdf pdf = exact_pdf(truth, 0.5, 1000.0, 30);

    SUBCASE("exact parameters give chi = 0") {
        CHECK(chi_rms(truth, pdf) == doctest::Approx(0.0).epsilon(1e-10));
    }
    SUBCASE("the nlse minimizer is chi-optimal") {
        const auto samples = qexp_sample(9.0, 1.3, 50'000, 81);
        const BinnedPdf epdf = empirical_pdf(samples, Binning::Hybrid);
        const FitResult best = fit_nlse(epdf, Family::QExponential);
        for (double dk : {-0.4, 0.3}) {
            for (double dq : {-0.05, 0.04}) {
                DistributionParams other = best.params;
                other.scale += dk;
                other.shape += dq;
                CHECK(chi_rms(other, epdf) >= best.chi - 1e-12);
            }
        }
    }
    SUBCASE("mle chi ordering on q-exponential data") {
        const auto samples = qexp_sample(9.13, 1.22, 100'000, 82);
        const FitResult qfit = fit_mle(samples, Family::QExponential);
        const FitResult wfit = fit_mle(samples, Family::Weibull);
        CHECK(qfit.chi < wfit.chi);
        const ComparisonReport rep = compare(wfit, qfit);
        CHECK(rep.preferred == 1);
    }
}

TEST_CASE("compare") {
    FitResult a, b;
    a.chi = 0.0057;
    b.chi = 0.0075;
    a.params.family = Family::QExponential;
    b.params.family = Family::Weibull;
    CHECK(compare(a, b).preferred == 0);
    CHECK(compare(b, a).preferred == 1);
    b.chi = a.chi;
    CHECK(compare(a, b).preferred == -1);
    CHECK(compare(a, a).preferred == -1);
}
