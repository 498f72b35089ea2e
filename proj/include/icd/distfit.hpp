#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace icd {

enum class Family : uint8_t { Weibull, QExponential };
enum class FitMethod : uint8_t { MLE, NLSE };
enum class ChiSpace : uint8_t { Log10, Linear };

const char* to_token(Family f);     // "weibull" / "qexp"
const char* to_token(FitMethod m);  // "mle" / "nlse"

// Two-parameter density. For Weibull, scale is a and shape is b > 0:
//   P(d) = (b/a) (d/a)^(b-1) exp(-(d/a)^b).
// For the q-exponential, scale is kappa and shape is q in (1,2):
//   P(d) = (1/kappa) [1 + (q-1) d/kappa]^(-q/(q-1)).
struct DistributionParams {
    Family family = Family::Weibull;
    double scale = 1.0;
    double shape = 1.0;
};

void validate(const DistributionParams& p);  // throws std::invalid_argument

double evaluate_pdf(const DistributionParams& p, double d);
double log_pdf(const DistributionParams& p, double d);  // natural log, -inf on underflow

// Inverse CDFs, u in [0,1).
double weibull_quantile(double u, double scale_a, double shape_b);
double qexp_quantile(double u, double scale_kappa, double shape_q);

enum class Binning : uint8_t {
    Unit,         // width-1 bins anchored at half-integers; samples must be >= 0.5
    Logarithmic,  // geometric bins, default ratio 10^0.1, anchored at the sample minimum
    Hybrid,       // unit bins up to unit_threshold, geometric above, sparse bins merged
};

struct BinningOptions {
    double unit_threshold = 30.0;
    double ratio = 1.2589254117941673;  // 10^0.1
    uint64_t min_count = 10;            // hybrid only: merge bins below this
};

// Histogram density estimate. Bins are stored as parallel (lower, upper)
// arrays so empty bins can be dropped; centers are the geometric mean of
// each bin's edges.
struct BinnedPdf {
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> centers;
    std::vector<double> densities;  // counts / (total * width)
    std::vector<uint64_t> counts;
    uint64_t total_count = 0;

    size_t bin_count() const { return counts.size(); }
};

BinnedPdf empirical_pdf(std::span<const double> samples, Binning binning,
                        const BinningOptions& opts = {});

struct FitResult {
    DistributionParams params;
    FitMethod method = FitMethod::MLE;
    double chi = 0.0;
    double log_likelihood = 0.0;  // NaN for NLSE
    bool converged = false;
    int iterations = 0;
};

struct FitOptions {
    double tolerance = 1e-8;
    int max_iterations = 4000;
    ChiSpace chi_space = ChiSpace::Log10;
    Binning chi_binning = Binning::Hybrid;  // scoring histogram for fit_mle
    BinningOptions binning;
};

// Maximum likelihood on raw samples (>= 100, all positive). Input order does
// not matter: samples are canonicalized before any accumulation, so every
// permutation yields bit-identical results.
FitResult fit_mle(std::span<const double> samples, Family family, const FitOptions& opts = {});

// Least squares between log10 fitted and log10 empirical density over the
// occupied bins, each bin weighted equally.
FitResult fit_nlse(const BinnedPdf& pdf, Family family, const FitOptions& opts = {});

// Root mean square of the per-bin discrepancy, in log10 density by default.
double chi_rms(const DistributionParams& p, const BinnedPdf& pdf,
               ChiSpace space = ChiSpace::Log10);

struct ComparisonReport {
    int preferred = -1;      // 0 = first fit, 1 = second fit, -1 = indistinguishable
    double chi_delta = 0.0;  // chi_a - chi_b
    std::string text;
};

// Prefers the smaller chi; meaningful only for fits scored on the same
// histogram with the same method. |delta| < 1e-12 counts as a tie.
ComparisonReport compare(const FitResult& a, const FitResult& b);

}  // namespace icd
