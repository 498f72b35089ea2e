// Batch front end: order-flow ingestion, inter-cancellation duration
// extraction, distribution fits, Hurst and multifractal estimation, shuffle
// nulls, and the synthetic-data generators.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "icd/pipeline.hpp"

namespace fs = std::filesystem;
using namespace icd;

namespace {

std::vector<double> read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open series file: " + path);
    std::vector<double> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        double value = 0.0;
        const auto res = std::from_chars(line.data(), line.data() + line.size(), value);
        if (res.ec != std::errc{} || res.ptr != line.data() + line.size())
            throw std::runtime_error(path + ": unparseable value at line " +
                                     std::to_string(line_no));
        out.push_back(value);
    }
    return out;
}

void write_text(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << contents;
    }
    fs::rename(tmp, path);
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 10);
    return std::string(buf, res.ptr);
}

struct GlobalFlags {
    std::string config_path;
    uint64_t seed = 42;
    std::string out;
    std::string format = "tsv";
    int workers = 1;
    std::string day_policy = "reset";
    std::string chi_space = "log";
};

void apply_workers(int workers) {
#ifdef _OPENMP
    if (workers > 0) omp_set_num_threads(workers);
#else
    (void)workers;
#endif
}

Side parse_side(const std::string& s) {
    if (s == "buy") return Side::Buy;
    if (s == "sell") return Side::Sell;
    throw CLI::ValidationError("--side", "expected buy or sell");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inter-cancellation duration statistics toolkit"};
    app.require_subcommand(1);

    GlobalFlags flags;
    app.add_option("--config", flags.config_path, "JSON run configuration");
    app.add_option("--seed", flags.seed, "base seed");
    app.add_option("--out", flags.out, "output directory or file");
    app.add_option("--format", flags.format, "tsv|json")
        ->check(CLI::IsMember({"tsv", "json"}));
    app.add_option("--workers", flags.workers, "worker thread count");
    app.add_option("--day-policy", flags.day_policy, "reset|continuous")
        ->check(CLI::IsMember({"reset", "continuous"}));
    app.add_option("--chi-space", flags.chi_space, "log|linear")
        ->check(CLI::IsMember({"log", "linear"}));
    app.fallthrough();

    // --- run -----------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "full pipeline over inputs or generators");
    std::vector<std::string> run_inputs;
    int run_replicates = -1;
    run_cmd->add_option("--inputs", run_inputs, "order-flow CSV files");
    run_cmd->add_option("--replicates", run_replicates, "shuffle replicates");

    // --- extract ---------------------------------------------------------------
    auto* extract_cmd = app.add_subcommand("extract", "durations and count statistics");
    std::string extract_input, extract_side = "both";
    extract_cmd->add_option("--input", extract_input, "order-flow CSV")->required();
    extract_cmd->add_option("--side", extract_side, "buy|sell|both")
        ->check(CLI::IsMember({"buy", "sell", "both"}));

    // --- fit -------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "distribution fits on a duration series");
    std::string fit_input, fit_family = "both", fit_method = "both", fit_binning = "hybrid";
    fit_cmd->add_option("--input", fit_input, "series file, one value per line")->required();
    fit_cmd->add_option("--family", fit_family, "weibull|qexp|both")
        ->check(CLI::IsMember({"weibull", "qexp", "both"}));
    fit_cmd->add_option("--method", fit_method, "mle|nlse|both")
        ->check(CLI::IsMember({"mle", "nlse", "both"}));
    fit_cmd->add_option("--binning", fit_binning, "hybrid|log|unit")
        ->check(CLI::IsMember({"hybrid", "log", "unit"}));

    // --- dfa / cdma -------------------------------------------------------------
    auto* dfa_cmd = app.add_subcommand("dfa", "detrended fluctuation analysis");
    auto* cdma_cmd = app.add_subcommand("cdma", "centered detrending moving average");
    std::string scaling_input, scaling_dump;
    int scale_count = 20;
    for (auto* cmd : {dfa_cmd, cdma_cmd}) {
        cmd->add_option("--input", scaling_input, "series file")->required();
        cmd->add_option("--scale-count", scale_count, "points on the scale grid");
        cmd->add_option("--dump", scaling_dump, "write per-scale s F(s) table here");
    }

    // --- mfdfa -------------------------------------------------------------------
    auto* mf_cmd = app.add_subcommand("mfdfa", "multifractal spectrum");
    std::string mf_input, mf_dump;
    double q_min = -4.0, q_max = 4.0, q_step = 0.25;
    mf_cmd->add_option("--input", mf_input, "series file")->required();
    mf_cmd->add_option("--q-min", q_min, "lowest moment order");
    mf_cmd->add_option("--q-max", q_max, "highest moment order");
    mf_cmd->add_option("--q-step", q_step, "grid step");
    mf_cmd->add_option("--scale-count", scale_count, "points on the scale grid");
    mf_cmd->add_option("--dump", mf_dump, "write q/h/tau/alpha/f table here");

    // --- shuffle ------------------------------------------------------------------
    auto* shuffle_cmd = app.add_subcommand("shuffle", "shuffle null test");
    std::string shuffle_input, shuffle_estimator = "dfa";
    int replicates = 100;
    shuffle_cmd->add_option("--input", shuffle_input, "series file")->required();
    shuffle_cmd->add_option("--estimator", shuffle_estimator, "dfa|cdma|width")
        ->check(CLI::IsMember({"dfa", "cdma", "width"}));
    shuffle_cmd->add_option("--replicates", replicates, "number of permutations");

    // --- synth ----------------------------------------------------------------------
    auto* synth_cmd = app.add_subcommand("synth", "synthetic series and flows");
    std::string synth_kind;
    size_t synth_n = 0;
    int synth_days = 1;
    double a = 1.0, b = 1.0, kappa = 1.0, qshape = 1.3, hurst = 0.5, cascade_p = 0.3;
    double pbs = 0.42, pbc = 0.08, pss = 0.42, psc = 0.08;
    synth_cmd
        ->add_option("--kind", synth_kind,
                     "weibull_iid|qexp_iid|fgn|cascade|poisson_flow|longmem_heavytail")
        ->required()
        ->check(CLI::IsMember({"weibull_iid", "qexp_iid", "fgn", "cascade", "poisson_flow",
                               "longmem_heavytail"}));
    synth_cmd->add_option("--n", synth_n, "output length")->required();
    synth_cmd->add_option("--days", synth_days, "day blocks for flows");
    synth_cmd->add_option("--a", a, "weibull scale");
    synth_cmd->add_option("--b", b, "weibull shape");
    synth_cmd->add_option("--kappa", kappa, "q-exponential scale");
    synth_cmd->add_option("--q", qshape, "q-exponential shape");
    synth_cmd->add_option("--hurst", hurst, "target Hurst exponent");
    synth_cmd->add_option("--p", cascade_p, "cascade mass split");
    synth_cmd->add_option("--p-buy-submit", pbs, "");
    synth_cmd->add_option("--p-buy-cancel", pbc, "");
    synth_cmd->add_option("--p-sell-submit", pss, "");
    synth_cmd->add_option("--p-sell-cancel", psc, "");

    CLI11_PARSE(app, argc, argv);
    apply_workers(flags.workers);

    try {
        if (run_cmd->parsed()) {
            RunConfig config;
            if (!flags.config_path.empty()) config = load_config(flags.config_path);
            if (!run_inputs.empty()) config.inputs = run_inputs;
            if (app.count("--seed")) config.base_seed = flags.seed;
            if (!flags.out.empty()) config.out_dir = flags.out;
            if (app.count("--format"))
                config.format = flags.format == "json" ? OutputFormat::Json : OutputFormat::Tsv;
            if (app.count("--workers")) config.workers = flags.workers;
            if (app.count("--day-policy"))
                config.day_policy = flags.day_policy == "continuous"
                                        ? DayPolicy::Continuous
                                        : DayPolicy::ResetAtDayBoundary;
            if (app.count("--chi-space"))
                config.chi_space =
                    flags.chi_space == "linear" ? ChiSpace::Linear : ChiSpace::Log10;
            if (run_replicates > 0) config.shuffle_replicates = run_replicates;
            const RunReport report = run_pipeline(config);
            for (const auto& err : report.errors)
                std::cerr << err.unit << ": " << err.message << "\n";
            return report.exit_code;
        }

        if (extract_cmd->parsed()) {
            const EventStream stream = parse_order_flow_file(extract_input);
            const DayPolicy policy = flags.day_policy == "continuous"
                                         ? DayPolicy::Continuous
                                         : DayPolicy::ResetAtDayBoundary;
            const std::string stock = fs::path(extract_input).stem().string();
            std::vector<Side> sides;
            if (extract_side == "both") sides = {Side::Buy, Side::Sell};
            else sides = {parse_side(extract_side)};

            std::string table = "stock\tside\tN_C\tN_A\tr\tgamma\tmean_d\n";
            for (Side side : sides) {
                const DurationSeries series = extract_durations(stream, side, policy);
                const CancellationStats stats = compute_stats(stream, side, series);
                table += stock + "\t" + to_name(side) + "\t" + std::to_string(stats.cancels) +
                         "\t" + std::to_string(stats.orders) + "\t" + fmt(stats.ratio) + "\t" +
                         (stats.gamma ? fmt(*stats.gamma) : std::string("na")) + "\t" +
                         fmt(stats.mean_duration) + "\n";
                if (!flags.out.empty()) {
                    fs::create_directories(flags.out);
                    std::string body;
                    for (uint64_t d : series.durations) body += std::to_string(d) + "\n";
                    write_text((fs::path(flags.out) /
                                (stock + "_" + to_name(side) + "_durations.txt"))
                                   .string(),
                               body);
                }
            }
            std::cout << table;
            return 0;
        }

        if (fit_cmd->parsed()) {
            const std::vector<double> samples = read_series(fit_input);
            const Binning binning = fit_binning == "log" ? Binning::Logarithmic
                                    : fit_binning == "unit" ? Binning::Unit
                                                            : Binning::Hybrid;
            FitOptions opts;
            opts.chi_space = flags.chi_space == "linear" ? ChiSpace::Linear : ChiSpace::Log10;
            opts.chi_binning = binning;

            std::vector<FitMethod> methods;
            if (fit_method == "both") methods = {FitMethod::MLE, FitMethod::NLSE};
            else methods = {fit_method == "mle" ? FitMethod::MLE : FitMethod::NLSE};
            std::vector<Family> families;
            if (fit_family == "both") families = {Family::Weibull, Family::QExponential};
            else families = {fit_family == "weibull" ? Family::Weibull : Family::QExponential};

            std::cout << "method\tfamily\tp_scale\tp_shape\tchi\tconverged\n";
            const std::string stem = fs::path(fit_input).stem().string();
            for (FitMethod method : methods) {
                BinnedPdf pdf;
                if (method == FitMethod::NLSE) pdf = empirical_pdf(samples, binning);
                for (Family family : families) {
                    const FitResult fit = method == FitMethod::MLE
                                              ? fit_mle(samples, family, opts)
                                              : fit_nlse(pdf, family, opts);
                    std::cout << to_token(method) << "\t" << to_token(family) << "\t"
                              << fmt(fit.params.scale) << "\t" << fmt(fit.params.shape) << "\t"
                              << fmt(fit.chi) << "\t" << (fit.converged ? 1 : 0) << "\n";
                }
            }
            return 0;
        }

        if (dfa_cmd->parsed() || cdma_cmd->parsed()) {
            const std::vector<double> series = read_series(scaling_input);
            const ScalingMethod method =
                dfa_cmd->parsed() ? ScalingMethod::DFA : ScalingMethod::CDMA;
            const auto scales = default_scales(series.size(), method, scale_count);
            const ScalingResult res =
                method == ScalingMethod::DFA ? dfa(series, scales) : cdma(series, scales);
            std::cout << "method\tH\tse\tr_squared\treliable\ts_min\ts_max\n";
            std::cout << to_token(method) << "\t" << fmt(res.hurst) << "\t" << fmt(res.slope_se)
                      << "\t" << fmt(res.r_squared) << "\t" << (res.reliable ? 1 : 0) << "\t"
                      << res.fit_range.first << "\t" << res.fit_range.second << "\n";
            if (!scaling_dump.empty()) {
                std::string t = "s\tF\n";
                for (size_t i = 0; i < res.scales.size(); ++i)
                    t += std::to_string(res.scales[i]) + "\t" + fmt(res.fluctuations[i]) + "\n";
                write_text(scaling_dump, t);
            }
            return 0;
        }

        if (mf_cmd->parsed()) {
            const std::vector<double> series = read_series(mf_input);
            const auto grid = default_q_grid(q_min, q_max, q_step);
            const auto scales = default_scales(series.size(), ScalingMethod::DFA, scale_count);
            const MultifractalResult res = mfdfa(series, grid, scales);
            std::cout << "delta_alpha\t" << fmt(res.delta_alpha) << "\n";
            std::cout << "q_range\t" << fmt(grid.front()) << ".." << fmt(grid.back()) << "\n";
            for (const auto& flag : res.flags) std::cout << "flag\t" << flag << "\n";
            if (!mf_dump.empty()) {
                std::string t = "q\th\ttau\talpha\tf\n";
                for (size_t i = 0; i < res.q_grid.size(); ++i)
                    t += fmt(res.q_grid[i]) + "\t" + fmt(res.h[i]) + "\t" + fmt(res.tau[i]) +
                         "\t" + fmt(res.alpha[i]) + "\t" + fmt(res.f_alpha[i]) + "\n";
                write_text(mf_dump, t);
            }
            return 0;
        }

        if (shuffle_cmd->parsed()) {
            const std::vector<double> series = read_series(shuffle_input);
            ShuffleReport rep;
            if (shuffle_estimator == "width") {
                rep = width_shuffle_test(series, replicates, flags.seed);
            } else {
                rep = shuffle_test(series,
                                   shuffle_estimator == "dfa" ? ShuffleEstimator::DFA
                                                              : ShuffleEstimator::CDMA,
                                   replicates, flags.seed);
            }
            std::cout << "estimator\treplicates\tmean\tstd" << (rep.residual ? "\tR" : "")
                      << "\n";
            std::cout << to_token(rep.estimator) << "\t" << rep.n_replicates << "\t"
                      << fmt(rep.mean) << "\t" << fmt(rep.stddev);
            if (rep.residual) std::cout << "\t" << fmt(*rep.residual);
            std::cout << "\n";
            return 0;
        }

        if (synth_cmd->parsed()) {
            if (flags.out.empty()) throw std::runtime_error("synth: --out FILE is required");
            GeneratorSpec spec;
            spec.length = synth_n;
            spec.seed = flags.seed;
            spec.days = synth_days;
            std::string body;
            if (synth_kind == "weibull_iid" || synth_kind == "qexp_iid") {
                spec.kind = synth_kind == "weibull_iid" ? GeneratorKind::WeibullIID
                                                        : GeneratorKind::QExpIID;
                spec.scale = synth_kind == "weibull_iid" ? a : kappa;
                spec.shape = synth_kind == "weibull_iid" ? b : qshape;
                for (double v : gen_iid(spec)) body += fmt(v) + "\n";
            } else if (synth_kind == "fgn") {
                spec.kind = GeneratorKind::FGN;
                spec.hurst = hurst;
                for (double v : gen_fgn(spec)) body += fmt(v) + "\n";
            } else if (synth_kind == "cascade") {
                spec.kind = GeneratorKind::BinomialCascade;
                spec.cascade_p = cascade_p;
                for (double v : gen_cascade(spec)) body += fmt(v) + "\n";
            } else if (synth_kind == "poisson_flow") {
                spec.kind = GeneratorKind::PoissonFlow;
                spec.p_buy_submit = pbs;
                spec.p_buy_cancel = pbc;
                spec.p_sell_submit = pss;
                spec.p_sell_cancel = psc;
                body = serialize_order_flow(gen_poisson_flow(spec));
            } else {
                spec.kind = GeneratorKind::LongMemoryHeavyTail;
                spec.hurst = hurst;
                spec.scale = kappa;
                spec.shape = qshape;
                for (uint64_t v : gen_longmem_heavytail(spec)) body += std::to_string(v) + "\n";
            }
            write_text(flags.out, body);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
