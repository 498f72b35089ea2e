#include "icd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "format.hpp"
#include "icd/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace icd {

namespace {

// --- token maps ------------------------------------------------------------

Side side_from(const std::string& s) {
    if (s == "buy") return Side::Buy;
    if (s == "sell") return Side::Sell;
    throw std::invalid_argument("config: unknown side '" + s + "'");
}

DayPolicy policy_from(const std::string& s) {
    if (s == "reset") return DayPolicy::ResetAtDayBoundary;
    if (s == "continuous") return DayPolicy::Continuous;
    throw std::invalid_argument("config: unknown day_policy '" + s + "'");
}

FitMethod method_from(const std::string& s) {
    if (s == "mle") return FitMethod::MLE;
    if (s == "nlse") return FitMethod::NLSE;
    throw std::invalid_argument("config: unknown fit method '" + s + "'");
}

Family family_from(const std::string& s) {
    if (s == "weibull") return Family::Weibull;
    if (s == "qexp") return Family::QExponential;
    throw std::invalid_argument("config: unknown family '" + s + "'");
}

GeneratorKind kind_from(const std::string& s) {
    if (s == "weibull_iid") return GeneratorKind::WeibullIID;
    if (s == "qexp_iid") return GeneratorKind::QExpIID;
    if (s == "fgn") return GeneratorKind::FGN;
    if (s == "cascade") return GeneratorKind::BinomialCascade;
    if (s == "poisson_flow") return GeneratorKind::PoissonFlow;
    if (s == "longmem_heavytail") return GeneratorKind::LongMemoryHeavyTail;
    throw std::invalid_argument("config: unknown generator kind '" + s + "'");
}

const char* policy_token(DayPolicy p) {
    return p == DayPolicy::ResetAtDayBoundary ? "reset" : "continuous";
}
const char* format_token(OutputFormat f) { return f == OutputFormat::Tsv ? "tsv" : "json"; }
const char* chi_space_token(ChiSpace c) { return c == ChiSpace::Log10 ? "log" : "linear"; }

json generator_to_json(const GeneratorSpec& g, const std::string& name) {
    json j;
    j["name"] = name;
    j["kind"] = to_token(g.kind);
    j["length"] = g.length;
    j["seed"] = g.seed;
    switch (g.kind) {
        case GeneratorKind::WeibullIID:
            j["a"] = g.scale;
            j["b"] = g.shape;
            break;
        case GeneratorKind::QExpIID:
            j["kappa"] = g.scale;
            j["q"] = g.shape;
            break;
        case GeneratorKind::FGN:
            j["hurst"] = g.hurst;
            break;
        case GeneratorKind::BinomialCascade:
            j["p"] = g.cascade_p;
            break;
        case GeneratorKind::PoissonFlow:
            j["p_buy_submit"] = g.p_buy_submit;
            j["p_buy_cancel"] = g.p_buy_cancel;
            j["p_sell_submit"] = g.p_sell_submit;
            j["p_sell_cancel"] = g.p_sell_cancel;
            j["days"] = g.days;
            break;
        case GeneratorKind::LongMemoryHeavyTail:
            j["hurst"] = g.hurst;
            j["kappa"] = g.scale;
            j["q"] = g.shape;
            j["days"] = g.days;
            break;
    }
    return j;
}

GeneratorSpec generator_from_json(const json& j, std::string& name) {
    GeneratorSpec g;
    g.kind = kind_from(j.at("kind").get<std::string>());
    name = j.value("name", std::string(to_token(g.kind)));
    g.length = j.at("length").get<size_t>();
    g.seed = j.value("seed", uint64_t{0});
    switch (g.kind) {
        case GeneratorKind::WeibullIID:
            g.scale = j.at("a").get<double>();
            g.shape = j.at("b").get<double>();
            break;
        case GeneratorKind::QExpIID:
            g.scale = j.at("kappa").get<double>();
            g.shape = j.at("q").get<double>();
            break;
        case GeneratorKind::FGN:
            g.hurst = j.at("hurst").get<double>();
            break;
        case GeneratorKind::BinomialCascade:
            g.cascade_p = j.at("p").get<double>();
            break;
        case GeneratorKind::PoissonFlow:
            g.p_buy_submit = j.value("p_buy_submit", g.p_buy_submit);
            g.p_buy_cancel = j.value("p_buy_cancel", g.p_buy_cancel);
            g.p_sell_submit = j.value("p_sell_submit", g.p_sell_submit);
            g.p_sell_cancel = j.value("p_sell_cancel", g.p_sell_cancel);
            g.days = j.value("days", 1);
            break;
        case GeneratorKind::LongMemoryHeavyTail:
            g.hurst = j.at("hurst").get<double>();
            g.scale = j.at("kappa").get<double>();
            g.shape = j.at("q").get<double>();
            g.days = j.value("days", 1);
            break;
    }
    return g;
}

json config_to_json(const RunConfig& c, bool include_out) {
    json j;
    j["inputs"] = c.inputs;
    json gens = json::array();
    for (size_t i = 0; i < c.generators.size(); ++i)
        gens.push_back(generator_to_json(c.generators[i], c.generator_names[i]));
    j["generators"] = gens;
    json sides = json::array();
    for (Side s : c.sides) sides.push_back(to_name(s));
    j["sides"] = sides;
    j["day_policy"] = policy_token(c.day_policy);
    json methods = json::array();
    for (FitMethod m : c.fit_methods) methods.push_back(to_token(m));
    j["fit_methods"] = methods;
    json families = json::array();
    for (Family f : c.fit_families) families.push_back(to_token(f));
    j["fit_families"] = families;
    j["chi_space"] = chi_space_token(c.chi_space);
    j["scale_count"] = c.scale_count;
    j["q_grid"] = {{"min", c.q_min}, {"max", c.q_max}, {"step", c.q_step}};
    j["shuffle_replicates"] = c.shuffle_replicates;
    j["seed"] = c.base_seed;
    j["format"] = format_token(c.format);
    j["workers"] = c.workers;
    j["dumps"] = c.dumps;
    if (include_out) j["out"] = c.out_dir;
    return j;
}

// --- unit bookkeeping --------------------------------------------------------

struct Unit {
    std::string stock;
    size_t source_index;  // into streams
    Side side;
    std::string name() const { return stock + "/" + std::string(to_name(side)); }
};

struct UnitResult {
    bool ok = false;
    std::string error;

    CancellationStats stats;
    std::vector<FitResult> fits;
    ScalingResult dfa_result;
    ScalingResult cdma_result;
    ShuffleReport dfa_shuffle;
    ShuffleReport cdma_shuffle;
    MultifractalResult mf;
    ShuffleReport width_shuffle;

    // pre-rendered dump files: (suffix, contents)
    std::vector<std::pair<std::string, std::string>> dumps;
};

std::string tsv_escape(const std::string& s) {
    std::string out;
    for (char ch : s) out += (ch == '\t' || ch == '\n') ? ' ' : ch;
    return out;
}

void render_dumps(UnitResult& r, const std::vector<double>& samples,
                  const DurationSeries& series) {
    using detail::fmt_double;
    {
        std::string t = "center\tdensity\tcount\n";
        const BinnedPdf pdf = empirical_pdf(samples, Binning::Hybrid);
        for (size_t i = 0; i < pdf.bin_count(); ++i)
            t += fmt_double(pdf.centers[i], 10) + "\t" + fmt_double(pdf.densities[i], 10) + "\t" +
                 std::to_string(pdf.counts[i]) + "\n";
        r.dumps.emplace_back("pdf.tsv", t);
    }
    {
        std::string t = "center\tdensity\tcount\n";
        const BinnedPdf pdf = empirical_pdf(rescale(series), Binning::Logarithmic);
        for (size_t i = 0; i < pdf.bin_count(); ++i)
            t += fmt_double(pdf.centers[i], 10) + "\t" + fmt_double(pdf.densities[i], 10) + "\t" +
                 std::to_string(pdf.counts[i]) + "\n";
        r.dumps.emplace_back("rescaled_pdf.tsv", t);
    }
    for (const ScalingResult* res : {&r.dfa_result, &r.cdma_result}) {
        std::string t = "s\tF\n";
        for (size_t i = 0; i < res->scales.size(); ++i)
            t += std::to_string(res->scales[i]) + "\t" + fmt_double(res->fluctuations[i], 10) + "\n";
        r.dumps.emplace_back(std::string(to_token(res->method)) + "_fs.tsv", t);
    }
    {
        std::string t = "q\ts\tF\n";
        const size_t nsc = r.mf.scales.size();
        for (size_t iq = 0; iq < r.mf.q_grid.size(); ++iq)
            for (size_t k = 0; k < nsc; ++k)
                t += fmt_double(r.mf.q_grid[iq], 10) + "\t" + std::to_string(r.mf.scales[k]) +
                     "\t" + fmt_double(std::pow(10.0, r.mf.log10_fq[iq * nsc + k]), 10) + "\n";
        r.dumps.emplace_back("fq.tsv", t);
    }
    {
        std::string t = "q\th\ttau\talpha\tf\n";
        for (size_t iq = 0; iq < r.mf.q_grid.size(); ++iq)
            t += fmt_double(r.mf.q_grid[iq], 10) + "\t" + fmt_double(r.mf.h[iq], 10) + "\t" +
                 fmt_double(r.mf.tau[iq], 10) + "\t" + fmt_double(r.mf.alpha[iq], 10) + "\t" +
                 fmt_double(r.mf.f_alpha[iq], 10) + "\n";
        r.dumps.emplace_back("spectrum.tsv", t);
    }
}

UnitResult process_unit(const RunConfig& config, const EventStream& stream, const Unit& unit) {
    UnitResult r;

    const DurationSeries series = extract_durations(stream, unit.side, config.day_policy);
    if (series.durations.empty())
        throw std::runtime_error("no inter-cancellation durations on side");
    r.stats = compute_stats(stream, unit.side, series);

    const std::vector<double> samples = to_doubles(series.durations);

    FitOptions fit_opts;
    fit_opts.chi_space = config.chi_space;
    for (FitMethod method : config.fit_methods) {
        BinnedPdf pdf;
        if (method == FitMethod::NLSE) pdf = empirical_pdf(samples, Binning::Hybrid);
        for (Family family : config.fit_families) {
            r.fits.push_back(method == FitMethod::MLE ? fit_mle(samples, family, fit_opts)
                                                      : fit_nlse(pdf, family, fit_opts));
        }
    }

    // one seed stream per unit, independent of the other units
    SplitMix64 mix(config.base_seed ^ detail::fnv1a64(unit.name()));
    const uint64_t dfa_seed = mix.next();
    const uint64_t cdma_seed = mix.next();
    const uint64_t width_seed = mix.next();

    const auto dfa_scales = default_scales(samples.size(), ScalingMethod::DFA, config.scale_count);
    const auto cdma_scales =
        default_scales(samples.size(), ScalingMethod::CDMA, config.scale_count);
    r.dfa_result = dfa(samples, dfa_scales);
    r.cdma_result = cdma(samples, cdma_scales);
    r.dfa_shuffle =
        shuffle_test(samples, ShuffleEstimator::DFA, config.shuffle_replicates, dfa_seed);
    r.cdma_shuffle =
        shuffle_test(samples, ShuffleEstimator::CDMA, config.shuffle_replicates, cdma_seed);

    const auto q_grid = default_q_grid(config.q_min, config.q_max, config.q_step);
    r.mf = mfdfa(samples, q_grid, dfa_scales);
    r.width_shuffle =
        width_shuffle_test(samples, q_grid, dfa_scales, config.shuffle_replicates, width_seed);

    if (config.dumps) render_dumps(r, samples, series);
    r.ok = true;
    return r;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, path);
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    json j = json::parse(in);

    RunConfig c;
    if (j.contains("inputs")) c.inputs = j["inputs"].get<std::vector<std::string>>();
    if (j.contains("generators")) {
        for (const auto& gj : j["generators"]) {
            std::string name;
            c.generators.push_back(generator_from_json(gj, name));
            c.generator_names.push_back(name);
        }
    }
    if (j.contains("sides")) {
        c.sides.clear();
        for (const auto& s : j["sides"]) c.sides.push_back(side_from(s.get<std::string>()));
    }
    if (j.contains("day_policy")) c.day_policy = policy_from(j["day_policy"].get<std::string>());
    if (j.contains("fit_methods")) {
        c.fit_methods.clear();
        for (const auto& m : j["fit_methods"])
            c.fit_methods.push_back(method_from(m.get<std::string>()));
    }
    if (j.contains("fit_families")) {
        c.fit_families.clear();
        for (const auto& f : j["fit_families"])
            c.fit_families.push_back(family_from(f.get<std::string>()));
    }
    if (j.contains("chi_space"))
        c.chi_space = j["chi_space"].get<std::string>() == "linear" ? ChiSpace::Linear
                                                                    : ChiSpace::Log10;
    c.scale_count = j.value("scale_count", c.scale_count);
    if (j.contains("q_grid")) {
        c.q_min = j["q_grid"].value("min", c.q_min);
        c.q_max = j["q_grid"].value("max", c.q_max);
        c.q_step = j["q_grid"].value("step", c.q_step);
    }
    c.shuffle_replicates = j.value("shuffle_replicates", c.shuffle_replicates);
    c.base_seed = j.value("seed", c.base_seed);
    c.out_dir = j.value("out", c.out_dir);
    if (j.contains("format"))
        c.format = j["format"].get<std::string>() == "json" ? OutputFormat::Json
                                                            : OutputFormat::Tsv;
    c.workers = j.value("workers", c.workers);
    c.dumps = j.value("dumps", c.dumps);
    return c;
}

std::string config_hash(const RunConfig& config) {
    return detail::hex64(detail::fnv1a64(config_to_json(config, false).dump()));
}

RunReport run_pipeline(const RunConfig& config) {
    using detail::fmt_double;
    RunReport report;

    const fs::path out_dir(config.out_dir);
    fs::create_directories(out_dir);

    auto finish_with_error = [&](const std::string& message) {
        report.errors.push_back({"config", message});
        json err = json::array();
        err.push_back({{"unit", "config"}, {"message", message}});
        write_file_atomic(out_dir / "errors.json", err.dump(2) + "\n");
        report.files_written.push_back((out_dir / "errors.json").string());
        report.exit_code = 2;
        return report;
    };

    if (config.inputs.empty() && config.generators.empty()) return finish_with_error("no inputs");
    if (config.generators.size() != config.generator_names.size())
        return finish_with_error("generator names out of sync");
    for (const auto& g : config.generators) {
        if (g.kind != GeneratorKind::PoissonFlow && g.kind != GeneratorKind::LongMemoryHeavyTail)
            return finish_with_error(
                "generator kind not flow-capable; use the synth command with fit/dfa/mfdfa");
    }

    // Materialize sources. A failing source is recorded and its units skipped.
    struct Source {
        std::string stock;
        EventStream stream;
        bool ok = false;
        std::string error;
    };
    std::vector<Source> sources;
    for (const auto& path : config.inputs) {
        Source src;
        src.stock = fs::path(path).stem().string();
        try {
            src.stream = parse_order_flow_file(path);
            if (src.stream.events.empty()) throw std::runtime_error("no records");
            src.ok = true;
        } catch (const std::exception& e) {
            src.error = e.what();
        }
        sources.push_back(std::move(src));
    }
    for (size_t i = 0; i < config.generators.size(); ++i) {
        Source src;
        src.stock = config.generator_names[i];
        try {
            const GeneratorSpec& g = config.generators[i];
            if (g.kind == GeneratorKind::PoissonFlow) {
                src.stream = gen_poisson_flow(g);
            } else {
                const auto durations = gen_longmem_heavytail(g);
                src.stream = flow_from_durations(durations, Side::Buy, g.days, g.start_day);
            }
            src.ok = true;
        } catch (const std::exception& e) {
            src.error = e.what();
        }
        sources.push_back(std::move(src));
    }

    std::vector<Unit> units;
    for (size_t i = 0; i < sources.size(); ++i)
        for (Side side : config.sides) units.push_back({sources[i].stock, i, side});

    std::vector<UnitResult> results(units.size());
    auto run_unit = [&](size_t u) {
        const Source& src = sources[units[u].source_index];
        if (!src.ok) {
            results[u].error = src.error;
            return;
        }
        try {
            results[u] = process_unit(config, src.stream, units[u]);
        } catch (const std::exception& e) {
            results[u].ok = false;
            results[u].error = e.what();
        }
    };

    if (config.workers > 1) {
        const auto n = static_cast<ptrdiff_t>(units.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.workers)
        for (ptrdiff_t u = 0; u < n; ++u) run_unit(static_cast<size_t>(u));
    } else {
        for (size_t u = 0; u < units.size(); ++u) run_unit(u);
    }

    // --- render tables -------------------------------------------------------

    std::string stats_t = "stock\tside\tN_C\tN_A\tr\tgamma\tmean_d\n";
    std::string fits_t = "stock\tside\tmethod\tfamily\tp_scale\tp_shape\tchi\tconverged\n";
    std::string hurst_t = "stock\tside\tmethod\tH\tH_SFL\n";
    std::string mf_t = "stock\tside\tdelta_alpha\tdelta_alpha_sfl\tsfl_std\tR\n";
    json stats_j = json::array(), fits_j = json::array(), hurst_j = json::array(),
         mf_j = json::array();

    for (size_t u = 0; u < units.size(); ++u) {
        if (!results[u].ok) continue;
        const UnitResult& r = results[u];
        const std::string stock = tsv_escape(units[u].stock);
        const std::string side = to_name(units[u].side);

        stats_t += stock + "\t" + side + "\t" + std::to_string(r.stats.cancels) + "\t" +
                   std::to_string(r.stats.orders) + "\t" + fmt_double(r.stats.ratio) + "\t" +
                   (r.stats.gamma ? fmt_double(*r.stats.gamma) : std::string("na")) + "\t" +
                   fmt_double(r.stats.mean_duration) + "\n";
        stats_j.push_back({{"stock", units[u].stock},
                           {"side", side},
                           {"N_C", r.stats.cancels},
                           {"N_A", r.stats.orders},
                           {"r", r.stats.ratio},
                           {"gamma", r.stats.gamma ? json(*r.stats.gamma) : json(nullptr)},
                           {"mean_d", r.stats.mean_duration}});

        for (const FitResult& f : r.fits) {
            fits_t += stock + "\t" + side + "\t" + to_token(f.method) + "\t" +
                      to_token(f.params.family) + "\t" + fmt_double(f.params.scale) + "\t" +
                      fmt_double(f.params.shape) + "\t" + fmt_double(f.chi) + "\t" +
                      (f.converged ? "1" : "0") + "\n";
            fits_j.push_back({{"stock", units[u].stock},
                              {"side", side},
                              {"method", to_token(f.method)},
                              {"family", to_token(f.params.family)},
                              {"p_scale", f.params.scale},
                              {"p_shape", f.params.shape},
                              {"chi", f.chi},
                              {"converged", f.converged}});
        }

        const std::pair<const ScalingResult*, const ShuffleReport*> hrows[2] = {
            {&r.dfa_result, &r.dfa_shuffle}, {&r.cdma_result, &r.cdma_shuffle}};
        for (const auto& [sres, srep] : hrows) {
            hurst_t += stock + "\t" + side + "\t" + to_token(sres->method) + "\t" +
                       fmt_double(sres->hurst) + "\t" + fmt_double(srep->mean) + "\n";
            hurst_j.push_back({{"stock", units[u].stock},
                               {"side", side},
                               {"method", to_token(sres->method)},
                               {"H", sres->hurst},
                               {"H_se", sres->slope_se},
                               {"r_squared", sres->r_squared},
                               {"reliable", sres->reliable},
                               {"H_SFL", srep->mean},
                               {"H_SFL_std", srep->stddev}});
        }

        mf_t += stock + "\t" + side + "\t" + fmt_double(r.mf.delta_alpha) + "\t" +
                fmt_double(r.width_shuffle.mean) + "\t" + fmt_double(r.width_shuffle.stddev) +
                "\t" + fmt_double(*r.width_shuffle.residual) + "\n";
        mf_j.push_back({{"stock", units[u].stock},
                        {"side", side},
                        {"delta_alpha", r.mf.delta_alpha},
                        {"delta_alpha_sfl", r.width_shuffle.mean},
                        {"sfl_std", r.width_shuffle.stddev},
                        {"R", *r.width_shuffle.residual},
                        {"q_grid_min", r.mf.q_grid.front()},
                        {"q_grid_max", r.mf.q_grid.back()},
                        {"flags", r.mf.flags}});
    }

    auto emit = [&](const std::string& name, const std::string& contents) {
        write_file_atomic(out_dir / name, contents);
        report.files_written.push_back((out_dir / name).string());
    };

    emit("stats.tsv", stats_t);
    emit("fits.tsv", fits_t);
    emit("hurst.tsv", hurst_t);
    emit("multifractal.tsv", mf_t);

    if (config.format == OutputFormat::Json) {
        emit("stats.json", stats_j.dump(2) + "\n");
        emit("fits.json", fits_j.dump(2) + "\n");
        emit("hurst.json", hurst_j.dump(2) + "\n");
        emit("multifractal.json", mf_j.dump(2) + "\n");
        json prov;
        prov["config"] = config_to_json(config, false);
        prov["config_hash"] = config_hash(config);
        prov["seed_schedule"] = {
            {"unit_seed", "splitmix64(seed xor fnv1a64(stock/side)) -> dfa, cdma, width"},
            {"replicate_rule", "rng stream = replicate index"}};
        prov["scale_rule"] =
            "log-spaced integers in [10 (dfa) or 11 (cdma), N/6], scale_count points";
        prov["event_clock"] = "ticks once per record; submissions and cancellations only";
        emit("provenance.json", prov.dump(2) + "\n");
    }

    if (config.dumps) {
        fs::create_directories(out_dir / "dumps");
        for (size_t u = 0; u < units.size(); ++u) {
            if (!results[u].ok) continue;
            const std::string prefix =
                units[u].stock + "_" + std::string(to_name(units[u].side)) + ".";
            for (const auto& [suffix, contents] : results[u].dumps)
                emit("dumps/" + prefix + suffix, contents);
        }
    }

    json errors = json::array();
    for (size_t u = 0; u < units.size(); ++u) {
        if (results[u].ok) continue;
        report.errors.push_back({units[u].name(), results[u].error});
        errors.push_back({{"unit", units[u].name()}, {"message", results[u].error}});
    }
    if (!errors.empty()) emit("errors.json", errors.dump(2) + "\n");

    report.exit_code = report.errors.empty() ? 0 : 1;
    return report;
}

}  // namespace icd
