#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "icd/pipeline.hpp"

using namespace icd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> bundle(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file())
            files[fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
    return files;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "icd_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig small_poisson_config(const fs::path& out) {
    RunConfig c;
    GeneratorSpec g;
    g.kind = GeneratorKind::PoissonFlow;
    g.length = 60'000;
    g.seed = 9;
    g.days = 10;
    c.generators.push_back(g);
    c.generator_names.push_back("pois");
    c.shuffle_replicates = 3;
    c.base_seed = 5;
    c.out_dir = out.string();
    return c;
}

size_t line_count(const std::string& text) {
    size_t n = 0;
    for (char ch : text) n += ch == '\n';
    return n;
}

}  // namespace

TEST_CASE("pipeline on a synthetic poisson flow") {
    const fs::path out = fresh_dir("poisson");
    RunConfig config = small_poisson_config(out);
    config.generators[0].length = 1'000'000;
    config.dumps = true;
    const RunReport report = run_pipeline(config);
    REQUIRE(report.exit_code == 0);
    REQUIRE(report.errors.empty());

    const std::string stats = slurp(out / "stats.tsv");
    const std::string fits = slurp(out / "fits.tsv");
    const std::string hurst = slurp(out / "hurst.tsv");
    const std::string mf = slurp(out / "multifractal.tsv");

    CHECK(line_count(stats) == 3);  // header + buy + sell
    CHECK(line_count(fits) == 9);   // header + 2 sides x 2 methods x 2 families
    CHECK(line_count(hurst) == 5);  // header + 2 sides x {dfa, cdma}
    CHECK(line_count(mf) == 3);

    // memoryless input: H near 0.5 before and after shuffling
    std::istringstream hs(hurst);
    std::string line;
    std::getline(hs, line);  // header
    while (std::getline(hs, line)) {
        std::istringstream row(line);
        std::string stock, side, method, h_text, hsfl_text;
        std::getline(row, stock, '\t');
        std::getline(row, side, '\t');
        std::getline(row, method, '\t');
        std::getline(row, h_text, '\t');
        std::getline(row, hsfl_text, '\t');
        CHECK(std::fabs(std::stod(h_text) - 0.5) <= 0.03);
        CHECK(std::fabs(std::stod(hsfl_text) - 0.5) <= 0.03);
    }

    // no temporal structure: shuffling leaves the spectrum width alone
    std::istringstream ms(mf);
    std::getline(ms, line);
    while (std::getline(ms, line)) {
        std::istringstream row(line);
        std::string field;
        for (int i = 0; i < 6; ++i) std::getline(row, field, '\t');
        CHECK(std::fabs(std::stod(field)) <= 0.05);  // R
    }

    // tau(q) stays close to its chord (iid input, mild finite-size bowing)
    {
        const auto spectrum = slurp(out / "dumps" / "pois_buy.spectrum.tsv");
        std::istringstream in(spectrum);
        std::getline(in, line);
        std::vector<double> qs, taus;
        while (std::getline(in, line)) {
            std::istringstream row(line);
            std::string q_text, h_text, tau_text;
            std::getline(row, q_text, '\t');
            std::getline(row, h_text, '\t');
            std::getline(row, tau_text, '\t');
            qs.push_back(std::stod(q_text));
            taus.push_back(std::stod(tau_text));
        }
        REQUIRE(qs.size() >= 3);
        double dev = 0.0;
        for (size_t i = 0; i < qs.size(); ++i) {
            const double chord = taus.front() + (taus.back() - taus.front()) *
                                                    (qs[i] - qs.front()) /
                                                    (qs.back() - qs.front());
            dev = std::max(dev, std::fabs(taus[i] - chord));
        }
        CHECK(dev <= 0.12);
    }

    CHECK(fs::exists(out / "dumps" / "pois_sell.fq.tsv"));
    CHECK(fs::exists(out / "dumps" / "pois_buy.dfa_fs.tsv"));
    CHECK(fs::exists(out / "dumps" / "pois_buy.pdf.tsv"));
    CHECK(fs::exists(out / "dumps" / "pois_buy.rescaled_pdf.tsv"));
    CHECK(fs::exists(out / "dumps" / "pois_buy.cdma_fs.tsv"));
}

TEST_CASE("pipeline rejects an empty unit list") {
    const fs::path out = fresh_dir("empty");
    RunConfig config;
    config.out_dir = out.string();
    const RunReport report = run_pipeline(config);
    CHECK(report.exit_code != 0);
    REQUIRE(!report.errors.empty());
    CHECK(report.errors[0].message == "no inputs");
    CHECK(fs::exists(out / "errors.json"));
}

TEST_CASE("pipeline bundles are byte identical across runs") {
    const fs::path out_a = fresh_dir("det_a");
    const fs::path out_b = fresh_dir("det_b");

    RunConfig config = small_poisson_config(out_a);
    config.format = OutputFormat::Json;
    config.dumps = true;
    REQUIRE(run_pipeline(config).exit_code == 0);

    config.out_dir = out_b.string();
    REQUIRE(run_pipeline(config).exit_code == 0);

    const auto a = bundle(out_a);
    const auto b = bundle(out_b);
    REQUIRE(a.size() == b.size());
    for (const auto& [name, contents] : a) {
        REQUIRE(b.count(name) == 1);
        CHECK_MESSAGE(contents == b.at(name), name);
    }
}

TEST_CASE("one corrupt input does not disturb the other units") {
    const fs::path dir = fresh_dir("isolation");
    const fs::path good_csv = dir / "good.csv";
    const fs::path bad_csv = dir / "bad.csv";

    {
        RunConfig gen_only = small_poisson_config(dir / "seed_run");
        const RunReport r = run_pipeline(gen_only);
        REQUIRE(r.exit_code == 0);
    }

    // good input: serialize a generated flow; bad input: malformed row
    {
        GeneratorSpec g;
        g.kind = GeneratorKind::PoissonFlow;
        g.length = 60'000;
        g.seed = 9;
        g.days = 10;
        std::ofstream(good_csv, std::ios::binary) << serialize_order_flow(gen_poisson_flow(g));
        std::ofstream(bad_csv, std::ios::binary)
            << "day,seq,side,action,price,size\n2003-01-02,1,B,WAT,,\n";
    }

    RunConfig config;
    config.inputs = {good_csv.string(), bad_csv.string()};
    config.shuffle_replicates = 3;
    config.base_seed = 5;
    config.out_dir = (dir / "mixed_out").string();
    const RunReport report = run_pipeline(config);
    CHECK(report.exit_code == 1);
    CHECK(report.errors.size() == 2);  // bad.csv fails on both sides

    const std::string stats = slurp(dir / "mixed_out" / "stats.tsv");
    CHECK(line_count(stats) == 3);  // good.csv rows survive
    CHECK(stats.find("good\tbuy") != std::string::npos);
    CHECK(fs::exists(dir / "mixed_out" / "errors.json"));

    // the good unit's rows match a run without the corrupt file present
    RunConfig alone;
    alone.inputs = {good_csv.string()};
    alone.shuffle_replicates = 3;
    alone.base_seed = 5;
    alone.out_dir = (dir / "alone_out").string();
    REQUIRE(run_pipeline(alone).exit_code == 0);
    CHECK(slurp(dir / "alone_out" / "stats.tsv") == stats);
    CHECK(slurp(dir / "alone_out" / "hurst.tsv") == slurp(dir / "mixed_out" / "hurst.tsv"));
}

TEST_CASE("worker count does not change the tables") {
    const fs::path out_serial = fresh_dir("workers_1");
    const fs::path out_parallel = fresh_dir("workers_2");

    RunConfig config = small_poisson_config(out_serial);
    REQUIRE(run_pipeline(config).exit_code == 0);

    config.out_dir = out_parallel.string();
    config.workers = 2;
    REQUIRE(run_pipeline(config).exit_code == 0);

    for (const char* name : {"stats.tsv", "fits.tsv", "hurst.tsv", "multifractal.tsv"})
        CHECK(slurp(out_serial / name) == slurp(out_parallel / name));
}

TEST_CASE("config errors are reported") {
    const fs::path dir = fresh_dir("bad_config");
    {
        std::ofstream(dir / "bad_side.json") << R"({"sides": ["buyy"]})";
        CHECK_THROWS(load_config((dir / "bad_side.json").string()));
    }
    {
        std::ofstream(dir / "bad_kind.json")
            << R"({"generators": [{"kind": "wat", "length": 10}]})";
        CHECK_THROWS(load_config((dir / "bad_kind.json").string()));
    }
    CHECK_THROWS(load_config((dir / "missing.json").string()));

    // series-only generators are rejected by the pipeline with a pointer
    RunConfig config;
    GeneratorSpec g;
    g.kind = GeneratorKind::FGN;
    g.length = 1024;
    config.generators.push_back(g);
    config.generator_names.push_back("noise");
    config.out_dir = (dir / "out").string();
    const RunReport report = run_pipeline(config);
    CHECK(report.exit_code == 2);
    REQUIRE(!report.errors.empty());
    CHECK(report.errors[0].message.find("synth") != std::string::npos);
}

TEST_CASE("config round trip and hashing") {
    const fs::path dir = fresh_dir("config");
    const fs::path cfg_path = dir / "run.json";
    std::ofstream(cfg_path) << R"({
        "generators": [
            {"name": "lm", "kind": "longmem_heavytail", "length": 4096, "seed": 3,
             "hurst": 0.76, "kappa": 7.9, "q": 1.25, "days": 4}
        ],
        "sides": ["buy"],
        "day_policy": "continuous",
        "shuffle_replicates": 7,
        "seed": 99,
        "q_grid": {"min": -4, "max": 4, "step": 0.5},
        "format": "json",
        "out": "somewhere"
    })";
    const RunConfig c = load_config(cfg_path.string());
    CHECK(c.generators.size() == 1);
    CHECK(c.generator_names[0] == "lm");
    CHECK(c.generators[0].kind == GeneratorKind::LongMemoryHeavyTail);
    CHECK(c.generators[0].days == 4);
    CHECK(c.sides == std::vector<Side>{Side::Buy});
    CHECK(c.day_policy == DayPolicy::Continuous);
    CHECK(c.shuffle_replicates == 7);
    CHECK(c.base_seed == 99);
    CHECK(c.q_step == 0.5);
    CHECK(c.format == OutputFormat::Json);
    CHECK(c.out_dir == "somewhere");

    RunConfig other = c;
    other.out_dir = "elsewhere";
    CHECK(config_hash(c) == config_hash(other));  // output location is not semantic
    other.base_seed = 100;
    CHECK(config_hash(c) != config_hash(other));
}
