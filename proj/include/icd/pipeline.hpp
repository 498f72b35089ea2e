#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icd/distfit.hpp"
#include "icd/durations.hpp"
#include "icd/multifractal.hpp"
#include "icd/scaling.hpp"
#include "icd/synth.hpp"

namespace icd {

enum class OutputFormat : uint8_t { Tsv, Json };

// Batch configuration: inputs (CSV paths and/or flow-capable generators),
// which analyses to run, grid overrides, seeding, and output layout.
struct RunConfig {
    std::vector<std::string> inputs;
    std::vector<GeneratorSpec> generators;  // PoissonFlow or LongMemoryHeavyTail
    std::vector<std::string> generator_names;

    std::vector<Side> sides{Side::Buy, Side::Sell};
    DayPolicy day_policy = DayPolicy::ResetAtDayBoundary;

    std::vector<FitMethod> fit_methods{FitMethod::MLE, FitMethod::NLSE};
    std::vector<Family> fit_families{Family::Weibull, Family::QExponential};
    ChiSpace chi_space = ChiSpace::Log10;

    int scale_count = 20;
    double q_min = -4.0, q_max = 4.0, q_step = 0.25;
    int shuffle_replicates = 100;
    uint64_t base_seed = 42;

    std::string out_dir = "out";
    OutputFormat format = OutputFormat::Tsv;
    int workers = 1;
    bool dumps = false;
};

RunConfig load_config(const std::string& path);

// Hash of the semantic configuration (output directory excluded, so two runs
// into different directories produce identical bundles).
std::string config_hash(const RunConfig& config);

struct UnitError {
    std::string unit;
    std::string message;
};

struct RunReport {
    int exit_code = 0;
    std::vector<UnitError> errors;
    std::vector<std::string> files_written;
};

// Runs ingestion, extraction, fits, Hurst estimation, the multifractal
// spectrum and the shuffle nulls for every (source, side) unit, and writes
// the report tables. A failing unit is recorded and skipped; other units are
// unaffected. Outputs are a pure function of (inputs, config, seed).
RunReport run_pipeline(const RunConfig& config);

}  // namespace icd
