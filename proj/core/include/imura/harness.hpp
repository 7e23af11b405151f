#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imura/config.hpp"
#include "imura/im_sic.hpp"

namespace imura {

enum class SweepVariable { kSnrDb, kNumActive, kRate };

struct ExperimentSpec {
    SweepVariable sweep = SweepVariable::kSnrDb;
    std::vector<double> values;  // sorted sweep points
    int trials = 200;
    ScdVariant decoder = ScdVariant::kSdr;
    bool sic = true;            // false: detection-only NSE ablation, no decoding
    bool perfect_sic = false;   // genie peeling diagnostic (graph-limited throughput)
    std::string out_path;       // empty: no CSV written
    std::uint64_t master_seed = 1;
    int threads = 0;            // 0: hardware concurrency
};

struct MetricRow {
    double sweep_value = 0.0;
    double fer_mean = 0.0;
    double fer_se = 0.0;
    double nse_mean_db = 0.0;
    double throughput = 0.0;          // recovered unique messages per sub-slot
    double recovered_per_trial = 0.0;
    double errors_per_trial = 0.0;
    double wall_ms = 0.0;  // not written to CSV (CSV output is byte-deterministic)
};

// One Monte-Carlo point per sweep value: per trial draws N_a distinct random
// messages (pilot collisions possible by chance), encodes, transmits, decodes
// and scores. Trial seeds derive deterministically from the master seed;
// trials run in parallel and reduce in trial order, so output is independent
// of scheduling.
std::vector<MetricRow> run_experiment(const ExperimentSpec& spec, const SystemConfig& config);

// FER per trial: outputs absent from the transmitted set, divided by N_a.
// NSE: ||g_hat - g||^2 / ||g||^2 over estimates matched by recovered pilot
// index (skipping in-frame pilot collisions).
struct TrialOutcome {
    int errors = 0;
    int recovered_unique = 0;
    double nse_num = 0.0;
    double nse_den = 0.0;
    DecodeReport report;
};

TrialOutcome run_trial(const SystemConfig& config, const PilotCodebook& codebook,
                       const AccessPatternPool& pool, ScdVariant decoder, bool sic,
                       bool perfect_sic, std::uint64_t trial_seed);

void write_csv(const std::vector<MetricRow>& rows, const std::string& path);
std::string csv_text(const std::vector<MetricRow>& rows);

}  // namespace imura
