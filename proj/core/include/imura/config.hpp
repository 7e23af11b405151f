#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace imura {

// All scheme parameters plus derived quantities. Derived fields (L_bd, L_p,
// L_bI when zero, N_cu, t_max when zero) are populated by validate(); a
// validated config is immutable by convention and safe to share across
// worker threads.
struct SystemConfig {
    int L_bs = 70;        // total message length (bits)
    int L_bp = 14;        // bits mapped to the CS pilot
    int L_bI = 0;         // bits carried by index modulation; 0 = derive
    int L_bd = 0;         // BPSK payload bits; 0 = derive
    int L_p = 0;          // pilot length (symbols); 0 = derive
    int N_slot = 33;      // sub-slots per frame
    int K = 2;            // codeword repetitions per user
    int M = 4;            // BS antennas
    int N_a = 33;         // active users per frame
    double snr_db = 0.0;
    double tau_E = 500.0; // energy-detector threshold
    int t_max = 0;        // max SIC iterations; 0 = default to N_a
    std::uint64_t seed = 1;

    // decoder knobs
    int cbml_passes = 5;              // full coordinate sweeps in CB-ML
    double cbml_threshold_scale = 0.05;  // activity threshold = scale * sigma2 ...
    double cbml_threshold_abs = 0.05;    // ... floored at this (channel-power units)
    bool cbml_randomized_order = false;  // randomized coordinate order
    int sdr_samples = 150;            // Gaussian rounding candidates
    int ml_cap = 16;                  // max codewords for exhaustive ML

    int N_cu = 0;  // derived: N_slot * (L_bs + 1)

    // total bits carried per user: L_bp + L_bd + L_bI = L_bs + 1
    int message_bits() const { return L_bp + L_bd + L_bI; }
};

// Checks every invariant, fills derived fields. Throws ConfigError naming
// the violated relation.
void validate(SystemConfig& config);

// Non-throwing variant: returns the error message, or nullopt when valid.
std::optional<std::string> try_validate(SystemConfig& config);

// Noise variance for the configured SNR: sigma2 = M*K / (snr_linear * N_slot),
// the inversion of the per-codeword receive-SNR definition using
// E||g_u||^2 = M and ||x_u||^2 = K*(L_bs+1) (the (L_bs+1) factors cancel).
double sigma2_from_snr(const SystemConfig& config);
double sigma2_from_snr(const SystemConfig& config, double snr_db);

// Line-oriented `key = value` config file. '#' starts a comment. Unknown
// keys are rejected. Returned config is validated.
SystemConfig load_config_file(const std::string& path);
SystemConfig parse_config_text(const std::string& text);

}  // namespace imura
