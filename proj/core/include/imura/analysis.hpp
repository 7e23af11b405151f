#pragma once

#include <string>
#include <vector>

namespace imura {

double normal_cdf(double x);

// beta[t][m]: probability of m superposed codewords on a slot at iteration t
// (N_a - t + 1 users remaining, each picking K of N_slot slots);
// gamma[t]: probability of at least one decodable slot (occupancy <= M).
// Indexing is 1-based in t; beta[t].size() == M+1 with beta[t][0] unused.
struct DecodabilityCurve {
    std::vector<std::vector<double>> beta;
    std::vector<double> gamma;
};

double decodable_probability(int N_a, int K, int N_slot, int M, int t);
DecodabilityCurve decodability_curve(int N_a, int K, int N_slot, int M, int t_max);

struct Proposition1Report {
    bool applicable = false;   // requires K*N_a > M*N_slot
    bool monotone_t = true;
    bool monotone_n_slot = true;
    bool ratio_below_one = true;  // beta_m^(1) / beta_m^(2) < 1 for m <= M
    std::vector<std::string> violations;
};

Proposition1Report check_proposition1(int N_a, int K, int N_slot, int M, int t_lo, int t_hi);

// Density evolution on the user/slot graph with Poisson degree approximation.
// rho[j], Pi[j] indexed 1..j_max (index 0 unused); q[t][m] for t in 1..t_max,
// m in 1..M; Z[t] with Z[0] = 1; T_r = r * (1 - Z[t_max]).
struct DensityEvolutionState {
    std::vector<double> rho;
    std::vector<double> Pi;
    std::vector<std::vector<double>> q;
    std::vector<double> Z;
    double T_r = 0.0;
    int j_max = 0;
};

// j_max = 0 derives the truncation point from a 1e-12 Poisson tail bound.
DensityEvolutionState density_evolution(double r, int K, int M, int t_max, int j_max = 0);

// Largest rate r (scanned upward in `step` increments from `step`) for which
// Z_{t_max} <= z_criterion, with t_max tied to N_a = round(r * N_slot).
double rate_threshold(int K, int M, int N_slot = 33, double step = 0.01,
                      double z_criterion = 1e-5, int t_max_override = 0);

struct SystemConfig;
// 2^L_bp * L_p^2 * N_slot + (K r)^3.5 * N_slot * L_bd
double decoder_complexity(const SystemConfig& config, double r);

// Symbols per coherence block: f_max = v f_c / 3e8 (v in m/s),
// T_c = 1/(4 f_max), N_cd = B_c T_c. Input velocity in km/h.
double coherence_duration(double v_kmh, double f_c = 2e9, double B_c = 5e5);

// Gaussian approximations of the energy-detector operating probabilities:
// idle slot declared idle, and a busy slot (per-antenna sample SNR
// `snr_linear`) declared idle.
double p_idle_detect(double tau_E, int L_bs);
double p_busy_false_idle(double tau_E, int L_bs, double snr_linear);

}  // namespace imura
