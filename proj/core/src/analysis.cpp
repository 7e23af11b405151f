#include "imura/analysis.hpp"

#include <cmath>

#include "imura/config.hpp"
#include "imura/errors.hpp"

namespace imura {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// binomial pmf in log-gamma space; exact 0/1 handling at the p edges
double binomial_pmf(int n, int m, double p) {
    if (m < 0 || m > n) return 0.0;
    if (p <= 0.0) return m == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return m == n ? 1.0 : 0.0;
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(m + 1.0) -
                           std::lgamma(n - m + 1.0) + m * std::log(p) +
                           (n - m) * std::log1p(-p);
    return std::exp(log_pmf);
}

double gamma_from_beta(const std::vector<double>& beta, int M, int N_slot) {
    double sum = 0.0;
    for (int m = 1; m <= M; ++m) sum += beta[static_cast<std::size_t>(m)];
    sum = std::min(sum, 1.0);
    return 1.0 - std::pow(1.0 - sum, N_slot);
}

std::vector<double> beta_row(int N_a, int K, int N_slot, int M, int t) {
    const int remaining = N_a - t + 1;  // users still in the frame at iteration t
    const double p = static_cast<double>(K) / N_slot;
    std::vector<double> row(static_cast<std::size_t>(M) + 1, 0.0);
    for (int m = 1; m <= M; ++m) row[static_cast<std::size_t>(m)] = binomial_pmf(remaining, m, p);
    return row;
}

}  // namespace

double decodable_probability(int N_a, int K, int N_slot, int M, int t) {
    if (t < 1 || t > N_a) throw DimensionError("decodable_probability: require 1 <= t <= N_a");
    if (K < 1 || K >= N_slot || M < 1) throw DimensionError("decodable_probability: bad params");
    return gamma_from_beta(beta_row(N_a, K, N_slot, M, t), M, N_slot);
}

DecodabilityCurve decodability_curve(int N_a, int K, int N_slot, int M, int t_max) {
    if (t_max < 1 || t_max > N_a) throw DimensionError("decodability_curve: 1 <= t_max <= N_a");
    DecodabilityCurve curve;
    curve.beta.resize(static_cast<std::size_t>(t_max) + 1);
    curve.gamma.resize(static_cast<std::size_t>(t_max) + 1, 0.0);
    for (int t = 1; t <= t_max; ++t) {
        curve.beta[static_cast<std::size_t>(t)] = beta_row(N_a, K, N_slot, M, t);
        curve.gamma[static_cast<std::size_t>(t)] =
            gamma_from_beta(curve.beta[static_cast<std::size_t>(t)], M, N_slot);
    }
    return curve;
}

Proposition1Report check_proposition1(int N_a, int K, int N_slot, int M, int t_lo, int t_hi) {
    Proposition1Report report;
    if (static_cast<long>(K) * N_a <= static_cast<long>(M) * N_slot) {
        report.applicable = false;
        return report;
    }
    report.applicable = true;
    t_hi = std::min(t_hi, N_a);

    double prev = decodable_probability(N_a, K, N_slot, M, t_lo);
    for (int t = t_lo + 1; t <= t_hi; ++t) {
        const double cur = decodable_probability(N_a, K, N_slot, M, t);
        if (cur + 1e-12 < prev) {
            report.monotone_t = false;
            report.violations.push_back("gamma decreased at t=" + std::to_string(t));
        }
        prev = cur;
    }

    // monotone in N_slot while the K*N_a > M*N_slot premise still holds
    for (int t = t_lo; t <= t_hi; ++t) {
        double prev_g = decodable_probability(N_a, K, N_slot, M, t);
        for (int ns = N_slot + 1; ns <= N_slot + 5; ++ns) {
            if (static_cast<long>(K) * N_a <= static_cast<long>(M) * ns) break;
            const double g = decodable_probability(N_a, K, ns, M, t);
            if (g + 1e-12 < prev_g) {
                report.monotone_n_slot = false;
                report.violations.push_back("gamma decreased at N_slot=" + std::to_string(ns) +
                                            ", t=" + std::to_string(t));
            }
            prev_g = g;
        }
    }

    const auto b1 = beta_row(N_a, K, N_slot, M, 1);
    const auto b2 = beta_row(N_a, K, N_slot, M, 2);
    for (int m = 1; m <= M; ++m) {
        const double r0 = b1[static_cast<std::size_t>(m)] / b2[static_cast<std::size_t>(m)];
        if (!(r0 < 1.0)) {
            report.ratio_below_one = false;
            report.violations.push_back("r0 >= 1 at m=" + std::to_string(m));
        }
    }
    return report;
}

DensityEvolutionState density_evolution(double r, int K, int M, int t_max, int j_max) {
    if (r <= 0.0 || K < 1 || M < 1 || t_max < 1)
        throw DimensionError("density_evolution: bad parameters");
    const double kr = K * r;

    if (j_max == 0) {
        // smallest truncation with Poisson(kr) tail below 1e-12
        double cum = std::exp(-kr), pmf = cum;
        j_max = 1;
        while (1.0 - cum > 1e-12 && j_max < 100000) {
            pmf *= kr / j_max;
            cum += pmf;
            ++j_max;
        }
        j_max += 2;
    }

    DensityEvolutionState state;
    state.j_max = j_max;
    state.Pi.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
    state.rho.assign(static_cast<std::size_t>(j_max) + 1, 0.0);
    for (int j = 1; j <= j_max; ++j) {
        // Pi_j = Poisson(j; kr), rho_j = Poisson(j-1; kr)
        state.Pi[static_cast<std::size_t>(j)] =
            std::exp(j * std::log(kr) - kr - std::lgamma(j + 1.0));
        state.rho[static_cast<std::size_t>(j)] =
            std::exp((j - 1) * std::log(kr) - kr - std::lgamma(static_cast<double>(j)));
    }

    state.Z.assign(static_cast<std::size_t>(t_max) + 1, 1.0);
    state.q.assign(static_cast<std::size_t>(t_max) + 1,
                   std::vector<double>(static_cast<std::size_t>(M) + 1, 0.0));

    for (int t = 1; t <= t_max; ++t) {
        const double z_prev = state.Z[static_cast<std::size_t>(t) - 1];
        double q_sum = 0.0;
        for (int m = 1; m <= M; ++m) {
            double q = 0.0;
            for (int j = m; j <= j_max; ++j) {
                // C(j-1, m-1) Z^(m-1) (1-Z)^(j-m), running binomial product
                const double log_c = std::lgamma(static_cast<double>(j)) -
                                     std::lgamma(static_cast<double>(m)) -
                                     std::lgamma(static_cast<double>(j - m + 1));
                const double zpow = (m == 1) ? 1.0 : std::pow(z_prev, m - 1);
                const double wpow = (j == m) ? 1.0 : std::pow(1.0 - z_prev, j - m);
                q += state.rho[static_cast<std::size_t>(j)] * std::exp(log_c) * zpow * wpow;
            }
            state.q[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)] = q;
            q_sum += q;
        }
        q_sum = std::min(q_sum, 1.0);
        state.Z[static_cast<std::size_t>(t)] = std::pow(1.0 - q_sum, K - 1);
    }
    state.T_r = r * (1.0 - state.Z[static_cast<std::size_t>(t_max)]);
    return state;
}

double rate_threshold(int K, int M, int N_slot, double step, double z_criterion,
                      int t_max_override) {
    double last_passing = 0.0;
    for (int i = 1; i * step < 1000.0; ++i) {
        const double r = i * step;
        const int t_max = t_max_override > 0
                              ? t_max_override
                              : std::max(1, static_cast<int>(std::lround(r * N_slot)));
        const DensityEvolutionState state = density_evolution(r, K, M, t_max);
        if (state.Z[static_cast<std::size_t>(t_max)] <= z_criterion) {
            last_passing = r;
        } else {
            break;
        }
    }
    return last_passing;
}

double decoder_complexity(const SystemConfig& config, double r) {
    const double cs_term = std::ldexp(1.0, config.L_bp) * static_cast<double>(config.L_p) *
                           config.L_p * config.N_slot;
    const double scd_term =
        std::pow(config.K * r, 3.5) * static_cast<double>(config.N_slot) * config.L_bd;
    return cs_term + scd_term;
}

double coherence_duration(double v_kmh, double f_c, double B_c) {
    if (v_kmh <= 0.0 || f_c <= 0.0 || B_c <= 0.0)
        throw DimensionError("coherence_duration: positive arguments required");
    // N_cd = B_c / (4 f_max), f_max = (v_kmh / 3.6) f_c / 3e8, kept in a
    // rationalized form so the reference points evaluate exactly
    return (B_c * 3e8 * 36.0) / (40.0 * f_c * v_kmh);
}

double p_idle_detect(double tau_E, int L_bs) {
    const double n = L_bs + 1.0;
    return normal_cdf((tau_E - 2.0 * n) / (2.0 * std::sqrt(n)));
}

double p_busy_false_idle(double tau_E, int L_bs, double snr_linear) {
    const double n = L_bs + 1.0;
    return normal_cdf((tau_E - 2.0 * n * (1.0 + snr_linear)) /
                      (2.0 * (1.0 + snr_linear * std::sqrt(n))));
}

}  // namespace imura
