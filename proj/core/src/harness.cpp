#include "imura/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "imura/channel.hpp"
#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {
namespace {

using PackedMessage = std::pair<std::uint64_t, std::uint64_t>;

PackedMessage pack_bits(const BitVector& bits) {
    PackedMessage packed{0, 0};
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (i < 64)
            packed.first = (packed.first << 1) | bits[i];
        else
            packed.second = (packed.second << 1) | bits[i];
    }
    return packed;
}

std::vector<Message> draw_distinct_messages(const SystemConfig& config, Rng& rng) {
    std::vector<Message> messages;
    std::set<PackedMessage> seen;
    messages.reserve(static_cast<std::size_t>(config.N_a));
    while (static_cast<int>(messages.size()) < config.N_a) {
        Message m = random_message(config, rng);
        if (seen.insert(pack_bits(m.bits)).second) messages.push_back(std::move(m));
    }
    return messages;
}

// Genie peeling: repeatedly resolve any slot holding at most M codewords and
// remove those users everywhere. Matches the perfect-SIC analysis model.
TrialOutcome peel_trial(const SystemConfig& config, const std::vector<Message>& messages,
                        const std::vector<EncodedUser>& encoded) {
    const int N_slot = config.N_slot;
    std::vector<std::vector<int>> slot_users(static_cast<std::size_t>(N_slot));
    for (std::size_t u = 0; u < encoded.size(); ++u)
        for (int s : encoded[u].codeword.pattern_slots)
            slot_users[static_cast<std::size_t>(s)].push_back(static_cast<int>(u));

    std::vector<bool> removed(messages.size(), false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < N_slot; ++s) {
            auto& users = slot_users[static_cast<std::size_t>(s)];
            users.erase(std::remove_if(users.begin(), users.end(),
                                       [&](int u) { return removed[static_cast<std::size_t>(u)]; }),
                        users.end());
            if (!users.empty() && static_cast<int>(users.size()) <= config.M) {
                for (int u : users) removed[static_cast<std::size_t>(u)] = true;
                users.clear();
                changed = true;
            }
        }
    }

    TrialOutcome outcome;
    outcome.recovered_unique =
        static_cast<int>(std::count(removed.begin(), removed.end(), true));
    outcome.errors = 0;
    outcome.nse_num = outcome.nse_den = 0.0;
    return outcome;
}

}  // namespace

TrialOutcome run_trial(const SystemConfig& config, const PilotCodebook& codebook,
                       const AccessPatternPool& pool, ScdVariant decoder, bool sic,
                       bool perfect_sic, std::uint64_t trial_seed) {
    Rng rng(trial_seed);
    Rng msg_rng = rng.substream(1);
    Rng chan_rng = rng.substream(2);
    Rng noise_rng = rng.substream(3);

    const std::vector<Message> messages = draw_distinct_messages(config, msg_rng);
    std::vector<EncodedUser> encoded;
    encoded.reserve(messages.size());
    for (const auto& m : messages) encoded.push_back(encode_user(m, codebook, pool, config));

    if (perfect_sic) return peel_trial(config, messages, encoded);

    const double sigma2 = sigma2_from_snr(config);
    ChannelRealization channel = draw_channel(config.M, config.N_a, sigma2, chan_rng);
    std::vector<Eigen::VectorXd> signals;
    signals.reserve(encoded.size());
    for (const auto& user : encoded) signals.push_back(user.x);
    const Eigen::MatrixXcd Y = transmit(signals, channel, noise_rng);

    // true-pilot bookkeeping for NSE matching; in-frame pilot collisions are
    // ambiguous and skipped
    std::map<int, std::vector<int>> users_by_pilot;
    for (std::size_t u = 0; u < encoded.size(); ++u)
        users_by_pilot[encoded[u].codeword.pilot_index].push_back(static_cast<int>(u));

    TrialOutcome outcome;

    if (!sic) {
        // ablation: one detection pass, NSE from the initial per-slot estimates
        const std::vector<SlotDetection> detections =
            detect_slots(Y, codebook, config, sigma2);
        for (const auto& det : detections) {
            for (std::size_t j = 0; j < det.active_pilots.size(); ++j) {
                const auto it = users_by_pilot.find(det.active_pilots[j]);
                if (it == users_by_pilot.end() || it->second.size() != 1) continue;
                const int u = it->second.front();
                const auto& slots = encoded[static_cast<std::size_t>(u)].codeword.pattern_slots;
                if (!std::binary_search(slots.begin(), slots.end(), det.slot_index)) continue;
                if (det.G_hat.cols() != static_cast<Eigen::Index>(det.active_pilots.size()))
                    continue;
                const Eigen::VectorXcd g_true = channel.G.col(u);
                outcome.nse_num += (det.G_hat.col(static_cast<Eigen::Index>(j)) - g_true)
                                       .squaredNorm();
                outcome.nse_den += g_true.squaredNorm();
            }
        }
        return outcome;
    }

    outcome.report = decode_frame(Y, codebook, pool, config, decoder, mix_seed(trial_seed, 17));

    std::set<PackedMessage> sent;
    for (const auto& m : messages) sent.insert(pack_bits(m.bits));
    std::set<PackedMessage> correct_unique;
    for (const auto& user : outcome.report.users) {
        const PackedMessage packed = pack_bits(user.message_bits);
        if (sent.count(packed)) {
            correct_unique.insert(packed);
        } else {
            ++outcome.errors;
        }
        const auto it = users_by_pilot.find(user.pilot_index);
        if (it != users_by_pilot.end() && it->second.size() == 1) {
            const Eigen::VectorXcd g_true = channel.G.col(it->second.front());
            outcome.nse_num += (user.g_hat - g_true).squaredNorm();
            outcome.nse_den += g_true.squaredNorm();
        }
    }
    outcome.recovered_unique = static_cast<int>(correct_unique.size());
    return outcome;
}

namespace {

SystemConfig config_at(const ExperimentSpec& spec, const SystemConfig& base, double value) {
    SystemConfig c = base;
    switch (spec.sweep) {
        case SweepVariable::kSnrDb:
            c.snr_db = value;
            break;
        case SweepVariable::kNumActive:
            c.N_a = static_cast<int>(std::lround(value));
            c.t_max = 0;  // re-derive the default from the new N_a
            break;
        case SweepVariable::kRate:
            c.N_a = std::max(1, static_cast<int>(std::lround(value * base.N_slot)));
            c.t_max = 0;
            break;
    }
    validate(c);
    return c;
}

}  // namespace

std::vector<MetricRow> run_experiment(const ExperimentSpec& spec, const SystemConfig& base) {
    if (spec.trials < 1) throw ConfigError("run_experiment: trials >= 1");
    if (spec.values.empty()) throw ConfigError("run_experiment: no sweep values");
    if (!std::is_sorted(spec.values.begin(), spec.values.end()))
        throw ConfigError("run_experiment: sweep values must be sorted");

    int n_threads = spec.threads > 0 ? spec.threads
                                     : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min(n_threads, spec.trials));

    std::vector<MetricRow> rows;
    rows.reserve(spec.values.size());

    for (std::size_t point = 0; point < spec.values.size(); ++point) {
        const SystemConfig config = config_at(spec, base, spec.values[point]);
        const PilotCodebook codebook = build_pilot_codebook(config, config.seed);
        const AccessPatternPool pool(config.N_slot, config.K);

        const auto start = std::chrono::steady_clock::now();
        std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(spec.trials));
        std::atomic<int> next_trial{0};
        auto worker = [&] {
            for (;;) {
                const int t = next_trial.fetch_add(1);
                if (t >= spec.trials) break;
                const std::uint64_t trial_seed =
                    mix_seed(spec.master_seed,
                             (static_cast<std::uint64_t>(point) << 32) |
                                 static_cast<std::uint64_t>(t));
                outcomes[static_cast<std::size_t>(t)] =
                    run_trial(config, codebook, pool, spec.decoder, spec.sic, spec.perfect_sic,
                              trial_seed);
            }
        };
        std::vector<std::thread> threads;
        for (int i = 0; i < n_threads - 1; ++i) threads.emplace_back(worker);
        worker();
        for (auto& th : threads) th.join();
        const auto stop = std::chrono::steady_clock::now();

        // reduce in trial order so results are independent of scheduling
        MetricRow row;
        row.sweep_value = spec.values[point];
        double fer_sum = 0.0, fer_sq_sum = 0.0, nse_num = 0.0, nse_den = 0.0;
        long recovered = 0, errors = 0;
        for (const auto& o : outcomes) {
            const double fer = static_cast<double>(o.errors) / config.N_a;
            fer_sum += fer;
            fer_sq_sum += fer * fer;
            nse_num += o.nse_num;
            nse_den += o.nse_den;
            recovered += o.recovered_unique;
            errors += o.errors;
        }
        const double n = static_cast<double>(spec.trials);
        row.fer_mean = fer_sum / n;
        const double var = std::max(0.0, fer_sq_sum / n - row.fer_mean * row.fer_mean);
        row.fer_se = spec.trials > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
        row.nse_mean_db =
            nse_den > 0.0 ? 10.0 * std::log10(nse_num / nse_den) : std::nan("");
        row.throughput = static_cast<double>(recovered) / (n * config.N_slot);
        row.recovered_per_trial = static_cast<double>(recovered) / n;
        row.errors_per_trial = static_cast<double>(errors) / n;
        row.wall_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
        rows.push_back(row);
    }

    if (!spec.out_path.empty()) write_csv(rows, spec.out_path);
    return rows;
}

std::string csv_text(const std::vector<MetricRow>& rows) {
    std::string text =
        "sweep_value,fer_mean,fer_se,nse_mean_db,throughput,recovered_per_trial,errors_per_"
        "trial\n";
    char line[256];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line), "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                      r.sweep_value, r.fer_mean, r.fer_se, r.nse_mean_db, r.throughput,
                      r.recovered_per_trial, r.errors_per_trial);
        text += line;
    }
    return text;
}

void write_csv(const std::vector<MetricRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_csv: cannot open " + path);
    out << csv_text(rows);
    if (!out) throw IoError("write_csv: write failed for " + path);
}

}  // namespace imura
