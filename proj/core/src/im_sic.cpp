#include "imura/im_sic.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

PilotOccurrenceMap match_pilots(const std::vector<SlotDetection>& detections) {
    PilotOccurrenceMap occurrences;
    for (const auto& det : detections) {
        for (int pilot : det.active_pilots) occurrences[pilot].push_back(det.slot_index);
    }
    for (auto& [pilot, slots] : occurrences) std::sort(slots.begin(), slots.end());
    return occurrences;
}

namespace {

long hamming(const VectorXd& a, const VectorXd& b) {
    long d = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a(i) != b(i)) ++d;
    return d;
}

}  // namespace

PairingResult resolve_no_overlap(const std::array<Eigen::VectorXd, 4>& payloads) {
    // the three pairings of {0,1,2,3} in lexicographic order
    static constexpr std::array<std::array<int, 4>, 3> kPairings = {
        {{0, 1, 2, 3}, {0, 2, 1, 3}, {0, 3, 1, 2}}};
    long best = std::numeric_limits<long>::max();
    int best_idx = 0;
    bool tie = false;
    for (int k = 0; k < 3; ++k) {
        const auto& pr = kPairings[static_cast<std::size_t>(k)];
        const long cost = hamming(payloads[static_cast<std::size_t>(pr[0])],
                                  payloads[static_cast<std::size_t>(pr[1])]) +
                          hamming(payloads[static_cast<std::size_t>(pr[2])],
                                  payloads[static_cast<std::size_t>(pr[3])]);
        if (cost < best) {
            best = cost;
            best_idx = k;
            tie = false;
        } else if (cost == best) {
            tie = true;
        }
    }
    const auto& pr = kPairings[static_cast<std::size_t>(best_idx)];
    PairingResult result;
    result.pairs = {std::make_pair(pr[0], pr[1]), std::make_pair(pr[2], pr[3])};
    result.tie = tie;
    return result;
}

OverlapResult resolve_partial_overlap(const std::array<Eigen::VectorXd, 3>& codewords) {
    double best = std::numeric_limits<double>::infinity();
    OverlapResult result;
    bool tie = false;
    for (int i3 = 0; i3 < 3; ++i3) {
        const int i1 = (i3 == 0) ? 1 : 0;
        const int i2 = (i3 == 2) ? 1 : 2;
        const double cost = (codewords[static_cast<std::size_t>(i1)] +
                             codewords[static_cast<std::size_t>(i2)] -
                             codewords[static_cast<std::size_t>(i3)])
                                .squaredNorm();
        if (cost < best) {
            best = cost;
            result.overlap_index = i3;
            tie = false;
        } else if (cost == best) {
            tie = true;
        }
    }
    result.tie = tie;
    return result;
}

void sic_subtract(Eigen::MatrixXcd& Y, const DecodedUser& user, const PilotCodebook& codebook,
                  const SystemConfig& config) {
    const int block = config.L_bs + 1;
    if (user.g_hat.size() != Y.rows()) throw DimensionError("sic_subtract: channel size");
    VectorXd c_hat(block);
    c_hat.head(config.L_p) = codebook.entries.col(user.pilot_index - 1);
    c_hat.tail(config.L_bd) = user.payload_signs;
    for (int s : user.pattern_slots) {
        Y.middleCols(s * block, block).noalias() -=
            user.g_hat * c_hat.transpose().cast<std::complex<double>>();
    }
}

bool idle_detect(const Eigen::MatrixXcd& Y_slot, double sigma2, double tau_E) {
    if (sigma2 <= 0.0) return Y_slot.squaredNorm() == 0.0 && tau_E >= 0.0;
    const double v = 2.0 * Y_slot.squaredNorm() / (sigma2 * static_cast<double>(Y_slot.rows()));
    return v <= tau_E;
}

std::vector<std::pair<std::string, double>> DecodeReport::flat() const {
    return {
        {"recovered", static_cast<double>(users.size())},
        {"iterations", static_cast<double>(iterations)},
        {"sic_subtractions", static_cast<double>(sic_subtractions)},
        {"slots_redetected", static_cast<double>(slots_redetected)},
        {"incomplete_pilots", static_cast<double>(incomplete_pilots)},
        {"dropped_collisions", static_cast<double>(dropped_collisions)},
        {"collisions_no_overlap", static_cast<double>(collisions_no_overlap)},
        {"collisions_partial", static_cast<double>(collisions_partial)},
        {"collision_ties", static_cast<double>(collision_ties)},
        {"collision_unresolved", static_cast<double>(collision_unresolved)},
        {"im_rank_failures", static_cast<double>(im_rank_failures)},
        {"aborted_slots", static_cast<double>(aborted_slots)},
        {"singular_estimates", static_cast<double>(singular_estimates)},
        {"terminated_all_idle", terminated_all_idle ? 1.0 : 0.0},
        {"terminated_overcrowded", terminated_overcrowded ? 1.0 : 0.0},
        {"terminated_t_max", terminated_t_max ? 1.0 : 0.0},
        {"terminated_no_candidates", terminated_no_candidates ? 1.0 : 0.0},
    };
}

namespace {

constexpr int kRedetectPasses = 2;

// Keeps CB-ML numerically sane in the noiseless limit: the working noise
// variance never drops below a small fraction of the mean received sample
// power (or an absolute floor for an all-zero frame). The quadratic forms in
// the coordinate updates scale as sigma^-4, so the floor keeps roughly half
// the double mantissa in reserve.
double effective_sigma2(double sigma2, const Eigen::MatrixXcd& Y) {
    const double mean_power = Y.squaredNorm() / static_cast<double>(Y.size());
    return std::max({sigma2, 1e-5 * mean_power, 1e-30});
}

double activity_threshold(const SystemConfig& config, double sigma2) {
    return std::max(config.cbml_threshold_scale * sigma2, config.cbml_threshold_abs);
}

struct DetectCounters {
    int aborted = 0;
    int singular = 0;
};

SlotDetection detect_one_slot(const Eigen::MatrixXcd& Y, const PilotCodebook& codebook,
                              const SystemConfig& config, double sigma2, int ns,
                              const CbmlOptions& base_options, int passes,
                              const Eigen::VectorXd* warm, DetectCounters* counters) {
    const int block = config.L_bs + 1;
    const auto Y_p = Y.middleCols(ns * block, config.L_p);
    CbmlOptions options = base_options;
    options.passes = passes;
    options.order_seed = mix_seed(base_options.order_seed, static_cast<std::uint64_t>(ns));

    SlotDetection det;
    try {
        det = cbml_detect(Y_p, codebook, sigma2, options, warm);
    } catch (const NumericError&) {
        det.active_pilots.clear();
        det.gamma = Eigen::VectorXd::Zero(codebook.size());
        if (counters) ++counters->aborted;
    }
    det.slot_index = ns;
    if (!det.active_pilots.empty()) {
        try {
            det.G_hat = estimate_channels(Y_p, codebook, det.active_pilots);
        } catch (const NumericError&) {
            det.G_hat.resize(Y.rows(), 0);
            if (counters) ++counters->singular;
        }
    } else {
        det.G_hat.resize(Y.rows(), 0);
    }
    return det;
}

bool slot_estimable(const SlotDetection& det) {
    return det.G_hat.cols() == static_cast<Eigen::Index>(det.active_pilots.size()) &&
           !det.active_pilots.empty();
}

}  // namespace

std::vector<SlotDetection> detect_slots(const Eigen::MatrixXcd& Y, const PilotCodebook& codebook,
                                        const SystemConfig& config, double sigma2) {
    const double s2 = effective_sigma2(sigma2, Y);
    CbmlOptions options;
    options.passes = config.cbml_passes;
    options.threshold = activity_threshold(config, s2);
    options.randomized_order = config.cbml_randomized_order;
    options.order_seed = config.seed;
    std::vector<SlotDetection> detections;
    detections.reserve(static_cast<std::size_t>(config.N_slot));
    for (int ns = 0; ns < config.N_slot; ++ns) {
        detections.push_back(detect_one_slot(Y, codebook, config, s2, ns, options,
                                             options.passes, nullptr, nullptr));
    }
    return detections;
}

DecodeReport decode_frame(const Eigen::MatrixXcd& Y_in, const PilotCodebook& codebook,
                          const AccessPatternPool& pool, const SystemConfig& config,
                          ScdVariant variant, std::uint64_t seed) {
    const int block = config.L_bs + 1;
    const int N_slot = config.N_slot;
    const int K = config.K;
    const int M = config.M;
    if (Y_in.cols() != config.N_cu) throw DimensionError("decode_frame: Y columns != N_cu");

    MatrixXcd Y = Y_in;
    const double sigma2 = effective_sigma2(sigma2_from_snr(config), Y_in);

    CbmlOptions options;
    options.passes = config.cbml_passes;
    options.threshold = activity_threshold(config, sigma2);
    options.randomized_order = config.cbml_randomized_order;
    options.order_seed = seed;

    DecodeReport report;
    DetectCounters counters;

    std::vector<SlotDetection> det;
    det.reserve(static_cast<std::size_t>(N_slot));
    for (int ns = 0; ns < N_slot; ++ns) {
        det.push_back(detect_one_slot(Y, codebook, config, sigma2, ns, options, options.passes,
                                      nullptr, &counters));
    }

    std::vector<long> slot_rev(static_cast<std::size_t>(N_slot), 0);
    std::vector<long> stalled_at(static_cast<std::size_t>(N_slot), -1);
    long progress_epoch = 0;
    std::set<int> recovered_pilots;

    // per-slot payload decomposition, cached against the slot revision
    struct ScdCache {
        long rev = -1;
        bool ok = false;
        MatrixXd signs;  // n_act x L_bd
    };
    std::vector<ScdCache> scd_cache(static_cast<std::size_t>(N_slot));

    auto decompose_slot = [&](int ns) -> const ScdCache& {
        ScdCache& cache = scd_cache[static_cast<std::size_t>(ns)];
        if (cache.rev == slot_rev[static_cast<std::size_t>(ns)]) return cache;
        cache.rev = slot_rev[static_cast<std::size_t>(ns)];
        cache.ok = false;
        const SlotDetection& d = det[static_cast<std::size_t>(ns)];
        const int n_act = static_cast<int>(d.active_pilots.size());
        if (n_act == 0 || n_act > M || !slot_estimable(d)) return cache;
        if (variant == ScdVariant::kMl && n_act > config.ml_cap) return cache;
        cache.signs.resize(n_act, config.L_bd);
        for (int lb = 0; lb < config.L_bd; ++lb) {
            BitSliceProblem p;
            p.y = Y.col(ns * block + config.L_p + lb);
            p.G = d.G_hat;
            VectorXd s;
            if (variant == ScdVariant::kMl) {
                s = ml_decompose(p, config.ml_cap);
            } else {
                SdrOptions sdr_opts;
                sdr_opts.samples = config.sdr_samples;
                const std::uint64_t salt = (static_cast<std::uint64_t>(ns) << 40) ^
                                           (static_cast<std::uint64_t>(cache.rev) << 20) ^
                                           static_cast<std::uint64_t>(lb);
                try {
                    s = sdr_decompose(p, mix_seed(seed, salt), sdr_opts);
                } catch (const NumericError&) {
                    if (n_act > config.ml_cap) return cache;
                    s = ml_decompose(p, config.ml_cap);
                }
            }
            cache.signs.col(lb) = s;
        }
        cache.ok = true;
        return cache;
    };

    // Assembles a user from pilot index, occurrence pattern, payload signs and
    // channel estimate; rejects patterns outside the usable pool rows.
    auto make_user = [&](int pilot, const std::vector<int>& pattern, const VectorXd& signs,
                         const VectorXcd& g_hat, std::vector<DecodedUser>& out) -> bool {
        const std::int64_t rank = pool.rank_of(pattern);
        if (rank >= pool.usable_rows()) {
            ++report.im_rank_failures;
            return false;
        }
        DecodedUser u;
        u.pilot_index = pilot;
        u.pattern_slots = pattern;
        u.payload_signs = signs;
        u.g_hat = g_hat;
        u.pilot_bits = bin(static_cast<std::uint64_t>(pilot) - 1, config.L_bp);
        u.data_bits.resize(static_cast<std::size_t>(config.L_bd));
        for (int i = 0; i < config.L_bd; ++i)
            u.data_bits[static_cast<std::size_t>(i)] = signs(i) > 0.0 ? 1 : 0;
        u.im_bits = bin(static_cast<std::uint64_t>(rank), config.L_bI);
        u.message_bits = u.pilot_bits;
        u.message_bits.insert(u.message_bits.end(), u.data_bits.begin(), u.data_bits.end());
        u.message_bits.insert(u.message_bits.end(), u.im_bits.begin(), u.im_bits.end());
        out.push_back(std::move(u));
        return true;
    };

    // payload signs of one pilot on one slot, when the slot is decomposable
    auto payload_on_slot = [&](int ns, int pilot, VectorXd& out) -> bool {
        const SlotDetection& d = det[static_cast<std::size_t>(ns)];
        if (static_cast<int>(d.active_pilots.size()) > M) return false;
        const ScdCache& cache = decompose_slot(ns);
        if (!cache.ok) return false;
        const auto it = std::find(d.active_pilots.begin(), d.active_pilots.end(), pilot);
        if (it == d.active_pilots.end()) return false;
        out = cache.signs.row(static_cast<Eigen::Index>(it - d.active_pilots.begin()));
        return true;
    };

    auto channel_on_slot = [&](int ns, int pilot) -> VectorXcd {
        const SlotDetection& d = det[static_cast<std::size_t>(ns)];
        const auto it = std::find(d.active_pilots.begin(), d.active_pilots.end(), pilot);
        return d.G_hat.col(static_cast<Eigen::Index>(it - d.active_pilots.begin()));
    };

    // t_max bounds SIC rounds; fruitless slot visits are bounded separately by
    // the stall marks (at most N_slot of them between consecutive recoveries).
    int sic_rounds = 0;
    for (;;) {
        if (sic_rounds >= config.t_max) {
            report.terminated_t_max = true;
            break;
        }

        bool all_idle = true;
        for (int ns = 0; ns < N_slot && all_idle; ++ns)
            all_idle = idle_detect(Y.middleCols(ns * block, block), sigma2, config.tau_E);
        if (all_idle) {
            report.terminated_all_idle = true;
            break;
        }

        // smallest nonzero |U|, skipping slots stalled at the current epoch
        int selected = -1;
        std::size_t selected_count = 0;
        for (int ns = 0; ns < N_slot; ++ns) {
            const std::size_t n_act = det[static_cast<std::size_t>(ns)].active_pilots.size();
            if (n_act == 0) continue;
            if (stalled_at[static_cast<std::size_t>(ns)] == progress_epoch) continue;
            if (selected == -1 || n_act < selected_count) {
                selected = ns;
                selected_count = n_act;
            }
        }
        if (selected == -1) {
            report.terminated_no_candidates = true;
            break;
        }
        if (static_cast<int>(selected_count) > M) {
            report.terminated_overcrowded = true;
            break;
        }

        const PilotOccurrenceMap occurrences = match_pilots(det);
        std::vector<DecodedUser> newly;

        for (int pilot : det[static_cast<std::size_t>(selected)].active_pilots) {
            if (recovered_pilots.count(pilot)) continue;
            const std::vector<int>& occ = occurrences.at(pilot);
            const int cnt = static_cast<int>(occ.size());

            if (cnt < K) {
                ++report.incomplete_pilots;
                continue;
            }
            if (cnt == K) {
                VectorXd signs;
                if (!payload_on_slot(selected, pilot, signs)) continue;
                make_user(pilot, occ, signs, channel_on_slot(selected, pilot), newly);
                continue;
            }
            if (K == 2 && cnt == K + 1) {
                // partial overlap: one slot carries both colliding users
                std::array<VectorXd, 3> payloads;
                bool available = true;
                for (int i = 0; i < 3 && available; ++i)
                    available = payload_on_slot(occ[static_cast<std::size_t>(i)], pilot,
                                                payloads[static_cast<std::size_t>(i)]);
                if (!available) {
                    ++report.collision_unresolved;
                    continue;
                }
                const OverlapResult r = resolve_partial_overlap(payloads);
                if (r.tie) ++report.collision_ties;
                ++report.collisions_partial;
                const int overlap_slot = occ[static_cast<std::size_t>(r.overlap_index)];
                for (int i = 0; i < 3; ++i) {
                    if (i == r.overlap_index) continue;
                    const int solo = occ[static_cast<std::size_t>(i)];
                    std::vector<int> pattern = {overlap_slot, solo};
                    std::sort(pattern.begin(), pattern.end());
                    make_user(pilot, pattern, payloads[static_cast<std::size_t>(i)],
                              channel_on_slot(solo, pilot), newly);
                }
                continue;
            }
            if (K == 2 && cnt == K + 2) {
                // no overlap: two users on four distinct slots
                std::array<VectorXd, 4> payloads;
                bool available = true;
                for (int i = 0; i < 4 && available; ++i)
                    available = payload_on_slot(occ[static_cast<std::size_t>(i)], pilot,
                                                payloads[static_cast<std::size_t>(i)]);
                if (!available) {
                    ++report.collision_unresolved;
                    continue;
                }
                const PairingResult r = resolve_no_overlap(payloads);
                if (r.tie) ++report.collision_ties;
                ++report.collisions_no_overlap;
                for (const auto& [a, b] : r.pairs) {
                    const int slot_a = occ[static_cast<std::size_t>(a)];
                    const int slot_b = occ[static_cast<std::size_t>(b)];
                    // payload and channel from the less crowded copy
                    const std::size_t na =
                        det[static_cast<std::size_t>(slot_a)].active_pilots.size();
                    const std::size_t nb =
                        det[static_cast<std::size_t>(slot_b)].active_pilots.size();
                    const int source_idx = (nb < na) ? b : a;
                    const int source = occ[static_cast<std::size_t>(source_idx)];
                    std::vector<int> pattern = {slot_a, slot_b};
                    std::sort(pattern.begin(), pattern.end());
                    make_user(pilot, pattern, payloads[static_cast<std::size_t>(source_idx)],
                              channel_on_slot(source, pilot), newly);
                }
                continue;
            }
            ++report.dropped_collisions;
        }

        if (newly.empty()) {
            stalled_at[static_cast<std::size_t>(selected)] = progress_epoch;
            continue;
        }

        ++sic_rounds;
        report.iterations = sic_rounds;
        std::set<int> touched;
        for (auto& user : newly) {
            user.iteration = sic_rounds;
            sic_subtract(Y, user, codebook, config);
            ++report.sic_subtractions;
            recovered_pilots.insert(user.pilot_index);
            touched.insert(user.pattern_slots.begin(), user.pattern_slots.end());
            report.users.push_back(std::move(user));
        }

        ++progress_epoch;
        for (int ns : touched) {
            Eigen::VectorXd warm = det[static_cast<std::size_t>(ns)].gamma;
            if (warm.size() == codebook.size()) {
                for (int pilot : recovered_pilots) warm(pilot - 1) = 0.0;
            }
            const Eigen::VectorXd* warm_ptr = warm.size() == codebook.size() ? &warm : nullptr;
            det[static_cast<std::size_t>(ns)] = detect_one_slot(
                Y, codebook, config, sigma2, ns, options, kRedetectPasses, warm_ptr, &counters);
            ++slot_rev[static_cast<std::size_t>(ns)];
            ++report.slots_redetected;
        }
    }

    report.aborted_slots = counters.aborted;
    report.singular_estimates = counters.singular;
    return report;
}

}  // namespace imura
