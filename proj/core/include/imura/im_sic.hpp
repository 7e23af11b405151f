#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "imura/channel.hpp"
#include "imura/codebooks.hpp"
#include "imura/config.hpp"
#include "imura/cs_detector.hpp"
#include "imura/encoder.hpp"
#include "imura/scd.hpp"

namespace imura {

enum class ScdVariant { kMl, kSdr };

// pilot index -> ascending list of sub-slots where it was detected
using PilotOccurrenceMap = std::map<int, std::vector<int>>;

PilotOccurrenceMap match_pilots(const std::vector<SlotDetection>& detections);

struct PairingResult {
    std::array<std::pair<int, int>, 2> pairs;  // indices into the 4 inputs
    bool tie = false;
};

// Four copies of one pilot, two hidden users with disjoint patterns: pick the
// pairing minimizing hdis(c_i1, c_i2) + hdis(c_i3, c_i4) over the 3 pairings.
PairingResult resolve_no_overlap(const std::array<Eigen::VectorXd, 4>& payloads);

struct OverlapResult {
    int overlap_index = 0;  // which of the 3 inputs is the doubly-occupied slot
    bool tie = false;
};

// Three slots, one carrying both users: pick i3 minimizing
// ||c_i1 + c_i2 - c_i3||^2 over the 3 choices.
OverlapResult resolve_partial_overlap(const std::array<Eigen::VectorXd, 3>& codewords);

struct DecodedUser {
    int pilot_index = 0;                 // 1-based
    std::vector<int> pattern_slots;      // 0-based, ascending, size K
    BitVector pilot_bits, data_bits, im_bits, message_bits;
    Eigen::VectorXd payload_signs;       // length L_bd, +-1
    Eigen::VectorXcd g_hat;              // channel estimate used for SIC
    int iteration = 0;                   // SIC round that recovered this user
};

// Y -= g_hat * (s_AP kron c_hat)^T restricted to the user's K slots; the
// reconstruction is channel-scaled (the subtraction is dimensionless
// otherwise).
void sic_subtract(Eigen::MatrixXcd& Y, const DecodedUser& user, const PilotCodebook& codebook,
                  const SystemConfig& config);

// Energy test: v = (2/sigma2) ||Y_slot||_F^2 / M (per-antenna average);
// idle iff v <= tau_E.
bool idle_detect(const Eigen::MatrixXcd& Y_slot, double sigma2, double tau_E);

struct DecodeReport {
    std::vector<DecodedUser> users;
    int iterations = 0;
    int sic_subtractions = 0;
    int slots_redetected = 0;
    // per-stage diagnostics
    int incomplete_pilots = 0;    // detected in fewer than K slots when processed
    int dropped_collisions = 0;   // detected in more than K+2 slots
    int collisions_no_overlap = 0;
    int collisions_partial = 0;
    int collision_ties = 0;
    int collision_unresolved = 0;  // payloads unavailable on an involved slot
    int im_rank_failures = 0;      // occurrence pattern outside usable pool rows
    int aborted_slots = 0;         // CB-ML numeric breakdown
    int singular_estimates = 0;    // channel estimation dropped for a slot
    bool terminated_all_idle = false;
    bool terminated_overcrowded = false;
    bool terminated_t_max = false;
    bool terminated_no_candidates = false;

    // flat per-trial record for the harness
    std::vector<std::pair<std::string, double>> flat() const;
};

// Detect every sub-slot of a frame: CB-ML support + channel estimates.
// Exposed separately for the no-SIC ablation.
std::vector<SlotDetection> detect_slots(const Eigen::MatrixXcd& Y, const PilotCodebook& codebook,
                                        const SystemConfig& config, double sigma2);

// Hard-decision decoder: slot-wise CS detection, superposed-codeword
// decomposition (ML or SDR), pilot-matching IM demodulation with two-user
// collision resolution, SIC, energy-based termination. Never reads N_a
// (t_max comes from the config). Failures are recorded in the report.
DecodeReport decode_frame(const Eigen::MatrixXcd& Y, const PilotCodebook& codebook,
                          const AccessPatternPool& pool, const SystemConfig& config,
                          ScdVariant variant, std::uint64_t seed);

}  // namespace imura
