#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "imura/codebooks.hpp"
#include "imura/config.hpp"

namespace imura {

using BitVector = std::vector<std::uint8_t>;

// Big-endian bit/integer conversion: the first bit is the most significant.
// bin(dec(b), |b|) == b.
std::uint64_t dec(const BitVector& bits);
BitVector bin(std::uint64_t n, int width);

// A user message and its three-way split (pilot | data | index), contiguous
// left-to-right slices of the L_bs message bits.
struct Message {
    BitVector bits;

    BitVector pilot_bits(const SystemConfig& c) const;  // first L_bp
    BitVector data_bits(const SystemConfig& c) const;   // next L_bd
    BitVector im_bits(const SystemConfig& c) const;     // last L_bI
};

Message random_message(const SystemConfig& config, class Rng& rng);

struct Codeword {
    int pilot_index = 0;              // 1-based column of the pilot codebook
    Eigen::VectorXd bpsk;             // length L_bd, entries +-1
    std::vector<int> pattern_slots;   // K chosen sub-slots, 0-based ascending
    std::vector<std::uint8_t> access_pattern;  // binary, length N_slot
    Eigen::VectorXd symbols;          // length L_bs+1: pilot column || bpsk
};

struct EncodedUser {
    Codeword codeword;
    Eigen::VectorXd x;  // transmitted signal, length N_cu
};

// Fig.-1 style encoding: pilot_index = dec(b_p)+1, bpsk = 2 b_d - 1,
// access pattern = pool row dec(b_I), x = s_AP (kron) c.
EncodedUser encode_user(const Message& msg, const PilotCodebook& codebook,
                        const AccessPatternPool& pool, const SystemConfig& config);

}  // namespace imura
