#include "imura/encoder.hpp"

#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {

std::uint64_t dec(const BitVector& bits) {
    if (bits.size() > 64) throw DimensionError("dec: more than 64 bits");
    std::uint64_t value = 0;
    for (std::uint8_t b : bits) {
        if (b > 1) throw DimensionError("dec: non-binary entry");
        value = (value << 1) | b;
    }
    return value;
}

BitVector bin(std::uint64_t n, int width) {
    if (width < 0 || width > 64) throw DimensionError("bin: bad width");
    if (width < 64 && n >= (std::uint64_t{1} << width))
        throw DimensionError("bin: overflow, n >= 2^width");
    BitVector bits(static_cast<std::size_t>(width));
    for (int i = width - 1; i >= 0; --i) {
        bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n & 1u);
        n >>= 1;
    }
    return bits;
}

namespace {

BitVector slice(const BitVector& bits, int offset, int len) {
    return BitVector(bits.begin() + offset, bits.begin() + offset + len);
}

}  // namespace

BitVector Message::pilot_bits(const SystemConfig& c) const { return slice(bits, 0, c.L_bp); }
BitVector Message::data_bits(const SystemConfig& c) const { return slice(bits, c.L_bp, c.L_bd); }
BitVector Message::im_bits(const SystemConfig& c) const {
    return slice(bits, c.L_bp + c.L_bd, c.L_bI);
}

Message random_message(const SystemConfig& config, Rng& rng) {
    Message m;
    m.bits.resize(static_cast<std::size_t>(config.message_bits()));
    for (auto& b : m.bits) b = rng.bit() ? 1 : 0;
    return m;
}

EncodedUser encode_user(const Message& msg, const PilotCodebook& codebook,
                        const AccessPatternPool& pool, const SystemConfig& config) {
    if (static_cast<int>(msg.bits.size()) != config.message_bits())
        throw DimensionError("encode_user: message length != L_bp + L_bd + L_bI");
    if (codebook.pilot_length() != config.L_p)
        throw DimensionError("encode_user: codebook pilot length mismatch");

    EncodedUser user;
    Codeword& cw = user.codeword;

    cw.pilot_index = static_cast<int>(dec(msg.pilot_bits(config))) + 1;

    const BitVector bd = msg.data_bits(config);
    cw.bpsk.resize(config.L_bd);
    for (int i = 0; i < config.L_bd; ++i)
        cw.bpsk(i) = 2.0 * bd[static_cast<std::size_t>(i)] - 1.0;

    const std::int64_t row = static_cast<std::int64_t>(dec(msg.im_bits(config)));
    if (row >= pool.usable_rows())
        throw DimensionError("encode_user: index-out-of-pool");
    cw.pattern_slots = pool.slots(row);
    cw.access_pattern = pool.binary_row(row);

    const int block = config.L_bs + 1;
    cw.symbols.resize(block);
    cw.symbols.head(config.L_p) = codebook.entries.col(cw.pilot_index - 1);
    cw.symbols.tail(config.L_bd) = cw.bpsk;

    user.x = Eigen::VectorXd::Zero(config.N_cu);
    for (int s : cw.pattern_slots) user.x.segment(s * block, block) = cw.symbols;
    return user;
}

}  // namespace imura
