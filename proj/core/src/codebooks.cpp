#include "imura/codebooks.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {
namespace {

// Sylvester Hadamard entry: H[r, c] = (-1)^popcount(r & c).
inline double hadamard_entry(std::uint32_t r, std::uint32_t c) {
    return (std::popcount(r & c) & 1u) ? -1.0 : 1.0;
}

// For the selected rows, the inner product of columns i and j depends only on
// m = i ^ j: <a_i, a_j> = L_p - 2 * |{k : <r_k, m> odd}|. One pass over m
// gives exact coherence and detects equal (w = 0) or negated (w = L_p) pairs.
struct ColumnSpectrum {
    double coherence;
    bool has_duplicate;
    bool has_negation;
};

ColumnSpectrum column_spectrum(const std::vector<int>& rows, int L_bp) {
    const std::uint32_t n = 1u << L_bp;
    const int L_p = static_cast<int>(rows.size());
    int max_abs = 0;
    bool dup = false, neg = false;
    for (std::uint32_t m = 1; m < n; ++m) {
        int w = 0;
        for (int k = 0; k < L_p; ++k) {
            w += std::popcount(static_cast<std::uint32_t>(rows[k]) & m) & 1;
        }
        if (w == 0) dup = true;
        if (w == L_p) neg = true;
        max_abs = std::max(max_abs, std::abs(L_p - 2 * w));
    }
    return {static_cast<double>(max_abs) / L_p, dup, neg};
}

std::vector<int> draw_rows(int L_bp, int L_p, Rng& rng) {
    const int n = 1 << L_bp;
    if (L_p == n) {
        std::vector<int> all(n);
        for (int i = 0; i < n; ++i) all[i] = i;
        return all;
    }
    // partial Fisher-Yates over rows {1, ..., n-1} (row 0 is all-ones)
    std::vector<int> pool(n - 1);
    for (int i = 0; i < n - 1; ++i) pool[i] = i + 1;
    for (int i = 0; i < L_p; ++i) {
        const int j = i + static_cast<int>(rng.uniform_below(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<int> rows(pool.begin(), pool.begin() + L_p);
    std::sort(rows.begin(), rows.end());
    return rows;
}

PilotCodebook assemble(std::vector<int> rows, int L_bp, std::uint64_t seed) {
    const int n = 1 << L_bp;
    const int L_p = static_cast<int>(rows.size());
    PilotCodebook cb;
    cb.L_bp = L_bp;
    cb.seed = seed;
    cb.row_selection = std::move(rows);
    cb.entries.resize(L_p, n);
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k < L_p; ++k) {
            cb.entries(k, c) = hadamard_entry(static_cast<std::uint32_t>(cb.row_selection[k]),
                                              static_cast<std::uint32_t>(c));
        }
    }
    cb.coherence = (L_p == n) ? 0.0 : column_spectrum(cb.row_selection, L_bp).coherence;
    return cb;
}

}  // namespace

PilotCodebook build_pilot_codebook(int L_bp, int L_p, std::uint64_t seed) {
    if (L_bp < 1 || L_bp > 24) throw DimensionError("build_pilot_codebook: L_bp out of range");
    const int n = 1 << L_bp;
    if (L_p < 1 || L_p > n)
        throw DimensionError("build_pilot_codebook: require 1 <= L_p <= 2^L_bp");

    Rng rng = Rng(mix_seed(seed, 0xC0DEB00Cull));
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<int> rows = draw_rows(L_bp, L_p, rng);
        if (L_p == n) return assemble(std::move(rows), L_bp, seed);
        const ColumnSpectrum spec = column_spectrum(rows, L_bp);
        if (!spec.has_duplicate && !spec.has_negation)
            return assemble(std::move(rows), L_bp, seed);
    }
    // L_p rows cannot separate all columns (e.g. L_p < L_bp leaves
    // 2^(L_bp - L_p) colliding pairs no matter the draw)
    throw NumericError("build_pilot_codebook: no duplicate-free row selection found");
}

PilotCodebook build_pilot_codebook(const SystemConfig& config, std::uint64_t seed) {
    return build_pilot_codebook(config.L_bp, config.L_p, seed);
}

void export_codebook(const PilotCodebook& codebook, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_codebook: cannot open " + path);
    const char magic[4] = {'I', 'M', 'C', 'B'};
    out.write(magic, 4);
    const std::uint32_t version = 1;
    const std::uint32_t lbp = static_cast<std::uint32_t>(codebook.L_bp);
    const std::uint32_t lp = static_cast<std::uint32_t>(codebook.row_selection.size());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&lbp), 4);
    out.write(reinterpret_cast<const char*>(&lp), 4);
    out.write(reinterpret_cast<const char*>(&codebook.seed), 8);
    for (int r : codebook.row_selection) {
        const std::uint32_t v = static_cast<std::uint32_t>(r);
        out.write(reinterpret_cast<const char*>(&v), 4);
    }
    if (!out) throw IoError("export_codebook: write failed for " + path);
}

PilotCodebook import_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("import_codebook: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, lbp = 0, lp = 0;
    std::uint64_t seed = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&lbp), 4);
    in.read(reinterpret_cast<char*>(&lp), 4);
    in.read(reinterpret_cast<char*>(&seed), 8);
    if (!in || std::memcmp(magic, "IMCB", 4) != 0 || version != 1)
        throw IoError("import_codebook: bad header in " + path);
    if (lbp < 1 || lbp > 24 || lp < 1 || lp > (1u << lbp))
        throw IoError("import_codebook: inconsistent dimensions in " + path);
    std::vector<int> rows(lp);
    for (auto& r : rows) {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), 4);
        if (!in || v >= (1u << lbp)) throw IoError("import_codebook: bad row index in " + path);
        r = static_cast<int>(v);
    }
    std::vector<int> sorted = rows;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw IoError("import_codebook: duplicate row index in " + path);

    const int n = 1 << lbp;
    PilotCodebook cb;
    cb.L_bp = static_cast<int>(lbp);
    cb.seed = seed;
    cb.row_selection = std::move(rows);
    cb.entries.resize(lp, n);
    for (int c = 0; c < n; ++c)
        for (std::uint32_t k = 0; k < lp; ++k)
            cb.entries(k, c) = hadamard_entry(static_cast<std::uint32_t>(cb.row_selection[k]),
                                              static_cast<std::uint32_t>(c));
    cb.coherence = (static_cast<int>(lp) == n)
                       ? 0.0
                       : column_spectrum(cb.row_selection, cb.L_bp).coherence;
    return cb;
}

namespace {

std::int64_t binomial64(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::int64_t result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
        if (result < 0 || result > (std::int64_t{1} << 62))
            throw DimensionError("access pool too large");
    }
    return result;
}

}  // namespace

AccessPatternPool::AccessPatternPool(int N_slot, int K) : N_slot_(N_slot), K_(K) {
    if (K < 1 || K >= N_slot) throw DimensionError("AccessPatternPool: require 1 <= K < N_slot");
    const std::int64_t count = binomial64(N_slot, K);
    if (count > (std::int64_t{1} << 22))
        throw DimensionError("AccessPatternPool: binomial(N_slot, K) exceeds pool cap");

    usable_rows_ = 1;
    while (usable_rows_ * 2 <= count) usable_rows_ *= 2;

    combos_.reserve(static_cast<std::size_t>(count));
    std::vector<int> combo(K);
    for (int i = 0; i < K; ++i) combo[i] = i;
    while (true) {
        combos_.push_back(combo);
        int i = K - 1;
        while (i >= 0 && combo[i] == N_slot - K + i) --i;
        if (i < 0) break;
        ++combo[i];
        for (int j = i + 1; j < K; ++j) combo[j] = combo[j - 1] + 1;
    }
}

const std::vector<int>& AccessPatternPool::slots(std::int64_t row) const {
    if (row < 0 || row >= row_count()) throw DimensionError("AccessPatternPool: row out of range");
    return combos_[static_cast<std::size_t>(row)];
}

std::vector<std::uint8_t> AccessPatternPool::binary_row(std::int64_t row) const {
    std::vector<std::uint8_t> pattern(static_cast<std::size_t>(N_slot_), 0);
    for (int s : slots(row)) pattern[static_cast<std::size_t>(s)] = 1;
    return pattern;
}

std::int64_t AccessPatternPool::rank_of(const std::vector<int>& sorted_slots) const {
    if (static_cast<int>(sorted_slots.size()) != K_)
        throw DimensionError("AccessPatternPool::rank_of: expected K slots");
    std::int64_t rank = 0;
    int start = 0;
    for (int i = 0; i < K_; ++i) {
        const int c = sorted_slots[static_cast<std::size_t>(i)];
        if (c < start || c >= N_slot_)
            throw DimensionError("AccessPatternPool::rank_of: slots not sorted/distinct/in-range");
        for (int v = start; v < c; ++v) rank += binomial64(N_slot_ - 1 - v, K_ - 1 - i);
        start = c + 1;
    }
    return rank;
}

AccessPatternPool build_access_pool(int N_slot, int K) { return AccessPatternPool(N_slot, K); }

}  // namespace imura
