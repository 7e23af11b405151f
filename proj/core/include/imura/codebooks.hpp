#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "imura/config.hpp"

namespace imura {

// Common CS pilot codebook: L_p rows of a Sylvester Hadamard matrix of order
// 2^L_bp, entries +-1 (per-column normalization constant 1). Coherence is the
// largest |<a_i, a_j>| / L_p over distinct columns.
struct PilotCodebook {
    Eigen::MatrixXd entries;         // L_p x 2^L_bp, entries +-1
    std::vector<int> row_selection;  // L_p distinct Hadamard row indices
    int L_bp = 0;
    std::uint64_t seed = 0;
    double coherence = 0.0;

    int pilot_length() const { return static_cast<int>(entries.rows()); }
    int size() const { return static_cast<int>(entries.cols()); }
};

// Deterministic for a given seed. Selects L_p rows uniformly at random
// without replacement, excluding the all-ones row 0 (unless L_p = 2^L_bp,
// where every row is needed); redraws until no two columns are equal or
// negated, which guarantees coherence < 1.
PilotCodebook build_pilot_codebook(const SystemConfig& config, std::uint64_t seed);
PilotCodebook build_pilot_codebook(int L_bp, int L_p, std::uint64_t seed);

// Binary row-selection list with (L_bp, seed) header, for reproducibility.
void export_codebook(const PilotCodebook& codebook, const std::string& path);
PilotCodebook import_codebook(const std::string& path);

// Access-pattern pool H: all K-of-N_slot patterns in lexicographic order of
// the chosen slot indices. Row r of the binary matrix has ones exactly at
// slots(r). Only the first usable_rows = 2^floor(log2(C(N_slot,K))) rows are
// addressable by IM bits.
class AccessPatternPool {
  public:
    AccessPatternPool(int N_slot, int K);

    int slot_count() const { return N_slot_; }
    int repetitions() const { return K_; }
    std::int64_t row_count() const { return static_cast<std::int64_t>(combos_.size()); }
    std::int64_t usable_rows() const { return usable_rows_; }

    // 0-based slot indices of row r (0-based), ascending
    const std::vector<int>& slots(std::int64_t row) const;
    // full binary pattern of row r
    std::vector<std::uint8_t> binary_row(std::int64_t row) const;
    // lexicographic rank of a sorted slot set; inverse of slots()
    std::int64_t rank_of(const std::vector<int>& sorted_slots) const;

  private:
    int N_slot_;
    int K_;
    std::int64_t usable_rows_;
    std::vector<std::vector<int>> combos_;
};

AccessPatternPool build_access_pool(int N_slot, int K);

}  // namespace imura
