#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "imura/codebooks.hpp"
#include "imura/encoder.hpp"

namespace imura {

// Per-sub-slot activity detection result. gamma is the full vector of
// large-system activity coefficients xi (size 2^L_bp); active_pilots are the
// 1-based indices with xi above threshold; G_hat columns follow that order.
struct SlotDetection {
    int slot_index = 0;
    std::vector<int> active_pilots;
    Eigen::VectorXd gamma;
    Eigen::MatrixXcd G_hat;  // M x |active|, empty until channels estimated
};

struct CbmlOptions {
    int passes = 5;
    double threshold = 0.0;          // activity threshold on xi
    bool randomized_order = false;   // coordinate order shuffled per pass
    std::uint64_t order_seed = 0;
    int refactor_interval = 4096;    // rebuild Sigma^-1 every this many updates
};

// Covariance-based ML coordinate descent on one sub-slot's pilot slice
// Y_p (M x L_p). Starts from xi = 0 (or warm_start when given), sweeps all
// coordinates `passes` times with the clamped rank-one update, returns xi and
// the thresholded support. Throws NumericError if the rank-one inverse update
// loses positive-definiteness (caller aborts the slot).
SlotDetection cbml_detect(const Eigen::MatrixXcd& Y_p, const PilotCodebook& codebook,
                          double sigma2, const CbmlOptions& options,
                          const Eigen::VectorXd* warm_start = nullptr);

// Least-squares channel estimates for the active pilot set:
// G_hat = ((A'A)^-1 A' Y_p^T)^T, M x |active|. Throws NumericError
// ("singular-design") when A'A is rank-deficient.
Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& Y_p, const PilotCodebook& codebook,
                                   const std::vector<int>& active_pilots);

// b_p = bin(i - 1, L_bp) for each detected pilot index.
std::vector<BitVector> decode_pilot_bits(const std::vector<int>& active_pilots, int L_bp);

}  // namespace imura
