#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace imura {

// One payload-bit column on one sub-slot: y = G c + n with c in {+-1}^N.
struct BitSliceProblem {
    Eigen::VectorXcd y;  // length M
    Eigen::MatrixXcd G;  // M x N estimated channels of the colliding codewords
};

// Homogenized real BQP form of the slice. For any s in {+-1}^N,
// [s;1]' G_tilde [s;1] = ||y_r - G_r s||^2 - ||y_r||^2.
struct SdrInstance {
    Eigen::MatrixXd G_tilde;  // (N+1) x (N+1), symmetric
    int N = 0;
};

struct SdpSolution {
    Eigen::MatrixXd C;  // (N+1) x (N+1), PSD, unit diagonal
    Eigen::MatrixXd V;  // factor with unit-norm rows, C = V V'
    double objective = 0.0;  // Tr(G_tilde C)
    int sweeps = 0;
};

struct SdrOptions {
    int samples = 150;     // Gaussian rounding candidates
    double tol = 1e-11;    // relative objective change declaring convergence
    int max_sweeps = 20000;
};

// Exhaustive minimization of ||y - G c||^2 over c in {+-1}^N; ties broken by
// the lexicographically smallest vector (+1 before -1). Throws DimensionError
// when N exceeds `cap`.
Eigen::VectorXd ml_decompose(const BitSliceProblem& p, int cap = 16);

// Objective value ||y - G c||^2 for a sign vector (oracle-facing helper).
double residual_norm2(const BitSliceProblem& p, const Eigen::VectorXd& c);

SdrInstance build_sdr_instance(const BitSliceProblem& p);

// Minimizes Tr(G_tilde C) over PSD C with unit diagonal, via block-coordinate
// descent on the factorization C = V V' with unit-norm rows (rank N+1, which
// is above the Barvinok-Pataki bound, so descent reaches the SDP optimum).
// Throws NumericError("no-convergence") at the sweep cap.
SdpSolution sdp_solve(const SdrInstance& inst, double tol = 1e-11, int max_sweeps = 20000);

// SDR with Gaussian randomized rounding: draws `samples` vectors with
// covariance C*, applies sign (0 -> +1), keeps the candidate with the
// smallest homogenized objective (first sampled wins ties), then forces the
// slack coordinate to +1. Deterministic for a given seed.
Eigen::VectorXd sdr_decompose(const BitSliceProblem& p, std::uint64_t seed,
                              const SdrOptions& options = {});

}  // namespace imura
