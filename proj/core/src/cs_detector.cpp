#include "imura/cs_detector.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Rebuild Sigma = sigma2 I + A diag(xi) A' from the nonzero coefficients and
// refresh its inverse and P1 = Sigma^-1 S Sigma^-1 by Cholesky. Used for the
// warm start and to bound drift of the incremental rank-one updates.
void refactor(const MatrixXd& A, const VectorXd& xi, double sigma2, const MatrixXd& S,
              MatrixXd& sigma_inv, MatrixXd& P1) {
    const int L_p = static_cast<int>(A.rows());
    MatrixXd sigma = sigma2 * MatrixXd::Identity(L_p, L_p);
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        if (xi(i) != 0.0) sigma.noalias() += xi(i) * A.col(i) * A.col(i).transpose();
    }
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NumericError("cbml_detect: covariance lost positive-definiteness");
    sigma_inv = llt.solve(MatrixXd::Identity(L_p, L_p));
    P1.noalias() = sigma_inv * S * sigma_inv;
}

}  // namespace

SlotDetection cbml_detect(const Eigen::MatrixXcd& Y_p, const PilotCodebook& codebook,
                          double sigma2, const CbmlOptions& options,
                          const Eigen::VectorXd* warm_start) {
    const MatrixXd& A = codebook.entries;
    const int L_p = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (Y_p.cols() != L_p) throw DimensionError("cbml_detect: Y_p columns != L_p");
    if (sigma2 <= 0.0) throw DimensionError("cbml_detect: sigma2 > 0 required");
    const int M = static_cast<int>(Y_p.rows());

    // Sample covariance (1/M) Y' Y. Only its real part enters the real
    // quadratic forms a' Sigma^-1 Sigma_y Sigma^-1 a (A is real, the
    // imaginary part is antisymmetric and cancels).
    MatrixXd S(L_p, L_p);
    {
        const MatrixXd Yr = Y_p.real();
        const MatrixXd Yi = Y_p.imag();
        S.noalias() = Yr.transpose() * Yr;
        S.noalias() += Yi.transpose() * Yi;
        S /= static_cast<double>(M);
    }

    SlotDetection det;
    VectorXd& xi = det.gamma;
    MatrixXd sigma_inv, P1;
    if (warm_start != nullptr) {
        if (warm_start->size() != n) throw DimensionError("cbml_detect: warm start size");
        xi = *warm_start;
        refactor(A, xi, sigma2, S, sigma_inv, P1);
    } else {
        xi = VectorXd::Zero(n);
        sigma_inv = MatrixXd::Identity(L_p, L_p) / sigma2;
        P1 = S / (sigma2 * sigma2);
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(mix_seed(options.order_seed, 0x0DDEull));

    VectorXd u(L_p), m(L_p);
    long updates = 0;
    for (int pass = 0; pass < options.passes; ++pass) {
        if (options.randomized_order) {
            for (int i = n - 1; i > 0; --i) {
                const int j = static_cast<int>(order_rng.uniform_below(
                    static_cast<std::uint64_t>(i) + 1));
                std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
            }
        }
        for (int t : order) {
            const auto a = A.col(t);
            u.noalias() = sigma_inv * a;
            m.noalias() = P1 * a;
            const double q0 = a.dot(u);       // a' Sigma^-1 a
            const double q1 = a.dot(m);       // a' Sigma^-1 Sigma_y Sigma^-1 a
            const double d0 = std::max((q1 - q0) / (q0 * q0), -xi(t));
            if (d0 == 0.0) continue;
            const double denom = 1.0 + d0 * q0;
            if (denom <= 0.0)
                throw NumericError("cbml_detect: rank-one update denominator <= 0");
            const double c = d0 / denom;
            xi(t) += d0;
            // Sherman-Morrison on Sigma^-1; P1 = Sigma^-1 S Sigma^-1 follows
            // by the same substitution (u' S Sigma^-1 = m', u' S u = q1).
            sigma_inv.noalias() -= c * u * u.transpose();
            P1.noalias() -= c * (u * m.transpose() + m * u.transpose());
            P1.noalias() += (c * c * q1) * u * u.transpose();
            if (++updates % options.refactor_interval == 0)
                refactor(A, xi, sigma2, S, sigma_inv, P1);
        }
    }

    for (int i = 0; i < n; ++i)
        if (xi(i) > options.threshold) det.active_pilots.push_back(i + 1);
    return det;
}

Eigen::MatrixXcd estimate_channels(const Eigen::MatrixXcd& Y_p, const PilotCodebook& codebook,
                                   const std::vector<int>& active_pilots) {
    if (active_pilots.empty()) throw DimensionError("estimate_channels: empty active set");
    const int L_p = codebook.pilot_length();
    if (Y_p.cols() != L_p) throw DimensionError("estimate_channels: Y_p columns != L_p");
    const int n_act = static_cast<int>(active_pilots.size());

    MatrixXd A_act(L_p, n_act);
    for (int j = 0; j < n_act; ++j) {
        const int idx = active_pilots[static_cast<std::size_t>(j)];
        if (idx < 1 || idx > codebook.size())
            throw DimensionError("estimate_channels: pilot index out of range");
        A_act.col(j) = codebook.entries.col(idx - 1);
    }

    const MatrixXd gram = A_act.transpose() * A_act;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    if (lmin <= 0.0 || lmax / lmin > 1e10)
        throw NumericError("estimate_channels: singular-design");

    // Least-squares solve of A_act X = Y_p^T (the formula written as MMSE in
    // the source material is the pseudo-inverse); G_hat = X^T is M x n_act.
    const Eigen::MatrixXcd rhs = A_act.transpose() * Y_p.transpose();
    Eigen::LLT<MatrixXd> llt(gram);
    Eigen::MatrixXcd X(n_act, Y_p.rows());
    X.real() = llt.solve(rhs.real().eval());
    X.imag() = llt.solve(rhs.imag().eval());
    return X.transpose();
}

std::vector<BitVector> decode_pilot_bits(const std::vector<int>& active_pilots, int L_bp) {
    std::vector<BitVector> bits;
    bits.reserve(active_pilots.size());
    for (int idx : active_pilots) {
        if (idx < 1 || idx > (1 << L_bp))
            throw DimensionError("decode_pilot_bits: pilot index out of range");
        bits.push_back(bin(static_cast<std::uint64_t>(idx) - 1, L_bp));
    }
    return bits;
}

}  // namespace imura
