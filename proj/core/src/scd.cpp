#include "imura/scd.hpp"

#include <cmath>
#include <limits>

#include "imura/errors.hpp"
#include "imura/rng.hpp"

namespace imura {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::VectorXd ml_decompose(const BitSliceProblem& p, int cap) {
    const int N = static_cast<int>(p.G.cols());
    if (N < 1) throw DimensionError("ml_decompose: empty problem");
    if (p.y.size() != p.G.rows()) throw DimensionError("ml_decompose: y/G row mismatch");
    if (N > cap) throw DimensionError("ml_decompose: cap-exceeded");

    VectorXd best(N), c(N);
    double best_obj = std::numeric_limits<double>::infinity();
    const std::uint32_t total = 1u << N;
    for (std::uint32_t k = 0; k < total; ++k) {
        // lexicographic enumeration, +1 before -1, first element most significant
        for (int i = 0; i < N; ++i)
            c(i) = ((k >> (N - 1 - i)) & 1u) ? -1.0 : 1.0;
        const double obj = (p.y - p.G * c).squaredNorm();
        if (obj < best_obj) {
            best_obj = obj;
            best = c;
        }
    }
    return best;
}

double residual_norm2(const BitSliceProblem& p, const Eigen::VectorXd& c) {
    return (p.y - p.G * c).squaredNorm();
}

SdrInstance build_sdr_instance(const BitSliceProblem& p) {
    const int N = static_cast<int>(p.G.cols());
    const int M = static_cast<int>(p.G.rows());
    VectorXd y_r(2 * M);
    y_r.head(M) = p.y.real();
    y_r.tail(M) = p.y.imag();
    MatrixXd G_r(2 * M, N);
    G_r.topRows(M) = p.G.real();
    G_r.bottomRows(M) = p.G.imag();

    SdrInstance inst;
    inst.N = N;
    inst.G_tilde.resize(N + 1, N + 1);
    inst.G_tilde.topLeftCorner(N, N).noalias() = G_r.transpose() * G_r;
    inst.G_tilde.topRightCorner(N, 1).noalias() = -G_r.transpose() * y_r;
    inst.G_tilde.bottomLeftCorner(1, N) = inst.G_tilde.topRightCorner(N, 1).transpose();
    inst.G_tilde(N, N) = 0.0;
    return inst;
}

SdpSolution sdp_solve(const SdrInstance& inst, double tol, int max_sweeps) {
    const int n = inst.N + 1;
    if (inst.G_tilde.rows() != n || inst.G_tilde.cols() != n)
        throw DimensionError("sdp_solve: G_tilde shape");
    const MatrixXd G = 0.5 * (inst.G_tilde + inst.G_tilde.transpose());

    // v_i <- -normalize(sum_j G_ij v_j), cycled until the objective settles.
    MatrixXd V = MatrixXd::Identity(n, n);
    double obj = G.diagonal().sum();
    const double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            VectorXd g = VectorXd::Zero(n);
            for (int j = 0; j < n; ++j) {
                if (j != i) g.noalias() += G(i, j) * V.row(j).transpose();
            }
            const double norm = g.norm();
            if (norm > 1e-300) V.row(i) = -g.transpose() / norm;
        }
        const double new_obj = (G * V).cwiseProduct(V).sum();
        if (std::abs(obj - new_obj) <= tol * std::max(scale, std::abs(new_obj))) {
            obj = new_obj;
            ++sweep;
            break;
        }
        obj = new_obj;
    }
    if (sweep >= max_sweeps) throw NumericError("sdp_solve: no-convergence");

    SdpSolution sol;
    sol.V = V;
    sol.C = V * V.transpose();
    sol.C = 0.5 * (sol.C + sol.C.transpose()).eval();
    sol.C.diagonal().setOnes();
    sol.objective = (G * sol.C).trace();
    sol.sweeps = sweep;
    return sol;
}

Eigen::VectorXd sdr_decompose(const BitSliceProblem& p, std::uint64_t seed,
                              const SdrOptions& options) {
    const SdrInstance inst = build_sdr_instance(p);
    const SdpSolution sol = sdp_solve(inst, options.tol, options.max_sweeps);
    const int n = inst.N + 1;

    Rng rng(mix_seed(seed, 0x5D12ull));
    VectorXd xi(n), z(n), cand(n), best(n);
    double best_obj = std::numeric_limits<double>::infinity();
    for (int s = 0; s < options.samples; ++s) {
        for (int i = 0; i < n; ++i) xi(i) = rng.gaussian();
        z.noalias() = sol.V * xi;  // covariance C* = V V'
        for (int i = 0; i < n; ++i) cand(i) = (z(i) < 0.0) ? -1.0 : 1.0;
        const double obj = cand.dot(inst.G_tilde * cand);
        if (obj < best_obj) {
            best_obj = obj;
            best = cand;
        }
    }
    // de-homogenize: slack coordinate forced to +1
    return best(n - 1) * best.head(inst.N);
}

}  // namespace imura
