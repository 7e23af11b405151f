#include "imura/channel.hpp"

#include <cmath>
#include <complex>

#include "imura/errors.hpp"

namespace imura {

ChannelRealization draw_channel(int M, int N_a, double sigma2, Rng& rng) {
    if (M < 1 || N_a < 1) throw DimensionError("draw_channel: M, N_a >= 1");
    if (sigma2 < 0.0) throw DimensionError("draw_channel: sigma2 >= 0");
    ChannelRealization ch;
    ch.sigma2 = sigma2;
    ch.G.resize(M, N_a);
    const double scale = std::sqrt(0.5);
    for (int u = 0; u < N_a; ++u)
        for (int m = 0; m < M; ++m)
            ch.G(m, u) = std::complex<double>(scale * rng.gaussian(), scale * rng.gaussian());
    return ch;
}

Eigen::MatrixXcd transmit(const std::vector<Eigen::VectorXd>& signals,
                          const ChannelRealization& channel, Rng& rng) {
    const int M = static_cast<int>(channel.G.rows());
    if (static_cast<int>(signals.size()) > channel.G.cols())
        throw DimensionError("transmit: more signals than channel columns");
    if (signals.empty()) throw DimensionError("transmit: no signals");
    const Eigen::Index n_cu = signals.front().size();
    for (const auto& x : signals)
        if (x.size() != n_cu) throw DimensionError("transmit: signal length mismatch");

    Eigen::MatrixXcd Y(M, n_cu);
    const double noise_scale = std::sqrt(channel.sigma2 / 2.0);
    for (Eigen::Index c = 0; c < n_cu; ++c)
        for (int m = 0; m < M; ++m)
            Y(m, c) = std::complex<double>(noise_scale * rng.gaussian(),
                                           noise_scale * rng.gaussian());
    for (std::size_t u = 0; u < signals.size(); ++u)
        Y.noalias() += channel.G.col(static_cast<Eigen::Index>(u)) * signals[u].transpose();
    return Y;
}

}  // namespace imura
