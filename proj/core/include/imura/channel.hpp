#pragma once

#include <vector>

#include <Eigen/Dense>

#include "imura/rng.hpp"

namespace imura {

// Block-fading MIMO channel: one i.i.d. CN(0,1) draw per user per frame
// (column u of G), constant across all sub-slots.
struct ChannelRealization {
    Eigen::MatrixXcd G;  // M x N_a
    double sigma2 = 0.0;
};

ChannelRealization draw_channel(int M, int N_a, double sigma2, Rng& rng);

// Y = sum_u g_u x_u^T + noise, noise i.i.d. CN(0, sigma2)
// (real and imaginary parts each sigma2/2).
Eigen::MatrixXcd transmit(const std::vector<Eigen::VectorXd>& signals,
                          const ChannelRealization& channel, Rng& rng);

}  // namespace imura
