/**
 * @file suppression.hpp
 * @brief Uplink interference suppression: per-user combiners drawn from the
 *        null space of the interferers' stacked channel, plus the effective
 *        channels and noise covariances seen after combining.
 */
#pragma once

#include <cstdint>
#include <vector>

#include "dmimo/numerics.hpp"
#include "dmimo/system_model.hpp"

namespace dmimo {

enum class RowSelection { kFirst, kRandom };

struct SuppressionSet {
  std::vector<ComplexMatrix> w_per_user; // W_IS,k, N_R x M N_R, orthonormal rows
  std::vector<ComplexMatrix> h_eff;      // W_IS,k H_k, N_R x N_RI,k
  std::vector<ComplexMatrix> sigma;      // noise covariance, N_R x N_R, Hermitian PD
  std::vector<double> residual_leakage;  // max_{l != k} ||W_IS,k G_l||_F
};

/// Covariance of the combined noise-plus-residual-interference for user k:
/// W (sum_{l != k} H_l H_l^H) W^H + sigma^2 I_{N_R}, Hermitian-symmetrized.
/// The interference term is kept even though it vanishes under perfect CSI.
ComplexMatrix noise_covariance(const ChannelRealization& chan, int user,
                               const ComplexMatrix& w_is_k, double sigma2);

/// Builds all per-user suppression matrices from full SVDs of the
/// interferers' channels. Throws if some user's interferer null space has
/// fewer than N_R dimensions, naming the user and the achieved rank.
SuppressionSet build_suppression(const ChannelRealization& chan, int rau_antennas,
                                 double sigma2, RowSelection selection = RowSelection::kFirst,
                                 std::uint64_t selection_seed = 0);

/// y_tilde = W_IS,k y.
ComplexMatrix apply_suppression(const ComplexMatrix& w_is_k, const ComplexMatrix& y);

} // namespace dmimo
