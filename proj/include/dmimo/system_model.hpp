/**
 * @file system_model.hpp
 * @brief Experiment configuration, channel generation, precoding, and the
 *        per-block transmit chain producing y = G s' + n.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmimo/coding.hpp"
#include "dmimo/numerics.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/softmaps.hpp"

namespace dmimo {

enum class ChannelModel { kIidRayleigh, kPerRauLargeScale };
enum class PrecoderMode { kColumns, kRightSingular };

struct SystemConfig {
  int num_raus = 2;       // M
  int num_users = 2;      // K
  int rau_antennas = 4;   // N_R, antennas per RAU
  int user_antennas = 4;  // N_U, antennas per user
  std::vector<int> streams_per_user = {2, 2}; // N_RI per user
  int bits_per_symbol = 4;                    // M_c: 2 QPSK, 4 16-QAM, 6 64-QAM
  std::string ldpc_code = "wifi_n648_r12";    // built-in name or alist path
  int block_symbols = 162;                    // N_L, symbols per stream per block
  double snr_db = 10.0;   // per-receive-antenna average symbol energy over sigma^2
  std::uint64_t seed = 1;
  ChannelModel channel_model = ChannelModel::kIidRayleigh;
  PrecoderMode precoder_mode = PrecoderMode::kColumns;
  double large_scale_sigma_db = 8.0; // per-RAU log-normal std for kPerRauLargeScale
  bool use_sigmoid_lut = false;      // approximate Eq-less sigmoid via lookup table

  int total_rx_antennas() const { return num_raus * rau_antennas; }
  int total_streams() const;
  int streams(int user) const { return streams_per_user.at(user); }

  /// sigma^2 = E_s * sum_k N_RI,k / 10^(snr_db/10) with unit-energy symbols,
  /// so snr_db is the per-receive-antenna total SNR under the i.i.d. model.
  double noise_variance() const;

  /// Coded bits per block for one user (must be a whole number of codewords).
  int coded_bits(int user) const { return streams(user) * block_symbols * bits_per_symbol; }

  void validate() const; // throws std::invalid_argument with a description
};

/// Immutable per-experiment objects shared by transmitter and receiver:
/// the LDPC code, constellation, per-block-length interleavers, and the
/// optional sigmoid lookup table. Safe to share across worker threads.
struct LinkContext {
  LdpcCode code;
  Constellation constellation;
  std::vector<Interleaver> interleavers; // indexed by user
  std::optional<SigmoidLut> lut;

  const SigmoidLut* lut_ptr() const { return lut ? &*lut : nullptr; }
  int codewords(const SystemConfig& cfg, int user) const {
    return cfg.coded_bits(user) / code.n;
  }
};

LinkContext make_link_context(const SystemConfig& cfg);

struct ChannelRealization {
  // Per-user channel G_k (M N_R x N_U), stacked from per-RAU blocks.
  std::vector<ComplexMatrix> g_blocks;
  // Per-user precoders P_k (N_U x N_RI,k) with orthonormal columns.
  std::vector<ComplexMatrix> precoders;
  // Effective precoded channels H_k = G_k P_k (M N_R x N_RI,k).
  std::vector<ComplexMatrix> h_effective;

  int num_users() const { return static_cast<int>(g_blocks.size()); }
  /// Full G = [G_1 ... G_K] (M N_R x K N_U).
  ComplexMatrix stacked() const;
};

ChannelRealization draw_channel(const SystemConfig& cfg, Rng& rng);

/// Orthonormal-column precoder. kColumns selects the first N_RI columns of
/// the identity; kRightSingular takes the dominant right-singular vectors of
/// G_k (errors if rank(G_k) < N_RI).
ComplexMatrix build_precoder(const ComplexMatrix& g_k, int n_streams, PrecoderMode mode);

struct TransmitBlock {
  std::vector<std::vector<std::uint8_t>> info_bits;  // per user
  std::vector<std::vector<std::uint8_t>> coded_bits; // per user, interleaved order
  std::vector<ComplexMatrix> symbols;                // per user, N_RI x N_L
  ComplexMatrix received;                            // y, M N_R x N_L
};

std::vector<std::vector<std::uint8_t>> random_payload(const SystemConfig& cfg,
                                                      const LinkContext& ctx, Rng& rng);

/// Encodes, interleaves, maps, precodes, and stacks the block, then applies
/// y = G s' + n with n i.i.d. CN(0, sigma^2).
TransmitBlock transmit(const SystemConfig& cfg, const ChannelRealization& chan,
                       const LinkContext& ctx,
                       const std::vector<std::vector<std::uint8_t>>& payload, Rng& rng);

/// Noiseless superposition sum_k G_k P_k S_k, used by transmit and directly
/// testable against the linearity contract.
ComplexMatrix apply_channel(const ChannelRealization& chan,
                            const std::vector<ComplexMatrix>& symbols);

} // namespace dmimo
