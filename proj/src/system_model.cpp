#include "dmimo/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dmimo {

int SystemConfig::total_streams() const {
  int s = 0;
  for (int v : streams_per_user) s += v;
  return s;
}

double SystemConfig::noise_variance() const {
  if (std::isinf(snr_db)) return 0.0;
  return static_cast<double>(total_streams()) / std::pow(10.0, snr_db / 10.0);
}

void SystemConfig::validate() const {
  std::ostringstream oss;
  auto fail = [&oss] { throw std::invalid_argument("SystemConfig: " + oss.str()); };

  if (num_raus < 1 || num_users < 1 || rau_antennas < 1 || user_antennas < 1) {
    oss << "M, K, N_R, N_U must all be >= 1";
    fail();
  }
  if (static_cast<int>(streams_per_user.size()) != num_users) {
    oss << "streams_per_user has " << streams_per_user.size() << " entries for K = "
        << num_users;
    fail();
  }
  for (int kk = 0; kk < num_users; ++kk) {
    const int s = streams_per_user[kk];
    if (s < 1 || s > user_antennas) {
      oss << "N_RI[" << kk << "] = " << s << " violates 1 <= N_RI <= N_U = "
          << user_antennas;
      fail();
    }
    if (s > rau_antennas) {
      oss << "N_RI[" << kk << "] = " << s << " exceeds N_R = " << rau_antennas
          << "; the effective channel must be tall or square";
      fail();
    }
  }
  // Post-suppression each user keeps N_R dimensions, so the null space of
  // the interferers' channel must hold at least that many.
  const int null_dim = num_raus * rau_antennas - (num_users - 1) * user_antennas;
  if (null_dim < rau_antennas) {
    oss << "M*N_R - (K-1)*N_U = " << null_dim << " < N_R = " << rau_antennas
        << "; interferer null space is too small";
    fail();
  }
  if (bits_per_symbol != 2 && bits_per_symbol != 4 && bits_per_symbol != 6) {
    oss << "constellation order " << bits_per_symbol << " not in {2, 4, 6}";
    fail();
  }
  if (block_symbols < 1) {
    oss << "N_L must be >= 1";
    fail();
  }
  if (!(snr_db == snr_db)) {
    oss << "snr_db is NaN";
    fail();
  }
  if (large_scale_sigma_db < 0.0) {
    oss << "large_scale_sigma_db must be >= 0";
    fail();
  }
}

LinkContext make_link_context(const SystemConfig& cfg) {
  cfg.validate();
  LinkContext ctx;
  ctx.code = load_code(cfg.ldpc_code);
  ctx.constellation = Constellation::qam(cfg.bits_per_symbol);
  if (cfg.use_sigmoid_lut) ctx.lut.emplace();

  ctx.interleavers.reserve(cfg.num_users);
  for (int kk = 0; kk < cfg.num_users; ++kk) {
    const int bits = cfg.coded_bits(kk);
    if (bits % ctx.code.n != 0) {
      std::ostringstream oss;
      oss << "SystemConfig: user " << kk << " block carries " << bits
          << " coded bits, not a multiple of codeword length n = " << ctx.code.n;
      throw std::invalid_argument(oss.str());
    }
    // Keyed by block length only, so relabeling users permutes nothing that
    // depends on the index.
    ctx.interleavers.push_back(
        Interleaver::random(bits, derive_seed(cfg.seed, 0x11c0de, bits)));
  }
  return ctx;
}

ComplexMatrix ChannelRealization::stacked() const {
  if (g_blocks.empty()) return {};
  const Eigen::Index rows = g_blocks[0].rows();
  Eigen::Index cols = 0;
  for (const auto& g : g_blocks) cols += g.cols();
  ComplexMatrix g(rows, cols);
  Eigen::Index at = 0;
  for (const auto& gk : g_blocks) {
    g.middleCols(at, gk.cols()) = gk;
    at += gk.cols();
  }
  return g;
}

ComplexMatrix build_precoder(const ComplexMatrix& g_k, int n_streams, PrecoderMode mode) {
  const Eigen::Index n_u = g_k.cols();
  if (n_streams < 1 || n_streams > n_u) {
    std::ostringstream oss;
    oss << "build_precoder: N_RI = " << n_streams << " outside [1, N_U = " << n_u << "]";
    throw std::invalid_argument(oss.str());
  }
  if (mode == PrecoderMode::kColumns) {
    return ComplexMatrix::Identity(n_u, n_streams);
  }
  const SvdResult dec = svd(g_k);
  if (dec.rank < n_streams) {
    std::ostringstream oss;
    oss << "build_precoder: rank(G_k) = " << dec.rank << " < N_RI = " << n_streams
        << " in right-singular mode";
    throw std::runtime_error(oss.str());
  }
  return dec.vh.topRows(n_streams).adjoint();
}

ChannelRealization draw_channel(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  const int rx = cfg.total_rx_antennas();

  ChannelRealization chan;
  chan.g_blocks.reserve(cfg.num_users);
  for (int kk = 0; kk < cfg.num_users; ++kk) {
    ComplexMatrix g(rx, cfg.user_antennas);
    for (int mm = 0; mm < cfg.num_raus; ++mm) {
      double amplitude = 1.0;
      if (cfg.channel_model == ChannelModel::kPerRauLargeScale) {
        const double gain_db = cfg.large_scale_sigma_db * rng.gaussian();
        amplitude = std::pow(10.0, gain_db / 20.0);
      }
      for (int r = 0; r < cfg.rau_antennas; ++r) {
        for (int c = 0; c < cfg.user_antennas; ++c) {
          g(mm * cfg.rau_antennas + r, c) = amplitude * rng.cgaussian(1.0);
        }
      }
    }
    chan.g_blocks.push_back(std::move(g));
  }
  for (int kk = 0; kk < cfg.num_users; ++kk) {
    chan.precoders.push_back(
        build_precoder(chan.g_blocks[kk], cfg.streams(kk), cfg.precoder_mode));
    chan.h_effective.push_back(chan.g_blocks[kk] * chan.precoders[kk]);
  }
  return chan;
}

std::vector<std::vector<std::uint8_t>> random_payload(const SystemConfig& cfg,
                                                      const LinkContext& ctx, Rng& rng) {
  std::vector<std::vector<std::uint8_t>> payload(cfg.num_users);
  for (int kk = 0; kk < cfg.num_users; ++kk) {
    const int n_bits = ctx.codewords(cfg, kk) * ctx.code.k;
    payload[kk].resize(n_bits);
    std::uint64_t word = 0;
    for (int i = 0; i < n_bits; ++i) {
      if (i % 64 == 0) word = rng.bits();
      payload[kk][i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
  }
  return payload;
}

ComplexMatrix apply_channel(const ChannelRealization& chan,
                            const std::vector<ComplexMatrix>& symbols) {
  if (symbols.size() != chan.h_effective.size()) {
    throw std::invalid_argument("apply_channel: user count mismatch");
  }
  ComplexMatrix y;
  for (std::size_t kk = 0; kk < symbols.size(); ++kk) {
    if (symbols[kk].rows() != chan.h_effective[kk].cols()) {
      std::ostringstream oss;
      oss << "apply_channel: user " << kk << " has " << symbols[kk].rows()
          << " streams but H_k expects " << chan.h_effective[kk].cols();
      throw std::invalid_argument(oss.str());
    }
    const ComplexMatrix contrib = chan.h_effective[kk] * symbols[kk];
    if (y.size() == 0) {
      y = contrib;
    } else {
      y += contrib;
    }
  }
  return y;
}

TransmitBlock transmit(const SystemConfig& cfg, const ChannelRealization& chan,
                       const LinkContext& ctx,
                       const std::vector<std::vector<std::uint8_t>>& payload, Rng& rng) {
  if (static_cast<int>(payload.size()) != cfg.num_users) {
    throw std::invalid_argument("transmit: payload must have one entry per user");
  }

  TransmitBlock block;
  block.info_bits = payload;
  block.coded_bits.resize(cfg.num_users);
  block.symbols.resize(cfg.num_users);

  for (int kk = 0; kk < cfg.num_users; ++kk) {
    const int n_cw = ctx.codewords(cfg, kk);
    if (static_cast<int>(payload[kk].size()) != n_cw * ctx.code.k) {
      std::ostringstream oss;
      oss << "transmit: user " << kk << " payload has " << payload[kk].size()
          << " bits, expected " << n_cw * ctx.code.k;
      throw std::invalid_argument(oss.str());
    }
    std::vector<std::uint8_t> coded;
    coded.reserve(cfg.coded_bits(kk));
    for (int cw = 0; cw < n_cw; ++cw) {
      const auto word = ctx.code.encode(
          std::span<const std::uint8_t>(payload[kk]).subspan(cw * ctx.code.k, ctx.code.k));
      coded.insert(coded.end(), word.begin(), word.end());
    }
    block.coded_bits[kk] =
        ctx.interleavers[kk].interleave(std::span<const std::uint8_t>(coded));

    // Fill S_k column by column: symbol l carries streams 1..N_RI in order,
    // each consuming M_c consecutive interleaved bits.
    const auto syms = modulate(block.coded_bits[kk], ctx.constellation);
    ComplexMatrix s(cfg.streams(kk), cfg.block_symbols);
    std::size_t at = 0;
    for (int l = 0; l < cfg.block_symbols; ++l) {
      for (int j = 0; j < cfg.streams(kk); ++j) s(j, l) = syms[at++];
    }
    block.symbols[kk] = std::move(s);
  }

  block.received = apply_channel(chan, block.symbols);
  const double sigma2 = cfg.noise_variance();
  if (sigma2 > 0.0) {
    for (Eigen::Index c = 0; c < block.received.cols(); ++c) {
      for (Eigen::Index r = 0; r < block.received.rows(); ++r) {
        block.received(r, c) += rng.cgaussian(sigma2);
      }
    }
  }
  return block;
}

} // namespace dmimo
