#include "dmimo/receiver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dmimo {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kLmmse: return "lmmse";
    case Scheme::kId: return "id";
    case Scheme::kIdd: return "idd";
  }
  return "?";
}

void IterationPlan::validate() const {
  if (detector_iters < 1) {
    throw std::invalid_argument("IterationPlan: N_I must be >= 1");
  }
  if (bp_iters_per_pass < 1) {
    throw std::invalid_argument("IterationPlan: bp_iters_per_pass must be >= 1");
  }
}

namespace {

// Canonical coded-bit order within a user's block: column l, stream j,
// then the M_c bits of that symbol. Matches the transmit-side mapping.
inline std::size_t bit_base(int l, int j, int n_streams, int m_c) {
  return (static_cast<std::size_t>(l) * n_streams + j) * m_c;
}

struct UserDecode {
  std::vector<std::uint8_t> info_bits;
  std::vector<double> extrinsic; // codeword order, concatenated
  bool all_syndromes_ok = true;
};

UserDecode decode_user(const LdpcCode& code, const std::vector<double>& deinterleaved,
                       int n_codewords, int bp_iters) {
  UserDecode out;
  out.info_bits.reserve(static_cast<std::size_t>(n_codewords) * code.k);
  out.extrinsic.resize(deinterleaved.size());
  for (int cw = 0; cw < n_codewords; ++cw) {
    const std::span<const double> prior(deinterleaved.data() + cw * code.n,
                                        static_cast<std::size_t>(code.n));
    const DecodeResult dec = decode_siso(code, prior, bp_iters);
    out.all_syndromes_ok = out.all_syndromes_ok && dec.syndrome_ok;
    for (int pos : code.info_positions) out.info_bits.push_back(dec.hard_bits[pos]);
    std::copy(dec.extrinsic.begin(), dec.extrinsic.end(),
              out.extrinsic.begin() + cw * code.n);
  }
  return out;
}

ReceiveResult receive_impl(const SystemConfig& cfg, const SuppressionSet& supp,
                           const ComplexMatrix& y, const IterationPlan& plan,
                           const LinkContext& ctx,
                           const std::vector<std::vector<std::uint8_t>>& true_info,
                           bool use_naive) {
  plan.validate();
  if (static_cast<int>(supp.w_per_user.size()) != cfg.num_users ||
      static_cast<int>(true_info.size()) != cfg.num_users) {
    throw std::invalid_argument("receive_block: per-user inputs do not match K");
  }
  const int n_iters = plan.effective_iters();
  const int m_c = cfg.bits_per_symbol;
  const int n_l = cfg.block_symbols;

  ReceiveResult result;
  result.decoded_bits.resize(cfg.num_users);
  result.block_error.assign(cfg.num_users, 1);
  result.diagnostics.assign(cfg.num_users, {});

  for (int kk = 0; kk < cfg.num_users; ++kk) {
    const int n_ri = cfg.streams(kk);
    const int n_coded = cfg.coded_bits(kk);
    const int n_cw = ctx.codewords(cfg, kk);
    const Interleaver& ilv = ctx.interleavers[kk];

    const ComplexMatrix y_k = apply_suppression(supp.w_per_user[kk], y);
    DetectorState state = prepare(supp.h_eff[kk], supp.sigma[kk]);
    SoftBlock soft = SoftBlock::first_iteration(n_ri, n_l);

    std::vector<double> demap_llrs(n_coded, 0.0);
    UserDecode decode;
    bool decoded_in_loop = false;
    auto& diag = result.diagnostics[kk];
    diag.resize(n_iters);

    for (int it = 0; it < n_iters; ++it) {
      diag[it].mean_nu = soft.nu.mean();
      const std::int64_t inversions_before = state.inversion_count;

      RealMatrix rho;
      const ComplexMatrix s_hat = use_naive
                                      ? isdic_detect_naive(state, y_k, soft, &rho)
                                      : isdic_detect_evd(state, y_k, soft, &rho);
      diag[it].inversions = state.inversion_count - inversions_before;

      // Soft demodulation into extrinsic LLRs under the unbiased Gaussian
      // model. The fast path shares one gamma vector per column; the
      // reference path uses each stream's own prior variance.
      double llr_mag = 0.0;
      for (int l = 0; l < n_l; ++l) {
        RealVector gamma;
        if (use_naive) {
          gamma.resize(n_ri);
          for (int j = 0; j < n_ri; ++j) {
            const double denom = 1.0 - rho(j, l) * soft.v(j, l);
            gamma(j) = std::clamp(rho(j, l) / std::max(denom, 1e-300), 1e-6, 1e6);
          }
        } else {
          gamma = post_detection_snr(state, soft.nu(l));
        }
        for (int j = 0; j < n_ri; ++j) {
          const auto llrs = demap_soft(s_hat(j, l), gamma(j), ctx.constellation);
          const std::size_t base = bit_base(l, j, n_ri, m_c);
          for (int i = 0; i < m_c; ++i) {
            demap_llrs[base + i] = llrs[i];
            llr_mag += std::abs(llrs[i]);
          }
        }
      }
      diag[it].mean_abs_llr = llr_mag / n_coded;

      // A-priori information for the next pass: decoder extrinsic in IDD,
      // demapper output directly in ID.
      const std::vector<double>* apriori = &demap_llrs;
      std::vector<double> interleaved_extrinsic;
      if (plan.scheme == Scheme::kIdd) {
        const auto deinterleaved =
            ilv.deinterleave(std::span<const double>(demap_llrs));
        decode = decode_user(ctx.code, deinterleaved, n_cw, plan.bp_iters_per_pass);
        decoded_in_loop = true;
        interleaved_extrinsic =
            ilv.interleave(std::span<const double>(decode.extrinsic));
        apriori = &interleaved_extrinsic;
      }

      if (it + 1 < n_iters) {
        ComplexMatrix s_bar(n_ri, n_l);
        RealMatrix v(n_ri, n_l);
        for (int l = 0; l < n_l; ++l) {
          for (int j = 0; j < n_ri; ++j) {
            const std::size_t base = bit_base(l, j, n_ri, m_c);
            const SoftSymbol stat = soft_symbol_stats(
                std::span<const double>(apriori->data() + base,
                                        static_cast<std::size_t>(m_c)),
                ctx.constellation, ctx.lut_ptr());
            s_bar(j, l) = stat.mean;
            v(j, l) = stat.variance;
          }
        }
        const double peak = ctx.constellation.max_magnitude();
        soft = SoftBlock::from_stats(std::move(s_bar), std::move(v), peak * peak);
      }
    }

    if (!decoded_in_loop) {
      const auto deinterleaved = ilv.deinterleave(std::span<const double>(demap_llrs));
      decode = decode_user(ctx.code, deinterleaved, n_cw, plan.bp_iters_per_pass);
    }

    const bool bits_match = decode.info_bits == true_info[kk];
    result.block_error[kk] = (bits_match && decode.all_syndromes_ok) ? 0 : 1;
    result.decoded_bits[kk] = std::move(decode.info_bits);
  }
  return result;
}

} // namespace

ReceiveResult receive_block(const SystemConfig& cfg, const SuppressionSet& supp,
                            const ComplexMatrix& y, const IterationPlan& plan,
                            const LinkContext& ctx,
                            const std::vector<std::vector<std::uint8_t>>& true_info) {
  return receive_impl(cfg, supp, y, plan, ctx, true_info, false);
}

ReceiveResult receive_block_naive(const SystemConfig& cfg, const SuppressionSet& supp,
                                  const ComplexMatrix& y, const IterationPlan& plan,
                                  const LinkContext& ctx,
                                  const std::vector<std::vector<std::uint8_t>>& true_info) {
  return receive_impl(cfg, supp, y, plan, ctx, true_info, true);
}

} // namespace dmimo
