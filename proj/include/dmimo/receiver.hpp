/**
 * @file receiver.hpp
 * @brief Per-user iterative receive chains: the non-iterative LMMSE
 *        baseline, iterative detection (ID, demapper feedback only), and
 *        iterative detection and decoding (IDD, decoder in the loop).
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmimo/detector.hpp"
#include "dmimo/suppression.hpp"
#include "dmimo/system_model.hpp"

namespace dmimo {

enum class Scheme { kLmmse, kId, kIdd };

std::string scheme_name(Scheme s);

struct IterationPlan {
  Scheme scheme = Scheme::kLmmse;
  int detector_iters = 1;     // N_I; the LMMSE baseline always runs one
  int bp_iters_per_pass = 25; // BP budget per decode call

  int effective_iters() const { return scheme == Scheme::kLmmse ? 1 : detector_iters; }
  void validate() const;
};

struct IterationStats {
  double mean_nu = 1.0;      // mean prior variance going into the iteration
  double mean_abs_llr = 0.0; // mean demapper LLR magnitude of the iteration
  std::int64_t inversions = 0;
};

struct ReceiveResult {
  std::vector<std::vector<std::uint8_t>> decoded_bits; // per user, info bits
  std::vector<std::uint8_t> block_error;               // per user, 0/1
  std::vector<std::vector<IterationStats>> diagnostics; // [user][iteration]
};

/// Runs one block through suppression, iterative detection, demapping and
/// decoding for every user. In IDD the decoder runs inside each iteration
/// and its extrinsic LLRs drive the symbol statistics; in ID the demapper
/// LLRs feed back directly and a single decode follows the loop. A user's
/// block_error flags any info-bit mismatch or decoder syndrome failure;
/// decoding failures never abort the block.
ReceiveResult receive_block(const SystemConfig& cfg, const SuppressionSet& supp,
                            const ComplexMatrix& y, const IterationPlan& plan,
                            const LinkContext& ctx,
                            const std::vector<std::vector<std::uint8_t>>& true_info);

/// Identical contract, but detection uses the full per-symbol variance
/// diagonals (one factorization per column). Kept as the quality reference.
ReceiveResult receive_block_naive(const SystemConfig& cfg, const SuppressionSet& supp,
                                  const ComplexMatrix& y, const IterationPlan& plan,
                                  const LinkContext& ctx,
                                  const std::vector<std::vector<std::uint8_t>>& true_info);

} // namespace dmimo
