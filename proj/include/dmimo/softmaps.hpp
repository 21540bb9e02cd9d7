/**
 * @file softmaps.hpp
 * @brief Gray-labeled QAM constellations, soft demapping, and the LLR-to-
 *        symbol-statistics conversion used by the iterative detector.
 *
 * LLR sign convention throughout: L = ln P(bit = 1) / P(bit = 0).
 * Many codebases use the opposite sign; everything in this library,
 * including the LDPC decoder interface, follows this one.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dmimo/numerics.hpp"

namespace dmimo {

/// Default saturation bound for LLR magnitudes; beyond this the sigmoid is
/// flat to double precision.
inline constexpr double kLlrClamp = 30.0;

inline double clamp_llr(double l, double bound = kLlrClamp) {
  if (l > bound) return bound;
  if (l < -bound) return -bound;
  return l;
}

/// Square QAM constellation with reflected-Gray labeling, unit average
/// energy. Bit order within a symbol: the first order_bits/2 bits select the
/// in-phase level, the rest the quadrature level. Bit pattern 0...0 maps to
/// the most positive point on both axes, so QPSK 00 -> (+1+j)/sqrt(2).
struct Constellation {
  int order_bits = 0;           // M_c: 2 = QPSK, 4 = 16-QAM, 6 = 64-QAM
  std::vector<Complex> points;  // indexed by the bit pattern, MSB = first bit

  static Constellation qam(int order_bits);

  int size() const { return static_cast<int>(points.size()); }
  const Complex& point(std::uint32_t label) const { return points[label]; }
  double max_magnitude() const;
};

/// Writes the labeling table, one "bits re im" line per point with 12
/// significant digits, for cross-implementation conformance.
void export_labeling(const Constellation& c, std::ostream& out);

/// Per-stream, per-symbol, per-bit LLRs for one user's block.
struct LlrBlock {
  int streams = 0;
  int symbols = 0;
  int bits_per_symbol = 0;
  double clamp = kLlrClamp;
  std::vector<double> values; // index ((symbol*streams)+stream)*M_c + bit

  LlrBlock() = default;
  LlrBlock(int streams_, int symbols_, int bits_)
      : streams(streams_), symbols(symbols_), bits_per_symbol(bits_),
        values(static_cast<std::size_t>(streams_) * symbols_ * bits_, 0.0) {}

  std::size_t index(int stream, int symbol, int bit) const {
    return (static_cast<std::size_t>(symbol) * streams + stream) * bits_per_symbol + bit;
  }
  std::span<double> at(int stream, int symbol) {
    return {values.data() + index(stream, symbol, 0),
            static_cast<std::size_t>(bits_per_symbol)};
  }
  std::span<const double> at(int stream, int symbol) const {
    return {values.data() + index(stream, symbol, 0),
            static_cast<std::size_t>(bits_per_symbol)};
  }
  void saturate();
};

/// Uniform-grid lookup table for 1/(1 + exp(x)) over [-x_max, x_max] with
/// linear interpolation; clamps to 0/1 outside the range. Grid step 2^-6
/// keeps the absolute error below 1e-4.
class SigmoidLut {
 public:
  explicit SigmoidLut(double x_max = kLlrClamp, double step = 0x1.0p-6);
  double value(double x) const;
  double x_max() const { return x_max_; }

 private:
  double x_max_;
  double inv_step_;
  std::vector<double> table_;
};

/// Maps coded bits (groups of M_c) onto constellation symbols.
std::vector<Complex> modulate(std::span<const std::uint8_t> bits,
                              const Constellation& c);

/// P[s = alpha(d)] for one candidate label, given per-bit a-priori LLRs.
/// Pass lut = nullptr for the exact exponential.
double symbol_prob(std::span<const double> llrs, std::uint32_t label,
                   const Constellation& c, const SigmoidLut* lut = nullptr);

struct SoftSymbol {
  Complex mean;
  double variance;
};

/// A-priori symbol mean and variance by enumeration over the constellation.
SoftSymbol soft_symbol_stats(std::span<const double> llrs, const Constellation& c,
                             const SigmoidLut* lut = nullptr);

enum class DemapMode { kMaxLog, kExact };

/// Per-bit LLRs from an unbiased symbol estimate modeled as
/// s_hat = s + eta with Var(eta) = 1/gamma. Max-log by default; the exact
/// log-sum-exp mode exists for tests.
std::vector<double> demap_soft(Complex s_hat, double gamma, const Constellation& c,
                               DemapMode mode = DemapMode::kMaxLog,
                               double clamp = kLlrClamp);

} // namespace dmimo
