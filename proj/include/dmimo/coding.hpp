/**
 * @file coding.hpp
 * @brief LDPC encoding, sum-product SISO decoding, and block interleaving.
 *
 * Parity-check matrices come either from built-in quasi-cyclic tables
 * (wifi-style, n = 648, rates 1/2, 2/3, 3/4) or from alist text files.
 * The systematic encoder is derived from H by GF(2) elimination, preferring
 * parity pivots in the rightmost columns.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dmimo {

struct LdpcCode {
  std::string name;
  int n = 0;  // codeword bits
  int m = 0;  // parity checks
  int k = 0;  // info bits, n - m for full-row-rank H

  std::vector<std::vector<int>> check_neighbors; // per check: variable indices
  std::vector<std::vector<int>> var_neighbors;   // per variable: check indices

  std::vector<int> info_positions;   // codeword positions carrying info bits
  std::vector<int> parity_positions; // one per check row, elimination pivots

  double rate() const { return static_cast<double>(k) / n; }
  int num_edges() const;

  /// Codeword with info bits at info_positions; parity satisfies H c = 0.
  std::vector<std::uint8_t> encode(std::span<const std::uint8_t> info) const;

  bool check_syndrome(std::span<const std::uint8_t> codeword) const;

  static LdpcCode from_alist(const std::string& path);
  static LdpcCode from_alist_stream(std::istream& in, const std::string& name);

  /// Quasi-cyclic expansion of a base matrix (entries -1 = zero block,
  /// s >= 0 = identity cyclically shifted by s).
  static LdpcCode from_base_matrix(const int* base, int rows, int cols, int z,
                                   const std::string& name);

  void to_alist(std::ostream& out) const;

 private:
  // Parity computation masks over info bits, one packed row per check.
  std::vector<std::vector<std::uint64_t>> parity_masks_;
  void build_encoder();
};

struct DecodeResult {
  std::vector<std::uint8_t> hard_bits; // full codeword, from posterior signs
  std::vector<double> posterior;
  std::vector<double> extrinsic;       // posterior - prior, exact
  bool syndrome_ok = false;
  int iterations = 0;
};

/// Flooding sum-product decoder with tanh-rule check nodes. LLR convention
/// L = ln P(1)/P(0) on both input and output. Exits early once the hard
/// decision satisfies all checks; decoding failure is reported via the
/// syndrome flag, never an error.
DecodeResult decode_siso(const LdpcCode& code, std::span<const double> prior_llrs,
                         int max_bp_iters);

/// Seeded pseudo-random bijection on bit indices.
struct Interleaver {
  std::vector<int> perm; // output[i] = input[perm[i]]
  std::uint64_t seed = 0;

  static Interleaver random(int n, std::uint64_t seed);
  int size() const { return static_cast<int>(perm.size()); }

  template <typename T>
  std::vector<T> interleave(std::span<const T> x) const {
    require_size(x.size());
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[perm[i]];
    return y;
  }

  template <typename T>
  std::vector<T> deinterleave(std::span<const T> y) const {
    require_size(y.size());
    std::vector<T> x(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[perm[i]] = y[i];
    return x;
  }

 private:
  void require_size(std::size_t got) const;
};

struct CodeInfo {
  std::string name;
  int n;
  int k;
  double rate;
};

/// Names and parameters of the built-in codes.
std::vector<CodeInfo> available_codes();

/// Loads a built-in code by name, or treats `name_or_path` as an alist file.
LdpcCode load_code(const std::string& name_or_path);

} // namespace dmimo
