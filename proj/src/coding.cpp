#include "dmimo/coding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dmimo/rng.hpp"

namespace dmimo {

int LdpcCode::num_edges() const {
  int e = 0;
  for (const auto& row : check_neighbors) e += static_cast<int>(row.size());
  return e;
}

namespace {

constexpr std::size_t words_for(int bits) {
  return (static_cast<std::size_t>(bits) + 63) / 64;
}

inline bool get_bit(const std::vector<std::uint64_t>& row, int j) {
  return (row[j >> 6] >> (j & 63)) & 1u;
}

inline void flip_bit(std::vector<std::uint64_t>& row, int j) {
  row[j >> 6] ^= 1ULL << (j & 63);
}

void xor_rows(std::vector<std::uint64_t>& dst, const std::vector<std::uint64_t>& src) {
  for (std::size_t w = 0; w < dst.size(); ++w) dst[w] ^= src[w];
}

} // namespace

void LdpcCode::build_encoder() {
  // GF(2) elimination on packed rows. Pivot columns are chosen right to
  // left so standard layouts keep info bits in the leading positions.
  std::vector<std::vector<std::uint64_t>> rows(m, std::vector<std::uint64_t>(words_for(n), 0));
  for (int r = 0; r < m; ++r) {
    for (int v : check_neighbors[r]) flip_bit(rows[r], v);
  }

  std::vector<int> pivot_col(m, -1);
  std::vector<bool> is_pivot_col(n, false);
  int rank = 0;
  for (int c = n - 1; c >= 0 && rank < m; --c) {
    int pivot_row = -1;
    for (int r = rank; r < m; ++r) {
      if (get_bit(rows[r], c)) {
        pivot_row = r;
        break;
      }
    }
    if (pivot_row < 0) continue;
    std::swap(rows[rank], rows[pivot_row]);
    for (int r = 0; r < m; ++r) {
      if (r != rank && get_bit(rows[r], c)) xor_rows(rows[r], rows[rank]);
    }
    pivot_col[rank] = c;
    is_pivot_col[c] = true;
    ++rank;
  }
  if (rank < m) {
    std::ostringstream oss;
    oss << "LdpcCode '" << name << "': parity-check matrix is row-rank deficient ("
        << rank << " of " << m << "), no systematic encoder exists";
    throw std::runtime_error(oss.str());
  }

  info_positions.clear();
  for (int c = 0; c < n; ++c) {
    if (!is_pivot_col[c]) info_positions.push_back(c);
  }
  parity_positions.assign(pivot_col.begin(), pivot_col.end());
  k = n - m;

  // After full reduction each pivot row reads: c[pivot] = sum of info bits
  // it touches. Repack those rows over info positions only.
  std::vector<int> info_index(n, -1);
  for (std::size_t i = 0; i < info_positions.size(); ++i) {
    info_index[info_positions[i]] = static_cast<int>(i);
  }
  parity_masks_.assign(m, std::vector<std::uint64_t>(words_for(k), 0));
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      if (c != pivot_col[r] && get_bit(rows[r], c)) {
        flip_bit(parity_masks_[r], info_index[c]);
      }
    }
  }
}

std::vector<std::uint8_t> LdpcCode::encode(std::span<const std::uint8_t> info) const {
  if (static_cast<int>(info.size()) != k) {
    std::ostringstream oss;
    oss << "LdpcCode::encode: expected " << k << " info bits, got " << info.size();
    throw std::invalid_argument(oss.str());
  }
  std::vector<std::uint64_t> packed(words_for(k), 0);
  for (int i = 0; i < k; ++i) {
    if (info[i] & 1u) packed[i >> 6] |= 1ULL << (i & 63);
  }
  std::vector<std::uint8_t> cw(n, 0);
  for (int i = 0; i < k; ++i) cw[info_positions[i]] = info[i] & 1u;
  for (int r = 0; r < m; ++r) {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < packed.size(); ++w) {
      acc ^= parity_masks_[r][w] & packed[w];
    }
    cw[parity_positions[r]] = static_cast<std::uint8_t>(__builtin_popcountll(acc) & 1);
  }
  return cw;
}

bool LdpcCode::check_syndrome(std::span<const std::uint8_t> codeword) const {
  if (static_cast<int>(codeword.size()) != n) {
    throw std::invalid_argument("check_syndrome: codeword length mismatch");
  }
  for (const auto& row : check_neighbors) {
    unsigned s = 0;
    for (int v : row) s ^= codeword[v] & 1u;
    if (s) return false;
  }
  return true;
}

LdpcCode LdpcCode::from_base_matrix(const int* base, int rows, int cols, int z,
                                    const std::string& name) {
  LdpcCode code;
  code.name = name;
  code.n = cols * z;
  code.m = rows * z;
  code.check_neighbors.assign(code.m, {});
  code.var_neighbors.assign(code.n, {});
  for (int br = 0; br < rows; ++br) {
    for (int bc = 0; bc < cols; ++bc) {
      const int shift = base[br * cols + bc];
      if (shift < 0) continue;
      for (int i = 0; i < z; ++i) {
        const int r = br * z + i;
        const int c = bc * z + (i + shift) % z;
        code.check_neighbors[r].push_back(c);
        code.var_neighbors[c].push_back(r);
      }
    }
  }
  for (auto& row : code.check_neighbors) std::sort(row.begin(), row.end());
  for (auto& col : code.var_neighbors) std::sort(col.begin(), col.end());
  code.build_encoder();
  return code;
}

// ---------------------------------------------------------------------------
// alist I/O. Written format: "n m", column degrees, row degrees, then the
// 1-indexed adjacency lists (n column lines, m row lines). The reader also
// accepts the common variant with a max-degree line after "n m" and ignores
// zero padding inside adjacency lines.
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<long>> read_token_lines(std::istream& in) {
  std::vector<std::vector<long>> lines;
  std::string text;
  while (std::getline(in, text)) {
    std::istringstream ls(text);
    std::vector<long> tokens;
    long v;
    while (ls >> v) tokens.push_back(v);
    if (!tokens.empty()) lines.push_back(std::move(tokens));
  }
  return lines;
}

} // namespace

LdpcCode LdpcCode::from_alist_stream(std::istream& in, const std::string& name) {
  const auto lines = read_token_lines(in);
  if (lines.size() < 3 || lines[0].size() < 2) {
    throw std::runtime_error("alist '" + name + "': truncated header");
  }
  const int n = static_cast<int>(lines[0][0]);
  const int m = static_cast<int>(lines[0][1]);
  if (n < 1 || m < 1) {
    throw std::runtime_error("alist '" + name + "': invalid dimensions");
  }

  // Optional "dmax_col dmax_row" line between the header and the degrees.
  std::size_t cursor = 1;
  if (lines[cursor].size() == 2 && static_cast<int>(lines[cursor].size()) != n &&
      cursor + 1 < lines.size() && static_cast<int>(lines[cursor + 1].size()) == n) {
    ++cursor;
  }

  if (cursor + 1 >= lines.size() || static_cast<int>(lines[cursor].size()) != n ||
      static_cast<int>(lines[cursor + 1].size()) != m) {
    throw std::runtime_error("alist '" + name + "': malformed degree lists");
  }
  const auto col_deg = lines[cursor];
  const auto row_deg = lines[cursor + 1];
  cursor += 2;

  if (lines.size() - cursor < static_cast<std::size_t>(n + m)) {
    throw std::runtime_error("alist '" + name + "': missing adjacency lists");
  }

  LdpcCode code;
  code.name = name;
  code.n = n;
  code.m = m;
  code.check_neighbors.assign(m, {});
  code.var_neighbors.assign(n, {});

  for (int v = 0; v < n; ++v) {
    const auto& toks = lines[cursor + v];
    int used = 0;
    for (long t : toks) {
      if (t == 0) continue; // padding
      if (t < 1 || t > m) {
        throw std::runtime_error("alist '" + name + "': check index out of range");
      }
      code.var_neighbors[v].push_back(static_cast<int>(t - 1));
      ++used;
    }
    if (used != col_deg[v]) {
      throw std::runtime_error("alist '" + name + "': column degree mismatch");
    }
  }
  for (int r = 0; r < m; ++r) {
    const auto& toks = lines[cursor + n + r];
    int used = 0;
    for (long t : toks) {
      if (t == 0) continue;
      if (t < 1 || t > n) {
        throw std::runtime_error("alist '" + name + "': variable index out of range");
      }
      code.check_neighbors[r].push_back(static_cast<int>(t - 1));
      ++used;
    }
    if (used != row_deg[r]) {
      throw std::runtime_error("alist '" + name + "': row degree mismatch");
    }
  }

  // Cross-check that the two adjacency views describe the same matrix.
  std::vector<std::vector<int>> transposed(n);
  for (int r = 0; r < m; ++r) {
    for (int v : code.check_neighbors[r]) transposed[v].push_back(r);
  }
  for (int v = 0; v < n; ++v) {
    auto a = code.var_neighbors[v];
    auto b = transposed[v];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) {
      throw std::runtime_error("alist '" + name + "': row/column lists disagree");
    }
  }
  for (auto& row : code.check_neighbors) std::sort(row.begin(), row.end());
  for (auto& col : code.var_neighbors) std::sort(col.begin(), col.end());
  code.build_encoder();
  return code;
}

LdpcCode LdpcCode::from_alist(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("alist: cannot open '" + path + "'");
  }
  return from_alist_stream(in, path);
}

void LdpcCode::to_alist(std::ostream& out) const {
  out << n << ' ' << m << '\n';
  for (int v = 0; v < n; ++v) {
    out << var_neighbors[v].size() << (v + 1 < n ? ' ' : '\n');
  }
  for (int r = 0; r < m; ++r) {
    out << check_neighbors[r].size() << (r + 1 < m ? ' ' : '\n');
  }
  for (int v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < var_neighbors[v].size(); ++i) {
      out << var_neighbors[v][i] + 1 << (i + 1 < var_neighbors[v].size() ? ' ' : '\n');
    }
  }
  for (int r = 0; r < m; ++r) {
    for (std::size_t i = 0; i < check_neighbors[r].size(); ++i) {
      out << check_neighbors[r][i] + 1 << (i + 1 < check_neighbors[r].size() ? ' ' : '\n');
    }
  }
}

// ---------------------------------------------------------------------------
// Sum-product decoding
// ---------------------------------------------------------------------------

namespace {

// Keep tanh arguments strictly inside (-1, 1); caps check messages near 35.
inline double clip_tanh(double t) {
  constexpr double lim = 1.0 - 1e-15;
  if (t > lim) return lim;
  if (t < -lim) return -lim;
  return t;
}

} // namespace

DecodeResult decode_siso(const LdpcCode& code, std::span<const double> prior_llrs,
                         int max_bp_iters) {
  if (static_cast<int>(prior_llrs.size()) != code.n) {
    std::ostringstream oss;
    oss << "decode_siso: expected " << code.n << " prior LLRs, got "
        << prior_llrs.size();
    throw std::invalid_argument(oss.str());
  }

  const int n_edges = code.num_edges();
  std::vector<int> edge_var(n_edges);
  std::vector<int> row_start(code.m + 1, 0);
  {
    int e = 0;
    for (int r = 0; r < code.m; ++r) {
      row_start[r] = e;
      for (int v : code.check_neighbors[r]) edge_var[e++] = v;
    }
    row_start[code.m] = e;
  }

  // The tanh rule below assumes the textbook convention L = ln P(0)/P(1),
  // so priors are negated on entry and posteriors negated on exit.
  std::vector<double> prior(code.n);
  for (int v = 0; v < code.n; ++v) prior[v] = -prior_llrs[v];

  std::vector<double> check_msg(n_edges, 0.0); // R: check -> variable
  std::vector<double> msg_sum(code.n, 0.0);    // per-variable sum of R
  std::vector<double> posterior(prior);
  std::vector<std::uint8_t> hard(code.n, 0);
  std::vector<double> t(64), sfx(64);

  auto harden = [&] {
    for (int v = 0; v < code.n; ++v) hard[v] = posterior[v] < 0.0 ? 1 : 0;
  };

  int iterations = 0;
  bool ok = false;
  for (int iter = 0; iter < max_bp_iters; ++iter) {
    // Check-node update with prefix/suffix tanh products (division-free).
    for (int r = 0; r < code.m; ++r) {
      const int begin = row_start[r];
      const int deg = row_start[r + 1] - begin;
      if (deg == 0) continue;
      if (deg > static_cast<int>(t.size())) {
        t.resize(deg);
        sfx.resize(deg);
      }
      for (int i = 0; i < deg; ++i) {
        const int e = begin + i;
        const double q = posterior[edge_var[e]] - check_msg[e];
        t[i] = clip_tanh(std::tanh(0.5 * q));
      }
      sfx[deg - 1] = 1.0;
      for (int i = deg - 2; i >= 0; --i) sfx[i] = sfx[i + 1] * t[i + 1];
      double prefix = 1.0;
      for (int i = 0; i < deg; ++i) {
        check_msg[begin + i] = 2.0 * std::atanh(clip_tanh(prefix * sfx[i]));
        prefix *= t[i];
      }
    }
    // Variable-node update: fresh posteriors from priors plus check messages.
    std::fill(msg_sum.begin(), msg_sum.end(), 0.0);
    for (int e = 0; e < n_edges; ++e) msg_sum[edge_var[e]] += check_msg[e];
    for (int v = 0; v < code.n; ++v) posterior[v] = prior[v] + msg_sum[v];

    ++iterations;
    harden();
    if (code.check_syndrome(hard)) {
      ok = true;
      break;
    }
  }
  if (max_bp_iters == 0) {
    harden();
    ok = code.check_syndrome(hard);
  }

  DecodeResult result;
  result.hard_bits = std::move(hard);
  result.posterior.resize(code.n);
  result.extrinsic.resize(code.n);
  for (int v = 0; v < code.n; ++v) {
    // Back to L = ln P(1)/P(0); extrinsic is the message sum itself, so
    // extrinsic + prior reproduces the posterior bit-exactly.
    result.extrinsic[v] = -msg_sum[v];
    result.posterior[v] = prior_llrs[v] + result.extrinsic[v];
  }
  result.syndrome_ok = ok;
  result.iterations = iterations;
  return result;
}

Interleaver Interleaver::random(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("Interleaver::random: n must be >= 1");
  Interleaver ilv;
  ilv.seed = seed;
  ilv.perm.resize(n);
  for (int i = 0; i < n; ++i) ilv.perm[i] = i;
  Rng rng(derive_seed(seed, 0x1f2e3d4c5b6a7988ULL));
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i) + 1));
    std::swap(ilv.perm[i], ilv.perm[j]);
  }
  return ilv;
}

void Interleaver::require_size(std::size_t got) const {
  if (got != perm.size()) {
    std::ostringstream oss;
    oss << "Interleaver: sequence length " << got << " does not match permutation size "
        << perm.size();
    throw std::invalid_argument(oss.str());
  }
}

} // namespace dmimo
