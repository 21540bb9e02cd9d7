#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <set>
#include <sstream>

#include "dmimo/coding.hpp"
#include "dmimo/rng.hpp"

using namespace dmimo;

namespace {

std::vector<std::uint8_t> random_bits(Rng& rng, int n) {
  std::vector<std::uint8_t> bits(n);
  for (int i = 0; i < n; ++i) bits[i] = rng.bits() & 1u;
  return bits;
}

} // namespace

TEST_CASE("all built-in codes construct with the advertised parameters") {
  for (const auto& info : available_codes()) {
    const LdpcCode code = load_code(info.name);
    CHECK(code.n == info.n);
    CHECK(code.k == info.k);
    CHECK(code.rate() == doctest::Approx(info.rate));
    CHECK(static_cast<int>(code.info_positions.size()) == code.k);
    // Standard layout keeps info bits leading.
    for (int i = 0; i < code.k; ++i) CHECK(code.info_positions[i] == i);
  }
}

TEST_CASE("all-zero info encodes to the all-zero codeword") {
  const LdpcCode code = load_code("wifi_n648_r12");
  const auto cw = code.encode(std::vector<std::uint8_t>(code.k, 0));
  for (auto b : cw) CHECK(b == 0);
  CHECK(code.check_syndrome(cw));
}

TEST_CASE("codewords form a linear code and satisfy the parity oracle") {
  const LdpcCode code = load_code("wifi_n648_r12");
  Rng rng(21);
  for (int rep = 0; rep < 10; ++rep) {
    const auto a = random_bits(rng, code.k);
    const auto b = random_bits(rng, code.k);
    const auto ca = code.encode(a);
    const auto cb = code.encode(b);
    CHECK(code.check_syndrome(ca));
    CHECK(code.check_syndrome(cb));

    std::vector<std::uint8_t> sum_info(code.k), sum_cw(code.n);
    for (int i = 0; i < code.k; ++i) sum_info[i] = a[i] ^ b[i];
    for (int i = 0; i < code.n; ++i) sum_cw[i] = ca[i] ^ cb[i];
    CHECK(code.encode(sum_info) == sum_cw);

    // Direct H * c over GF(2), independent of check_syndrome's loop.
    for (const auto& row : code.check_neighbors) {
      unsigned s = 0;
      for (int v : row) s ^= ca[v];
      CHECK(s == 0u);
    }
  }
}

TEST_CASE("decode of saturated noiseless priors converges immediately") {
  const LdpcCode code = load_code("wifi_n648_r23");
  Rng rng(22);
  const auto cw = code.encode(random_bits(rng, code.k));
  std::vector<double> priors(code.n);
  for (int i = 0; i < code.n; ++i) priors[i] = cw[i] ? 30.0 : -30.0;
  const DecodeResult dec = decode_siso(code, priors, 25);
  CHECK(dec.syndrome_ok);
  CHECK(dec.iterations <= 1);
  CHECK(dec.hard_bits == cw);
  for (double e : dec.extrinsic) CHECK(std::isfinite(e));
}

TEST_CASE("all-zero priors produce symmetric finite output") {
  const LdpcCode code = load_code("wifi_n648_r12");
  const std::vector<double> priors(code.n, 0.0);
  const DecodeResult dec = decode_siso(code, priors, 5);
  for (int i = 0; i < code.n; ++i) {
    CHECK(std::isfinite(dec.posterior[i]));
    CHECK(dec.posterior[i] == 0.0); // exact symmetry of the zero fixed point
  }
}

TEST_CASE("extrinsic plus prior equals posterior exactly") {
  const LdpcCode code = load_code("wifi_n648_r12");
  Rng rng(23);
  std::vector<double> priors(code.n);
  for (auto& p : priors) p = 2.0 * rng.gaussian();
  const DecodeResult dec = decode_siso(code, priors, 10);
  for (int i = 0; i < code.n; ++i) {
    CHECK(dec.extrinsic[i] + priors[i] == dec.posterior[i]);
  }
}

TEST_CASE("posterior signs give the hard decision") {
  const LdpcCode code = load_code("wifi_n648_r34");
  Rng rng(24);
  std::vector<double> priors(code.n);
  for (auto& p : priors) p = 1.5 * rng.gaussian();
  const DecodeResult dec = decode_siso(code, priors, 8);
  for (int i = 0; i < code.n; ++i) {
    CHECK(dec.hard_bits[i] == (dec.posterior[i] > 0.0 ? 1 : 0));
  }
}

TEST_CASE("BP waterfall calibration: rate 1/2 over BPSK AWGN at 2.5 dB") {
  // Monte Carlo oracle for decoder health: at Eb/N0 = 2.5 dB the code must
  // be well inside the waterfall.
  const LdpcCode code = load_code("wifi_n648_r12");
  const double ebn0 = std::pow(10.0, 2.5 / 10.0);
  const double sigma2 = 1.0 / (2.0 * code.rate() * ebn0); // noise var per dim
  const int frames = 10000;

  long long bit_errors = 0;
  long long frame_errors = 0;
#pragma omp parallel for reduction(+ : bit_errors, frame_errors) schedule(dynamic)
  for (int f = 0; f < frames; ++f) {
    Rng rng(derive_seed(2024, f));
    std::vector<std::uint8_t> info(code.k);
    for (auto& b : info) b = rng.bits() & 1u;
    const auto cw = code.encode(info);
    std::vector<double> llr(code.n);
    for (int i = 0; i < code.n; ++i) {
      const double x = cw[i] ? 1.0 : -1.0; // bit 1 -> +1 under L = ln P(1)/P(0)
      const double y = x + std::sqrt(sigma2) * rng.gaussian();
      llr[i] = 2.0 * y / sigma2;
    }
    const DecodeResult dec = decode_siso(code, llr, 25);
    int errs = 0;
    for (int i = 0; i < code.k; ++i) {
      errs += dec.hard_bits[code.info_positions[i]] != info[i];
    }
    bit_errors += errs;
    frame_errors += errs > 0;
  }
  const double ber =
      static_cast<double>(bit_errors) / (static_cast<double>(frames) * code.k);
  INFO("BER = " << ber << ", FER = " << static_cast<double>(frame_errors) / frames);
  CHECK(ber < 1e-3);
}

TEST_CASE("frame errors do not increase with BP iterations") {
  const LdpcCode code = load_code("wifi_n648_r12");
  const double ebn0 = std::pow(10.0, 2.0 / 10.0);
  const double sigma2 = 1.0 / (2.0 * code.rate() * ebn0);
  const int frames = 1000;

  std::vector<int> iter_grid = {2, 5, 10, 25};
  std::vector<long long> errors(iter_grid.size(), 0);
  for (int f = 0; f < frames; ++f) {
    Rng rng(derive_seed(77, f));
    std::vector<std::uint8_t> info(code.k);
    for (auto& b : info) b = rng.bits() & 1u;
    const auto cw = code.encode(info);
    std::vector<double> llr(code.n);
    for (int i = 0; i < code.n; ++i) {
      const double x = cw[i] ? 1.0 : -1.0;
      llr[i] = 2.0 * (x + std::sqrt(sigma2) * rng.gaussian()) / sigma2;
    }
    for (std::size_t g = 0; g < iter_grid.size(); ++g) {
      const DecodeResult dec = decode_siso(code, llr, iter_grid[g]);
      bool bad = false;
      for (int i = 0; i < code.k; ++i) {
        bad = bad || dec.hard_bits[code.info_positions[i]] != info[i];
      }
      errors[g] += bad;
    }
  }
  // Allow 2-sigma Monte Carlo noise on each step of the ladder.
  for (std::size_t g = 1; g < iter_grid.size(); ++g) {
    const double p = static_cast<double>(errors[g - 1]) / frames;
    const double sd = std::sqrt(std::max(p * (1 - p), 1e-9) * frames);
    CHECK(static_cast<double>(errors[g]) <= errors[g - 1] + 2.0 * sd);
  }
}

TEST_CASE("alist round trip preserves the code") {
  const LdpcCode code = load_code("wifi_n648_r23");
  std::stringstream buffer;
  code.to_alist(buffer);
  const LdpcCode reread = LdpcCode::from_alist_stream(buffer, "roundtrip");
  CHECK(reread.n == code.n);
  CHECK(reread.m == code.m);
  CHECK(reread.check_neighbors == code.check_neighbors);
  CHECK(reread.var_neighbors == code.var_neighbors);

  Rng rng(25);
  const auto info = random_bits(rng, code.k);
  CHECK(reread.encode(info) == code.encode(info));
}

TEST_CASE("alist reader accepts the max-degree header variant") {
  // 4-bit single-parity-check code, both layouts.
  const std::string body = "1 1 1 1\n4\n1\n1\n1\n1\n1 2 3 4\n";
  std::stringstream plain("4 1\n" + body);
  const LdpcCode a = LdpcCode::from_alist_stream(plain, "plain");
  std::stringstream mackay("4 1\n1 4\n" + body);
  const LdpcCode b = LdpcCode::from_alist_stream(mackay, "mackay");
  CHECK(a.check_neighbors == b.check_neighbors);
  CHECK(a.k == 3);
}

TEST_CASE("alist reader rejects inconsistent lists") {
  std::stringstream s("4 1\n1 1 1 1\n3\n1\n1\n1\n1\n1 2 3 4\n");
  CHECK_THROWS(LdpcCode::from_alist_stream(s, "bad"));
}

TEST_CASE("interleaver round trips and preserves the multiset") {
  Rng rng(26);
  const Interleaver ilv = Interleaver::random(64, 5);
  std::vector<double> x(64);
  for (auto& v : x) v = rng.gaussian();
  const auto y = ilv.interleave(std::span<const double>(x));
  const auto back = ilv.deinterleave(std::span<const double>(y));
  CHECK(back == x);

  std::multiset<double> mx(x.begin(), x.end());
  std::multiset<double> my(y.begin(), y.end());
  CHECK(mx == my);
}

TEST_CASE("different interleaver seeds give different permutations") {
  const Interleaver a = Interleaver::random(64, 1);
  const Interleaver b = Interleaver::random(64, 2);
  CHECK(a.perm != b.perm);
  CHECK(Interleaver::random(64, 1).perm == a.perm);
}

TEST_CASE("interleaver rejects length mismatches") {
  const Interleaver ilv = Interleaver::random(8, 3);
  std::vector<double> x(7, 0.0);
  CHECK_THROWS_AS(ilv.interleave(std::span<const double>(x)), std::invalid_argument);
}
