#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include "dmimo/rng.hpp"
#include "dmimo/softmaps.hpp"

using namespace dmimo;

namespace {

// Independent evaluation of the defining sums: probability product per
// label, then mean and variance by enumeration.
double oracle_prob(const std::vector<double>& llrs, std::uint32_t label, int m_c) {
  double p = 1.0;
  for (int i = 0; i < m_c; ++i) {
    const double dt = ((label >> (m_c - 1 - i)) & 1u) ? 1.0 : -1.0;
    p *= 1.0 / (1.0 + std::exp(-dt * llrs[i]));
  }
  return p;
}

SoftSymbol oracle_stats(const std::vector<double>& llrs, const Constellation& c) {
  Complex mean{0, 0};
  double e2 = 0;
  for (std::uint32_t d = 0; d < c.points.size(); ++d) {
    const double p = oracle_prob(llrs, d, c.order_bits);
    mean += p * c.points[d];
    e2 += p * std::norm(c.points[d]);
  }
  return {mean, e2 - std::norm(mean)};
}

} // namespace

TEST_CASE("QPSK labeling: 00 maps to (+1+j)/sqrt(2), all-ones is antipodal") {
  const auto c = Constellation::qam(2);
  const Complex p00 = c.point(0b00);
  CHECK(p00.real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p00.imag() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(c.point(0b11) == -p00);
}

TEST_CASE("constellations are unit energy and Gray labeled") {
  for (int order : {2, 4, 6}) {
    const auto c = Constellation::qam(order);
    double energy = 0;
    for (const auto& p : c.points) energy += std::norm(p);
    CHECK(std::abs(energy / c.size() - 1.0) < 1e-12);

    // Nearest neighbors on the square grid must differ in exactly one bit.
    std::map<std::pair<long, long>, std::uint32_t> grid;
    double quantum = 1e300; // the +-1 level, present for every order
    for (const auto& p : c.points) quantum = std::min(quantum, std::abs(p.real()));
    auto key = [&](const Complex& p) {
      return std::make_pair(std::lround(p.real() / quantum), std::lround(p.imag() / quantum));
    };
    for (std::uint32_t d = 0; d < c.points.size(); ++d) grid[key(c.point(d))] = d;
    REQUIRE(grid.size() == c.points.size());
    for (const auto& [pos, label] : grid) {
      const std::pair<long, long> right{pos.first + 2, pos.second};
      const std::pair<long, long> up{pos.first, pos.second + 2};
      if (auto it = grid.find(right); it != grid.end()) {
        CHECK(__builtin_popcount(label ^ it->second) == 1);
      }
      if (auto it = grid.find(up); it != grid.end()) {
        CHECK(__builtin_popcount(label ^ it->second) == 1);
      }
    }
  }
}

TEST_CASE("modulate groups bits MSB-first and rejects ragged input") {
  const auto c = Constellation::qam(4);
  const std::vector<std::uint8_t> bits = {0, 1, 1, 0, 1, 1, 1, 1};
  const auto syms = modulate(bits, c);
  REQUIRE(syms.size() == 2);
  CHECK(syms[0] == c.point(0b0110));
  CHECK(syms[1] == c.point(0b1111));
  const std::vector<std::uint8_t> ragged = {0, 1, 1};
  CHECK_THROWS_AS(modulate(ragged, c), std::invalid_argument);
}

TEST_CASE("symbol_prob: uniform, saturated, and hand-computed values") {
  const auto c = Constellation::qam(2);

  const std::vector<double> zeros = {0.0, 0.0};
  for (std::uint32_t d = 0; d < 4; ++d) {
    CHECK(symbol_prob(zeros, d, c) == doctest::Approx(0.25));
  }

  const std::vector<double> saturated = {kLlrClamp, 0.0};
  CHECK(symbol_prob(saturated, 0b10, c) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(symbol_prob(saturated, 0b00, c) == doctest::Approx(0.0).epsilon(1e-9));

  // L = (ln 3, -ln 3), d = (1, 0): both factors 3/4.
  const std::vector<double> hand = {std::log(3.0), -std::log(3.0)};
  CHECK(symbol_prob(hand, 0b10, c) == doctest::Approx(0.5625));
}

TEST_CASE("symbol probabilities sum to one for random clamped LLRs") {
  Rng rng(31);
  for (int order : {2, 4, 6}) {
    const auto c = Constellation::qam(order);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<double> llrs(order);
      for (auto& l : llrs) l = clamp_llr(15.0 * rng.gaussian());
      double total = 0;
      for (std::uint32_t d = 0; d < c.points.size(); ++d) {
        total += symbol_prob(llrs, d, c);
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("soft_symbol_stats trivial points") {
  const auto c = Constellation::qam(2);

  const std::vector<double> zeros = {0.0, 0.0};
  const SoftSymbol uniform = soft_symbol_stats(zeros, c);
  CHECK(std::abs(uniform.mean) < 1e-15);
  CHECK(uniform.variance == doctest::Approx(1.0));

  const std::vector<double> saturated = {-kLlrClamp, -kLlrClamp}; // selects label 00
  const SoftSymbol certain = soft_symbol_stats(saturated, c);
  CHECK(std::abs(certain.mean - c.point(0)) < 1e-9);
  CHECK(certain.variance < 1e-9);
}

TEST_CASE("soft_symbol_stats matches the enumeration oracle (frozen QPSK value)") {
  const auto c = Constellation::qam(2);
  // L = (ln 3, 0): the I bit prefers 1 (negative amplitude) three to one.
  const std::vector<double> llrs = {std::log(3.0), 0.0};
  const SoftSymbol got = soft_symbol_stats(llrs, c);
  const SoftSymbol want = oracle_stats(llrs, c);
  CHECK(std::abs(got.mean - want.mean) < 1e-15);
  CHECK(got.variance == doctest::Approx(want.variance).epsilon(1e-12));
  // Frozen oracle values: mean magnitude 0.5/sqrt(2) on the I axis only.
  CHECK(got.mean.real() == doctest::Approx(-0.5 / std::sqrt(2.0)));
  CHECK(got.mean.imag() == doctest::Approx(0.0));
  CHECK(got.variance == doctest::Approx(1.0 - 0.125));
}

TEST_CASE("soft_symbol_stats equals the oracle over random LLRs, all orders") {
  Rng rng(32);
  for (int order : {2, 4, 6}) {
    const auto c = Constellation::qam(order);
    const double v_bound = c.max_magnitude() * c.max_magnitude();
    for (int rep = 0; rep < 300; ++rep) {
      std::vector<double> llrs(order);
      for (auto& l : llrs) l = clamp_llr(12.0 * rng.gaussian());
      const SoftSymbol got = soft_symbol_stats(llrs, c);
      const SoftSymbol want = oracle_stats(llrs, c);
      CHECK(std::abs(got.mean - want.mean) < 1e-13);
      CHECK(std::abs(got.variance - want.variance) < 1e-13);
      CHECK(got.variance >= 0.0);
      // Bounded by the prior second moment; for equal-energy QPSK that is 1.
      CHECK(got.variance <= v_bound + 1e-9);
      if (order == 2) CHECK(got.variance <= 1.0 + 1e-9);
      CHECK(std::abs(got.mean) <= c.max_magnitude() + 1e-12);
    }
  }
}

TEST_CASE("sigmoid lookup table stays within its error budget") {
  const SigmoidLut lut;
  double worst = 0;
  for (double x = -30.0; x <= 30.0; x += 0.0007) {
    worst = std::max(worst, std::abs(lut.value(x) - 1.0 / (1.0 + std::exp(x))));
  }
  CHECK(worst <= 1e-4);
  CHECK(lut.value(-1e9) == 1.0);
  CHECK(lut.value(1e9) == 0.0);

  // LUT-mode statistics track the exact ones within 1e-3.
  Rng rng(33);
  const auto c = Constellation::qam(4);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> llrs(4);
    for (auto& l : llrs) l = clamp_llr(12.0 * rng.gaussian());
    const SoftSymbol exact = soft_symbol_stats(llrs, c);
    const SoftSymbol approx = soft_symbol_stats(llrs, c, &lut);
    CHECK(std::abs(exact.mean - approx.mean) < 1e-3);
    CHECK(std::abs(exact.variance - approx.variance) < 1e-3);
  }
}

TEST_CASE("demap_soft trivial geometry") {
  const auto c = Constellation::qam(2);

  // On a constellation point with high confidence: signs match its bits.
  const auto on_point = demap_soft(c.point(0b01), 100.0, c);
  CHECK(on_point[0] < 0); // bit 0
  CHECK(on_point[1] > 0); // bit 1

  // Equidistant origin: all LLRs vanish.
  for (double l : demap_soft(Complex(0, 0), 2.0, c)) CHECK(l == 0.0);
}

TEST_CASE("demap_soft matches the two-point minimum by hand") {
  const auto c = Constellation::qam(2);
  const auto llrs = demap_soft(Complex(0.5, 0.0), 2.0, c);
  // I axis: gamma * ((0.5 - a)^2 - (0.5 + a)^2) = -4 gamma 0.5 a, a = 1/sqrt2.
  CHECK(llrs[0] == doctest::Approx(-2.0 * std::sqrt(2.0)));
  CHECK(llrs[1] == doctest::Approx(0.0));
}

TEST_CASE("demap_soft brute-force oracle on random estimates") {
  Rng rng(34);
  for (int order : {2, 4, 6}) {
    const auto c = Constellation::qam(order);
    for (int rep = 0; rep < 100; ++rep) {
      const Complex s_hat = rng.cgaussian(1.0);
      const double gamma = 0.5 + 4.0 * rng.uniform();
      const auto got = demap_soft(s_hat, gamma, c);
      for (int i = 0; i < order; ++i) {
        double min0 = 1e300, min1 = 1e300;
        for (std::uint32_t d = 0; d < c.points.size(); ++d) {
          const double dist = std::norm(s_hat - c.point(d));
          if ((d >> (order - 1 - i)) & 1u) {
            min1 = std::min(min1, dist);
          } else {
            min0 = std::min(min0, dist);
          }
        }
        CHECK(got[i] == doctest::Approx(clamp_llr(gamma * (min0 - min1))));
      }
    }
  }
}

TEST_CASE("round trip: noiseless demap feeds back to a certain symbol") {
  for (int order : {2, 4, 6}) {
    const auto c = Constellation::qam(order);
    for (std::uint32_t d = 0; d < c.points.size(); ++d) {
      const auto llrs = demap_soft(c.point(d), 1e6, c);
      const SoftSymbol stat = soft_symbol_stats(llrs, c);
      CHECK(std::abs(stat.mean - c.point(d)) < 1e-6);
      CHECK(stat.variance < 1e-6);
    }
  }
}

TEST_CASE("exact demapper agrees with max-log at high confidence") {
  const auto c = Constellation::qam(4);
  const auto ml = demap_soft(c.point(3), 50.0, c, DemapMode::kMaxLog);
  const auto ex = demap_soft(c.point(3), 50.0, c, DemapMode::kExact);
  for (int i = 0; i < 4; ++i) CHECK(ml[i] == doctest::Approx(ex[i]).epsilon(1e-6));
}

TEST_CASE("labeling export emits one line per point with 12 digits") {
  const auto c = Constellation::qam(4);
  std::ostringstream out;
  export_labeling(c, out);
  std::istringstream in(out.str());
  std::string bits;
  double re, im;
  int lines = 0;
  while (in >> bits >> re >> im) {
    REQUIRE(bits.size() == 4);
    std::uint32_t label = 0;
    for (char ch : bits) label = (label << 1) | (ch - '0');
    CHECK(std::abs(re - c.point(label).real()) < 1e-11);
    CHECK(std::abs(im - c.point(label).imag()) < 1e-11);
    ++lines;
  }
  CHECK(lines == 16);
}

TEST_CASE("LlrBlock saturates to its clamp") {
  LlrBlock block(2, 3, 2);
  block.values.assign(block.values.size(), 100.0);
  block.values[0] = -55.0;
  block.saturate();
  CHECK(block.values[0] == -kLlrClamp);
  CHECK(block.values[1] == kLlrClamp);
  CHECK(block.at(0, 1).size() == 2);
}
