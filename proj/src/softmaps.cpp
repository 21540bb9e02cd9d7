#include "dmimo/softmaps.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dmimo {

namespace {

std::uint32_t gray_encode(std::uint32_t x) { return x ^ (x >> 1); }

// Amplitude of the PAM level selected by `axis_bits` on an axis with
// 2^half_bits levels. Label gray(levels-1-pos) sits at amplitude
// -(levels-1) + 2*pos, so all-zero bits land on the most positive level and
// adjacent levels differ in exactly one bit.
double pam_amplitude(std::uint32_t axis_bits, int half_bits) {
  const std::uint32_t levels = 1u << half_bits;
  for (std::uint32_t pos = 0; pos < levels; ++pos) {
    if (gray_encode(levels - 1 - pos) == axis_bits) {
      return -static_cast<double>(levels - 1) + 2.0 * pos;
    }
  }
  throw std::logic_error("pam_amplitude: unreachable");
}

} // namespace

Constellation Constellation::qam(int order_bits) {
  if (order_bits != 2 && order_bits != 4 && order_bits != 6) {
    std::ostringstream oss;
    oss << "Constellation::qam: order_bits must be 2, 4 or 6, got " << order_bits;
    throw std::invalid_argument(oss.str());
  }
  const int half = order_bits / 2;
  const std::uint32_t levels = 1u << half;
  // Unit average energy: E = 2 * (levels^2 - 1) / 3 per symbol before scaling.
  const double energy = 2.0 * (static_cast<double>(levels) * levels - 1.0) / 3.0;
  const double scale = 1.0 / std::sqrt(energy);

  Constellation c;
  c.order_bits = order_bits;
  c.points.resize(std::size_t{1} << order_bits);
  for (std::uint32_t label = 0; label < c.points.size(); ++label) {
    const std::uint32_t i_bits = label >> half;
    const std::uint32_t q_bits = label & (levels - 1);
    c.points[label] = scale * Complex(pam_amplitude(i_bits, half),
                                      pam_amplitude(q_bits, half));
  }
  return c;
}

double Constellation::max_magnitude() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, std::abs(p));
  return m;
}

void export_labeling(const Constellation& c, std::ostream& out) {
  for (std::uint32_t label = 0; label < c.points.size(); ++label) {
    for (int b = c.order_bits - 1; b >= 0; --b) {
      out << ((label >> b) & 1u);
    }
    out << ' ' << std::setprecision(12) << c.points[label].real() << ' '
        << c.points[label].imag() << '\n';
  }
}

void LlrBlock::saturate() {
  for (double& v : values) v = clamp_llr(v, clamp);
}

SigmoidLut::SigmoidLut(double x_max, double step) : x_max_(x_max), inv_step_(1.0 / step) {
  const std::size_t n = static_cast<std::size_t>(std::ceil(2.0 * x_max / step)) + 1;
  table_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -x_max + static_cast<double>(i) * step;
    table_[i] = 1.0 / (1.0 + std::exp(x));
  }
}

double SigmoidLut::value(double x) const {
  if (x <= -x_max_) return 1.0;
  if (x >= x_max_) return 0.0;
  const double t = (x + x_max_) * inv_step_;
  const std::size_t i = static_cast<std::size_t>(t);
  const double frac = t - static_cast<double>(i);
  if (i + 1 >= table_.size()) return table_.back();
  return table_[i] + frac * (table_[i + 1] - table_[i]);
}

std::vector<Complex> modulate(std::span<const std::uint8_t> bits, const Constellation& c) {
  if (bits.size() % c.order_bits != 0) {
    std::ostringstream oss;
    oss << "modulate: bit count " << bits.size() << " is not divisible by M_c = "
        << c.order_bits;
    throw std::invalid_argument(oss.str());
  }
  std::vector<Complex> symbols(bits.size() / c.order_bits);
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    std::uint32_t label = 0;
    for (int b = 0; b < c.order_bits; ++b) {
      label = (label << 1) | (bits[s * c.order_bits + b] & 1u);
    }
    symbols[s] = c.points[label];
  }
  return symbols;
}

namespace {

// Per-bit factors of the symbol probability product: p1 for bit = 1 and
// p0 for bit = 0, each 1/(1 + exp(-d~ * L)).
void bit_factors(std::span<const double> llrs, const SigmoidLut* lut,
                 double* p1, double* p0) {
  for (std::size_t i = 0; i < llrs.size(); ++i) {
    if (lut != nullptr) {
      p1[i] = lut->value(-llrs[i]);
      p0[i] = lut->value(llrs[i]);
    } else {
      p1[i] = 1.0 / (1.0 + std::exp(-llrs[i]));
      p0[i] = 1.0 / (1.0 + std::exp(llrs[i]));
    }
  }
}

} // namespace

double symbol_prob(std::span<const double> llrs, std::uint32_t label,
                   const Constellation& c, const SigmoidLut* lut) {
  if (static_cast<int>(llrs.size()) != c.order_bits) {
    throw std::invalid_argument("symbol_prob: LLR count must equal M_c");
  }
  double p = 1.0;
  for (int i = 0; i < c.order_bits; ++i) {
    const bool bit = ((label >> (c.order_bits - 1 - i)) & 1u) != 0;
    const double sgn = bit ? 1.0 : -1.0;
    p *= lut != nullptr ? lut->value(-sgn * llrs[i])
                        : 1.0 / (1.0 + std::exp(-sgn * llrs[i]));
  }
  return p;
}

SoftSymbol soft_symbol_stats(std::span<const double> llrs, const Constellation& c,
                             const SigmoidLut* lut) {
  if (static_cast<int>(llrs.size()) != c.order_bits) {
    throw std::invalid_argument("soft_symbol_stats: LLR count must equal M_c");
  }
  double p1[8];
  double p0[8];
  bit_factors(llrs, lut, p1, p0);

  Complex mean{0.0, 0.0};
  double second_moment = 0.0;
  const std::uint32_t n = 1u << c.order_bits;
  for (std::uint32_t label = 0; label < n; ++label) {
    double p = 1.0;
    for (int i = 0; i < c.order_bits; ++i) {
      const bool bit = ((label >> (c.order_bits - 1 - i)) & 1u) != 0;
      p *= bit ? p1[i] : p0[i];
    }
    mean += c.points[label] * p;
    second_moment += std::norm(c.points[label]) * p;
  }
  const double variance = std::max(0.0, second_moment - std::norm(mean));
  return {mean, variance};
}

std::vector<double> demap_soft(Complex s_hat, double gamma, const Constellation& c,
                               DemapMode mode, double clamp) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("demap_soft: gamma must be positive");
  }
  std::vector<double> llrs(c.order_bits);
  const std::uint32_t n = 1u << c.order_bits;

  if (mode == DemapMode::kMaxLog) {
    double best0[8];
    double best1[8];
    for (int i = 0; i < c.order_bits; ++i) {
      best0[i] = std::numeric_limits<double>::infinity();
      best1[i] = best0[i];
    }
    for (std::uint32_t label = 0; label < n; ++label) {
      const double d2 = std::norm(s_hat - c.points[label]);
      for (int i = 0; i < c.order_bits; ++i) {
        const bool bit = ((label >> (c.order_bits - 1 - i)) & 1u) != 0;
        double& best = bit ? best1[i] : best0[i];
        best = std::min(best, d2);
      }
    }
    for (int i = 0; i < c.order_bits; ++i) {
      llrs[i] = clamp_llr(gamma * (best0[i] - best1[i]), clamp);
    }
  } else {
    // Exact log-sum-exp over both hypothesis sets, shifted for stability.
    double sum0[8] = {};
    double sum1[8] = {};
    double dmin = std::numeric_limits<double>::infinity();
    for (std::uint32_t label = 0; label < n; ++label) {
      dmin = std::min(dmin, std::norm(s_hat - c.points[label]));
    }
    for (std::uint32_t label = 0; label < n; ++label) {
      const double w = std::exp(-gamma * (std::norm(s_hat - c.points[label]) - dmin));
      for (int i = 0; i < c.order_bits; ++i) {
        const bool bit = ((label >> (c.order_bits - 1 - i)) & 1u) != 0;
        (bit ? sum1[i] : sum0[i]) += w;
      }
    }
    for (int i = 0; i < c.order_bits; ++i) {
      llrs[i] = clamp_llr(std::log(sum1[i]) - std::log(sum0[i]), clamp);
    }
  }
  return llrs;
}

} // namespace dmimo
