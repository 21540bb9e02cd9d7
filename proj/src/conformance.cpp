/**
 * @file conformance.cpp
 * @brief Self-contained oracle checks runnable from the CLI. Each check
 *        prints one JSON line; a nonzero failure count fails the run.
 */
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "dmimo/detector.hpp"
#include "dmimo/harness.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/softmaps.hpp"
#include "dmimo/suppression.hpp"

namespace dmimo {

namespace {

ComplexMatrix random_matrix(Rng& rng, int rows, int cols) {
  ComplexMatrix m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rng.cgaussian(1.0);
  }
  return m;
}

ComplexMatrix random_pd(Rng& rng, int n) {
  const ComplexMatrix h = random_matrix(rng, 2 * n, n);
  ComplexMatrix a = h.adjoint() * h / static_cast<double>(n);
  a += 0.1 * ComplexMatrix::Identity(n, n);
  return 0.5 * (a + a.adjoint());
}

struct Check {
  std::string name;
  bool pass;
  double metric;
  double tolerance;
};

// Detector instance with per-column-uniform prior variances.
double evd_vs_naive_error(std::uint64_t seed, int n_ri, int n_r, int n_l) {
  Rng rng(seed);
  const ComplexMatrix h = random_matrix(rng, n_r, n_ri);
  const ComplexMatrix sigma = random_pd(rng, n_r);
  DetectorState st_evd = prepare(h, sigma);
  DetectorState st_naive = prepare(h, sigma);

  const ComplexMatrix y = random_matrix(rng, n_r, n_l);
  ComplexMatrix s_bar = random_matrix(rng, n_ri, n_l) * 0.5;
  RealMatrix v(n_ri, n_l);
  for (int l = 0; l < n_l; ++l) v.col(l).setConstant(rng.uniform());
  const SoftBlock soft = SoftBlock::from_stats(std::move(s_bar), std::move(v));

  const ComplexMatrix evd = isdic_detect_evd(st_evd, y, soft);
  const ComplexMatrix naive = isdic_detect_naive(st_naive, y, soft);
  return (evd - naive).cwiseAbs().maxCoeff();
}

double first_iteration_error(std::uint64_t seed, int n_ri, int n_r, int n_l) {
  Rng rng(seed);
  const ComplexMatrix h = random_matrix(rng, n_r, n_ri);
  const ComplexMatrix sigma = random_pd(rng, n_r);
  DetectorState state = prepare(h, sigma);
  const ComplexMatrix y = random_matrix(rng, n_r, n_l);

  const SoftBlock soft = SoftBlock::first_iteration(n_ri, n_l);
  const ComplexMatrix via_evd = isdic_detect_evd(state, y, soft);

  // The direct linear-MMSE expression, unbiased with the same coefficients.
  const ComplexMatrix lmmse = lmmse_detect(state, y);
  const RealVector rho = compute_rho(state, 1.0);
  ComplexMatrix unbiased = lmmse;
  for (Eigen::Index j = 0; j < unbiased.rows(); ++j) {
    unbiased.row(j) /= rho(j);
  }
  return (via_evd - unbiased).cwiseAbs().maxCoeff();
}

} // namespace

bool run_conformance(std::ostream& out) {
  std::vector<Check> checks;

  {
    double worst = 0.0;
    int idx = 0;
    for (int n_ri : {2, 4}) {
      for (int n_l : {8, 32}) {
        for (int rep = 0; rep < 10; ++rep) {
          worst = std::max(worst, evd_vs_naive_error(derive_seed(17, idx++), n_ri,
                                                     2 * n_ri, n_l));
        }
      }
    }
    checks.push_back({"evd_naive_equivalence", worst <= 1e-9, worst, 1e-9});
  }

  {
    double worst = 0.0;
    int idx = 0;
    for (int n_ri : {2, 4}) {
      for (int rep = 0; rep < 10; ++rep) {
        worst = std::max(worst,
                         first_iteration_error(derive_seed(29, idx++), n_ri, 2 * n_ri, 16));
      }
    }
    checks.push_back({"first_iteration_collapse", worst <= 1e-10, worst, 1e-10});
  }

  {
    const SystemConfig cfg = preset_config("desk");
    double worst_leak = 0.0;
    double worst_unitary = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      Rng rng(derive_seed(cfg.seed, 0xc0f, rep));
      const ChannelRealization chan = draw_channel(cfg, rng);
      const SuppressionSet supp =
          build_suppression(chan, cfg.rau_antennas, cfg.noise_variance());
      for (int kk = 0; kk < cfg.num_users; ++kk) {
        for (int l = 0; l < cfg.num_users; ++l) {
          if (l == kk) continue;
          const double rel = (supp.w_per_user[kk] * chan.g_blocks[l]).norm() /
                             chan.g_blocks[l].norm();
          worst_leak = std::max(worst_leak, rel);
        }
        const Eigen::Index n_r = supp.w_per_user[kk].rows();
        const double unit = (supp.w_per_user[kk] * supp.w_per_user[kk].adjoint() -
                             ComplexMatrix::Identity(n_r, n_r))
                                .cwiseAbs()
                                .maxCoeff();
        worst_unitary = std::max(worst_unitary, unit);
      }
    }
    checks.push_back({"block_diagonalization_leakage", worst_leak <= 1e-9, worst_leak, 1e-9});
    checks.push_back({"combiner_row_orthonormality", worst_unitary <= 1e-10,
                      worst_unitary, 1e-10});
  }

  {
    // Symbol statistics against an independent enumeration of the defining
    // sums, plus probability normalization, for every constellation.
    double worst_stat = 0.0;
    double worst_sum = 0.0;
    double worst_lut = 0.0;
    const SigmoidLut lut;
    for (int order : {2, 4, 6}) {
      const Constellation c = Constellation::qam(order);
      Rng rng(derive_seed(43, order));
      for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> llrs(order);
        for (auto& l : llrs) l = clamp_llr(12.0 * rng.gaussian());

        Complex mean{0, 0};
        double e2 = 0.0;
        double total = 0.0;
        for (std::uint32_t d = 0; d < c.points.size(); ++d) {
          double p = 1.0;
          for (int i = 0; i < order; ++i) {
            const double dt = ((d >> (order - 1 - i)) & 1u) ? 1.0 : -1.0;
            p *= 1.0 / (1.0 + std::exp(-dt * llrs[i]));
          }
          total += p;
          mean += p * c.points[d];
          e2 += p * std::norm(c.points[d]);
        }
        const double var = e2 - std::norm(mean);

        const SoftSymbol got = soft_symbol_stats(llrs, c);
        worst_stat = std::max(worst_stat, std::abs(got.mean - mean));
        worst_stat = std::max(worst_stat, std::abs(got.variance - var));
        worst_sum = std::max(worst_sum, std::abs(total - 1.0));

        const SoftSymbol via_lut = soft_symbol_stats(llrs, c, &lut);
        worst_lut = std::max(worst_lut, std::abs(via_lut.mean - mean));
        worst_lut = std::max(worst_lut, std::abs(via_lut.variance - var));
      }
    }
    checks.push_back({"soft_stats_enumeration", worst_stat <= 1e-12, worst_stat, 1e-12});
    checks.push_back({"symbol_prob_normalization", worst_sum <= 1e-9, worst_sum, 1e-9});
    checks.push_back({"soft_stats_lut_bound", worst_lut <= 1e-3, worst_lut, 1e-3});
  }

  {
    Rng rng(91);
    const int n_l = 64;
    const ComplexMatrix h = random_matrix(rng, 8, 4);
    const ComplexMatrix sigma = random_pd(rng, 8);
    const ComplexMatrix y = random_matrix(rng, 8, n_l);
    const SoftBlock soft = SoftBlock::first_iteration(4, n_l);

    DetectorState st_evd = prepare(h, sigma);
    isdic_detect_evd(st_evd, y, soft);
    DetectorState st_naive = prepare(h, sigma);
    isdic_detect_naive(st_naive, y, soft);
    const bool pass = st_evd.inversion_count == 1 && st_naive.inversion_count == n_l;
    checks.push_back({"inversion_accounting", pass,
                      static_cast<double>(st_naive.inversion_count), static_cast<double>(n_l)});
  }

  bool all_pass = true;
  for (const auto& c : checks) {
    nlohmann::json line;
    line["check"] = c.name;
    line["pass"] = c.pass;
    line["metric"] = c.metric;
    line["tolerance"] = c.tolerance;
    out << line.dump() << '\n';
    all_pass = all_pass && c.pass;
  }
  nlohmann::json summary;
  summary["summary"] = all_pass ? "pass" : "fail";
  summary["checks"] = checks.size();
  out << summary.dump() << '\n';
  return all_pass;
}

} // namespace dmimo
