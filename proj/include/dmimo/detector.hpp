/**
 * @file detector.hpp
 * @brief Soft-input soft-output MMSE interference-cancellation detection.
 *
 * Two equivalent per-column filters are provided. The naive path factorizes
 * (A V_l + I) once per column with the full per-symbol variance diagonal and
 * is the quality reference. The fast path eigendecomposes A = Q diag(lambda)
 * Q^H once per block, approximates V_l by its mean nu_l I, and replaces each
 * per-column inversion with diagonal scaling between Q^H and Q. Both apply
 * the unbiasing diag(rho)^{-1} so the own-symbol gain is one.
 */
#pragma once

#include <cstdint>

#include "dmimo/numerics.hpp"

namespace dmimo {

struct DetectorState {
  ComplexMatrix q;        // eigenvectors of A
  RealVector lambda;      // eigenvalues of A, ascending
  ComplexMatrix f;        // filter front-end H~^H Sigma^{-1}, N_RI x N_R
  ComplexMatrix a;        // Gram matrix H~^H Sigma^{-1} H~, Hermitian PSD
  ComplexMatrix h_eff;    // H~ itself, kept for residual formation
  RealMatrix q_abs2;      // |Q|^2 elementwise, for rho/SNR accumulation
  std::int64_t inversion_count = 0; // N_RI x N_RI factorizations performed

  Eigen::Index n_streams() const { return a.rows(); }
  Eigen::Index n_rx() const { return h_eff.rows(); }
};

/// A-priori statistics for one block: per-symbol means and variances plus
/// the per-column variance means nu used by the fast path. Variances are
/// bounded by the prior second moment, which is 1 for equal-energy
/// constellations and max |alpha|^2 in general.
struct SoftBlock {
  ComplexMatrix s_bar; // N_RI x N_L
  RealMatrix v;        // N_RI x N_L, entries in [0, v_max]
  RealVector nu;       // nu[l] = mean of v(:, l)

  static SoftBlock first_iteration(Eigen::Index n_streams, Eigen::Index n_cols);
  /// Builds from means/variances, validating 0 <= v <= v_max and
  /// recomputing nu exactly.
  static SoftBlock from_stats(ComplexMatrix s_bar, RealMatrix v, double v_max = 1.0);
};

/// F = H~^H Sigma^{-1} via Hermitian solve, A = F H~ symmetrized, and the
/// EVD of A. Requires Sigma Hermitian PD and N_R >= N_RI.
DetectorState prepare(const ComplexMatrix& h_eff, const ComplexMatrix& sigma);

/// Unbiasing coefficients rho_j = [ (A nu + I)^{-1} A ]_jj evaluated through
/// the eigensystem; rho_j in (0, 1] for positive eigenvalues and nu <= 1.
RealVector compute_rho(const DetectorState& state, double nu);

/// Reference detector: per column l solves (A diag(v_l) + I) with the full
/// variance diagonal, then unbiases. inversion_count grows by N_L.
/// Optionally returns the per-column rho used for unbiasing.
ComplexMatrix isdic_detect_naive(DetectorState& state, const ComplexMatrix& y_tilde,
                                 const SoftBlock& soft, RealMatrix* rho_out = nullptr);

/// Fast detector per the eigendecomposition identity; one counted
/// factorization per call regardless of N_L.
ComplexMatrix isdic_detect_evd(DetectorState& state, const ComplexMatrix& y_tilde,
                               const SoftBlock& soft, RealMatrix* rho_out = nullptr);

/// Non-iterative baseline: s_hat_l = (A + I)^{-1} F y_l, no unbiasing.
ComplexMatrix lmmse_detect(DetectorState& state, const ComplexMatrix& y_tilde);

/// Post-detection SNR of the unbiased output under the Gaussian model
/// s_hat_j = s_j + eta_j, Var(eta_j) = 1/gamma_j: gamma_j = rho_j/(1 - rho_j nu),
/// evaluated in the cancellation-free form and clamped to [1e-6, 1e6].
RealVector post_detection_snr(const DetectorState& state, double nu);

} // namespace dmimo
