#include "dmimo/detector.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace dmimo {

namespace {

constexpr double kRhoFloor = 1e-12;
constexpr double kGammaMin = 1e-6;
constexpr double kGammaMax = 1e6;

void check_columns(const DetectorState& state, const ComplexMatrix& y_tilde,
                   const SoftBlock& soft, const char* what) {
  if (y_tilde.rows() != state.n_rx()) {
    std::ostringstream oss;
    oss << what << ": y has " << y_tilde.rows() << " rows, expected " << state.n_rx();
    throw std::invalid_argument(oss.str());
  }
  if (soft.s_bar.rows() != state.n_streams() || soft.v.rows() != state.n_streams() ||
      soft.s_bar.cols() != y_tilde.cols() || soft.v.cols() != y_tilde.cols() ||
      soft.nu.size() != y_tilde.cols()) {
    std::ostringstream oss;
    oss << what << ": soft statistics shape does not match " << state.n_streams()
        << " streams x " << y_tilde.cols() << " columns";
    throw std::invalid_argument(oss.str());
  }
}

} // namespace

SoftBlock SoftBlock::first_iteration(Eigen::Index n_streams, Eigen::Index n_cols) {
  SoftBlock soft;
  soft.s_bar = ComplexMatrix::Zero(n_streams, n_cols);
  soft.v = RealMatrix::Ones(n_streams, n_cols);
  soft.nu = RealVector::Ones(n_cols);
  return soft;
}

SoftBlock SoftBlock::from_stats(ComplexMatrix s_bar, RealMatrix v, double v_max) {
  if (s_bar.rows() != v.rows() || s_bar.cols() != v.cols()) {
    throw std::invalid_argument("SoftBlock: mean and variance shapes differ");
  }
  if ((v.array() < -1e-12).any() || (v.array() > v_max + 1e-9).any()) {
    throw std::invalid_argument("SoftBlock: variances outside [0, v_max]");
  }
  SoftBlock soft;
  soft.v = v.cwiseMax(0.0);
  soft.s_bar = std::move(s_bar);
  soft.nu = soft.v.colwise().mean();
  return soft;
}

DetectorState prepare(const ComplexMatrix& h_eff, const ComplexMatrix& sigma) {
  check_finite(h_eff, "prepare");
  if (h_eff.rows() < h_eff.cols()) {
    std::ostringstream oss;
    oss << "prepare: effective channel is " << h_eff.rows() << "x" << h_eff.cols()
        << "; need N_R >= N_RI";
    throw std::invalid_argument(oss.str());
  }

  DetectorState state;
  state.h_eff = h_eff;
  state.f = hermitian_solve(sigma, h_eff).adjoint(); // (Sigma^{-1} H~)^H
  const ComplexMatrix gram = state.f * h_eff;
  state.a = 0.5 * (gram + gram.adjoint());
  const EvdResult evd = hermitian_evd(state.a);
  state.q = evd.q;
  state.lambda = evd.lambda;
  state.q_abs2 = state.q.cwiseAbs2();
  state.inversion_count = 0;
  return state;
}

RealVector compute_rho(const DetectorState& state, double nu) {
  if (nu < 0.0) throw std::invalid_argument("compute_rho: nu must be >= 0");
  const RealVector scaled =
      (state.lambda.array() / (nu * state.lambda.array() + 1.0)).matrix();
  return state.q_abs2 * scaled;
}

RealVector post_detection_snr(const DetectorState& state, double nu) {
  const RealVector rho = compute_rho(state, nu);
  // 1 - rho nu = sum_m |Q_jm|^2 / (nu lambda_m + 1): positive, no cancellation.
  const RealVector denom =
      state.q_abs2 * (1.0 / (nu * state.lambda.array() + 1.0)).matrix();
  RealVector gamma(rho.size());
  for (Eigen::Index j = 0; j < rho.size(); ++j) {
    const double g = rho(j) / std::max(denom(j), 1e-300);
    gamma(j) = std::clamp(g, kGammaMin, kGammaMax);
  }
  return gamma;
}

ComplexMatrix isdic_detect_evd(DetectorState& state, const ComplexMatrix& y_tilde,
                               const SoftBlock& soft, RealMatrix* rho_out) {
  check_columns(state, y_tilde, soft, "isdic_detect_evd");
  const Eigen::Index n = state.n_streams();
  const Eigen::Index cols = y_tilde.cols();

  // Whole-block products; the only per-column work is diagonal scaling.
  const ComplexMatrix residual = y_tilde - state.h_eff * soft.s_bar;
  ComplexMatrix w = state.q.adjoint() * (state.f * residual);
  RealMatrix lambda_scaled(n, cols);
  for (Eigen::Index l = 0; l < cols; ++l) {
    const auto denom = (soft.nu(l) * state.lambda.array() + 1.0);
    w.col(l).array() /= denom;
    lambda_scaled.col(l) = (state.lambda.array() / denom).matrix();
  }
  const ComplexMatrix z = state.q * w;
  const RealMatrix rho = state.q_abs2 * lambda_scaled;

  ComplexMatrix s_hat(n, cols);
  for (Eigen::Index l = 0; l < cols; ++l) {
    for (Eigen::Index j = 0; j < n; ++j) {
      s_hat(j, l) = z(j, l) / std::max(rho(j, l), kRhoFloor) + soft.s_bar(j, l);
    }
  }
  if (rho_out != nullptr) *rho_out = rho;
  state.inversion_count += 1;
  return s_hat;
}

ComplexMatrix isdic_detect_naive(DetectorState& state, const ComplexMatrix& y_tilde,
                                 const SoftBlock& soft, RealMatrix* rho_out) {
  check_columns(state, y_tilde, soft, "isdic_detect_naive");
  const Eigen::Index n = state.n_streams();
  const Eigen::Index cols = y_tilde.cols();

  const ComplexMatrix residual = y_tilde - state.h_eff * soft.s_bar;
  const ComplexMatrix u = state.f * residual;

  ComplexMatrix s_hat(n, cols);
  RealMatrix rho(n, cols);
  ComplexMatrix rhs(n, n + 1);
  for (Eigen::Index l = 0; l < cols; ++l) {
    const ComplexMatrix b =
        state.a * soft.v.col(l).asDiagonal() + ComplexMatrix::Identity(n, n);
    Eigen::PartialPivLU<ComplexMatrix> lu(b);
    state.inversion_count += 1;
    rhs.col(0) = u.col(l);
    rhs.rightCols(n) = state.a;
    const ComplexMatrix sol = lu.solve(rhs);
    if (!sol.allFinite()) {
      std::ostringstream oss;
      oss << "isdic_detect_naive: singular (A V + I) at column " << l;
      throw std::runtime_error(oss.str());
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      rho(j, l) = std::max(sol(j, 1 + j).real(), kRhoFloor);
      s_hat(j, l) = sol(j, 0) / rho(j, l) + soft.s_bar(j, l);
    }
  }
  if (rho_out != nullptr) *rho_out = rho;
  return s_hat;
}

ComplexMatrix lmmse_detect(DetectorState& state, const ComplexMatrix& y_tilde) {
  if (y_tilde.rows() != state.n_rx()) {
    std::ostringstream oss;
    oss << "lmmse_detect: y has " << y_tilde.rows() << " rows, expected " << state.n_rx();
    throw std::invalid_argument(oss.str());
  }
  const Eigen::Index n = state.n_streams();
  const ComplexMatrix lhs = state.a + ComplexMatrix::Identity(n, n);
  Eigen::LLT<ComplexMatrix> llt(lhs);
  state.inversion_count += 1;
  return llt.solve(state.f * y_tilde);
}

} // namespace dmimo
