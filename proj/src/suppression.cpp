#include "dmimo/suppression.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dmimo/rng.hpp"

namespace dmimo {

ComplexMatrix noise_covariance(const ChannelRealization& chan, int user,
                               const ComplexMatrix& w_is_k, double sigma2) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("noise_covariance: sigma^2 must be positive");
  }
  if (user < 0 || user >= chan.num_users()) {
    throw std::invalid_argument("noise_covariance: user index out of range");
  }
  const Eigen::Index n_r = w_is_k.rows();
  if (w_is_k.cols() != chan.h_effective[user].rows()) {
    std::ostringstream oss;
    oss << "noise_covariance: W is " << w_is_k.rows() << "x" << w_is_k.cols()
        << " but the channel has " << chan.h_effective[user].rows() << " rx antennas";
    throw std::invalid_argument(oss.str());
  }

  ComplexMatrix interference = ComplexMatrix::Zero(n_r, n_r);
  for (int l = 0; l < chan.num_users(); ++l) {
    if (l == user) continue;
    const ComplexMatrix wh = w_is_k * chan.h_effective[l];
    interference += wh * wh.adjoint();
  }
  ComplexMatrix cov =
      interference + sigma2 * ComplexMatrix::Identity(n_r, n_r);
  return 0.5 * (cov + cov.adjoint());
}

SuppressionSet build_suppression(const ChannelRealization& chan, int rau_antennas,
                                 double sigma2, RowSelection selection,
                                 std::uint64_t selection_seed) {
  const int n_users = chan.num_users();
  if (n_users < 1) {
    throw std::invalid_argument("build_suppression: no users in channel");
  }
  const Eigen::Index rx = chan.g_blocks[0].rows();

  SuppressionSet set;
  set.w_per_user.resize(n_users);
  set.h_eff.resize(n_users);
  set.sigma.resize(n_users);
  set.residual_leakage.assign(n_users, 0.0);

  for (int kk = 0; kk < n_users; ++kk) {
    // G_[k]: all interferers' channels, side by side.
    Eigen::Index cols = 0;
    for (int l = 0; l < n_users; ++l) {
      if (l != kk) cols += chan.g_blocks[l].cols();
    }

    ComplexMatrix null_basis; // U_k^(0), rx x (rx - r_k)
    Eigen::Index rank = 0;
    if (cols == 0) {
      null_basis = ComplexMatrix::Identity(rx, rx);
    } else {
      ComplexMatrix g_interferers(rx, cols);
      Eigen::Index at = 0;
      for (int l = 0; l < n_users; ++l) {
        if (l == kk) continue;
        g_interferers.middleCols(at, chan.g_blocks[l].cols()) = chan.g_blocks[l];
        at += chan.g_blocks[l].cols();
      }
      const SvdResult dec = svd(g_interferers);
      rank = dec.rank;
      null_basis = dec.u.rightCols(rx - rank);
    }

    const Eigen::Index null_dim = rx - rank;
    if (null_dim < rau_antennas) {
      std::ostringstream oss;
      oss << "build_suppression: user " << kk << " has interferer rank r_k = " << rank
          << ", null space dimension " << null_dim << " < required N_R = "
          << rau_antennas;
      throw std::runtime_error(oss.str());
    }

    // W_IS,k = N_R selected rows of (U_k^(0))^H.
    std::vector<Eigen::Index> rows(null_dim);
    std::iota(rows.begin(), rows.end(), 0);
    if (selection == RowSelection::kRandom) {
      Rng rng(derive_seed(selection_seed, 0x5e1ec7, static_cast<std::uint64_t>(kk)));
      for (Eigen::Index i = 0; i < rau_antennas; ++i) {
        const Eigen::Index j =
            i + static_cast<Eigen::Index>(rng.uniform_int(static_cast<std::uint64_t>(null_dim - i)));
        std::swap(rows[i], rows[j]);
      }
    }
    ComplexMatrix w(rau_antennas, rx);
    for (Eigen::Index i = 0; i < rau_antennas; ++i) {
      w.row(i) = null_basis.col(rows[i]).adjoint();
    }

    // Null-space identity: the combiner must annihilate every interferer.
    double leakage = 0.0;
    double worst_rel = 0.0;
    for (int l = 0; l < n_users; ++l) {
      if (l == kk) continue;
      const double lk = (w * chan.g_blocks[l]).norm();
      leakage = std::max(leakage, lk);
      worst_rel = std::max(worst_rel, lk / std::max(1e-300, chan.g_blocks[l].norm()));
    }
    if (worst_rel > 1e-9) {
      std::ostringstream oss;
      oss << "build_suppression: user " << kk << " residual leakage " << worst_rel
          << " exceeds the block-diagonalization tolerance";
      throw std::runtime_error(oss.str());
    }

    set.w_per_user[kk] = std::move(w);
    set.residual_leakage[kk] = leakage;
    set.h_eff[kk] = set.w_per_user[kk] * chan.h_effective[kk];
    set.sigma[kk] = noise_covariance(chan, kk, set.w_per_user[kk], sigma2);
  }
  return set;
}

ComplexMatrix apply_suppression(const ComplexMatrix& w_is_k, const ComplexMatrix& y) {
  if (w_is_k.cols() != y.rows()) {
    std::ostringstream oss;
    oss << "apply_suppression: W is " << w_is_k.rows() << "x" << w_is_k.cols()
        << " but y has " << y.rows() << " rows";
    throw std::invalid_argument(oss.str());
  }
  return w_is_k * y;
}

} // namespace dmimo
