/**
 * @file numerics.hpp
 * @brief Dense complex-matrix primitives: SVD, Hermitian EVD, Hermitian solves.
 */
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace dmimo {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Throws std::invalid_argument if any entry of `a` is NaN or Inf.
void check_finite(const ComplexMatrix& a, const char* what);

struct SvdResult {
  ComplexMatrix u;   // all left singular vectors, including the null-space block
  RealVector s;      // singular values, descending
  ComplexMatrix vh;  // conjugate-transposed right singular vectors
  Eigen::Index rank; // number of singular values above the rank tolerance
};

struct EvdResult {
  ComplexMatrix q;   // eigenvectors as columns, unitary for Hermitian input
  RealVector lambda; // real eigenvalues, ascending
};

/// Full SVD of an arbitrary complex matrix. rank_tol < 0 selects the
/// default max(rows,cols) * eps * s[0] numerical-rank rule.
SvdResult svd(const ComplexMatrix& a, double rank_tol = -1.0);

/// EVD of a Hermitian matrix. The input is checked against A = A^H and
/// symmetrized as (A + A^H)/2 before factorization, so q is unitary and
/// q^{-1} = q^H holds.
EvdResult hermitian_evd(const ComplexMatrix& a);

/// Solves A X = B for Hermitian positive definite A without forming A^{-1}.
/// Throws if a pivot falls below 1e-12 * trace(A)/n (singular/indefinite A).
ComplexMatrix hermitian_solve(const ComplexMatrix& a, const ComplexMatrix& b);

} // namespace dmimo
