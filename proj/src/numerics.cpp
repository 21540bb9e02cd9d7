#include "dmimo/numerics.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace dmimo {

void check_finite(const ComplexMatrix& a, const char* what) {
  if (!a.allFinite()) {
    std::ostringstream oss;
    oss << what << ": matrix (" << a.rows() << "x" << a.cols()
        << ") contains NaN or Inf entries";
    throw std::invalid_argument(oss.str());
  }
}

SvdResult svd(const ComplexMatrix& a, double rank_tol) {
  check_finite(a, "svd");
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument("svd: matrix must be at least 1x1");
  }

  Eigen::JacobiSVD<ComplexMatrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    std::ostringstream oss;
    oss << "svd: decomposition failed to converge for " << a.rows() << "x"
        << a.cols() << " input";
    throw std::runtime_error(oss.str());
  }

  SvdResult result;
  result.u = solver.matrixU();
  result.vh = solver.matrixV().adjoint();
  const Eigen::Index n_sv = std::min(a.rows(), a.cols());
  result.s = solver.singularValues().head(n_sv);

  if (rank_tol < 0.0) {
    const double eps = std::numeric_limits<double>::epsilon();
    rank_tol = static_cast<double>(std::max(a.rows(), a.cols())) * eps *
               (result.s.size() > 0 ? result.s(0) : 0.0);
  }
  result.rank = (result.s.array() > rank_tol).count();
  return result;
}

namespace {

void check_hermitian(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    std::ostringstream oss;
    oss << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw std::invalid_argument(oss.str());
  }
  const double scale = std::max(1.0, a.norm());
  const double asym = (a - a.adjoint()).norm();
  if (asym > 1e-10 * scale) {
    std::ostringstream oss;
    oss << what << ": matrix is not Hermitian (||A - A^H|| = " << asym
        << ", scale " << scale << ")";
    throw std::invalid_argument(oss.str());
  }
}

} // namespace

EvdResult hermitian_evd(const ComplexMatrix& a) {
  check_finite(a, "hermitian_evd");
  check_hermitian(a, "hermitian_evd");

  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    std::ostringstream oss;
    oss << "hermitian_evd: iteration failed to converge for " << a.rows() << "x"
        << a.cols() << " input";
    throw std::runtime_error(oss.str());
  }
  return EvdResult{solver.eigenvectors(), solver.eigenvalues()};
}

ComplexMatrix hermitian_solve(const ComplexMatrix& a, const ComplexMatrix& b) {
  check_finite(a, "hermitian_solve");
  check_finite(b, "hermitian_solve");
  check_hermitian(a, "hermitian_solve");
  if (a.cols() != b.rows()) {
    std::ostringstream oss;
    oss << "hermitian_solve: dimension mismatch, A is " << a.rows() << "x"
        << a.cols() << " but B is " << b.rows() << "x" << b.cols();
    throw std::invalid_argument(oss.str());
  }

  const Eigen::Index n = a.rows();
  const ComplexMatrix sym = 0.5 * (a + a.adjoint());
  Eigen::LDLT<ComplexMatrix> ldlt(sym);

  const double pivot_floor = 1e-12 * sym.real().trace() / static_cast<double>(n);
  const RealVector d = ldlt.vectorD().real();
  Eigen::Index weak = 0;
  const double min_pivot = d.minCoeff(&weak);
  if (ldlt.info() != Eigen::Success || min_pivot <= pivot_floor) {
    std::ostringstream oss;
    oss << "hermitian_solve: matrix is singular or indefinite, pivot " << weak
        << " is " << min_pivot << " (floor " << pivot_floor << ")";
    throw std::runtime_error(oss.str());
  }
  return ldlt.solve(b);
}

} // namespace dmimo
