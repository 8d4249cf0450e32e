#include "pxem/linalg.hpp"

#include <cmath>
#include <sstream>

#include "pxem/errors.hpp"

namespace pxem {
namespace {

// Original coordinate of the smallest |D_kk| in P A P' = L D L'.
std::size_t weakest_pivot(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  const Eigen::VectorXd d = ldlt.vectorD();
  Eigen::Index k = 0;
  d.cwiseAbs().minCoeff(&k);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm;
  perm = ldlt.transpositionsP();
  for (Eigen::Index j = 0; j < perm.indices().size(); ++j) {
    if (perm.indices()(j) == k) return static_cast<std::size_t>(j);
  }
  return static_cast<std::size_t>(k);
}

}  // namespace

Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          double max_condition) {
  if (a.rows() != a.cols() || a.rows() != b.size() || a.rows() == 0) {
    throw PreconditionError("solve_spd: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || !(hi / lo <= max_condition)) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    const std::size_t pivot = weakest_pivot(ldlt);
    std::ostringstream msg;
    msg << "matrix is singular or ill-conditioned (eigenvalues in [" << lo << ", " << hi
        << "]); weakest pivot at coordinate " << pivot + 1;
    throw SingularMatrixError(msg.str(), pivot);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  return ldlt.solve(b);
}

Eigen::Index column_rank(const Eigen::MatrixXd& x) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  return qr.rank();
}

}  // namespace pxem
