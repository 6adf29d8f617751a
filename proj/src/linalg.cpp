#include "ucv/linalg.hpp"

namespace ucv {

Eigen::FullPivLU<Eigen::MatrixXd> lu_checked(const Eigen::MatrixXd& a,
                                             ErrorCode code,
                                             const std::string& what,
                                             double tol) {
  const double scale = a.size() > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
  if (!(scale > 0.0)) fail(code, what + " (zero matrix)");
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  // Pivots below tol relative to the max-norm count as zero.
  lu.setThreshold(tol * scale / lu.maxPivot());
  if (!lu.isInvertible()) fail(code, what);
  return lu;
}

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace ucv
