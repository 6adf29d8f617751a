#pragma once

#include <Eigen/Dense>
#include <string>

#include "ucv/errors.hpp"

namespace ucv {

// Relative singularity threshold used for all small normal-matrix solves.
// Pseudo-inverses are deliberately avoided: a silently regularized solve
// would destroy the exact-unbiasedness property, so near-singular systems
// raise instead.
inline constexpr double kSingularTol = 1e-12;

// LU factorization that raises `code` when the matrix is singular beyond
// kSingularTol relative to its max-norm.
Eigen::FullPivLU<Eigen::MatrixXd> lu_checked(const Eigen::MatrixXd& a,
                                             ErrorCode code,
                                             const std::string& what,
                                             double tol = kSingularTol);

// Dense Kronecker product, column-major convention: kron(A, B) * vec(X)
// equals vec(B * X * A').
Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace ucv
