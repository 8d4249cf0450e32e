#pragma once

#include <Eigen/Dense>

namespace pxem {

inline constexpr double kMaxCondition = 1e12;

/// Solves A x = b for symmetric positive-definite A without forming an
/// inverse. Cholesky first, pivoted LDL' if Cholesky breaks down.
/// Throws SingularMatrixError (naming the weakest pivot) when A is not
/// positive definite or its condition number exceeds max_condition.
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          double max_condition = kMaxCondition);

/// Column rank from a column-pivoted QR.
Eigen::Index column_rank(const Eigen::MatrixXd& x);

}  // namespace pxem
