#pragma once

#include <Eigen/Dense>

#include "fplap/domain.hpp"

namespace fplap {

Eigen::VectorXd to_eigen(const DiscreteFunction& u);
DiscreteFunction from_eigen(const Mesh& mesh, const Eigen::VectorXd& v);

/// Solves M x = rhs for symmetric M by Cholesky. If M is not numerically
/// positive definite, a growing multiple of the mean diagonal is added until
/// the factorization succeeds (Levenberg-style regularization).
Eigen::VectorXd solve_spd(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs);

/// Dense LU solve for possibly indefinite systems (Newton on saddle points).
Eigen::VectorXd solve_general(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs);

/// h * sum_i a_i b_i.
double h_dot(const DiscreteFunction& a, const DiscreteFunction& b);

}  // namespace fplap
