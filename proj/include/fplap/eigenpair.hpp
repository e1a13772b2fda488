#pragma once

#include <cstdint>
#include <vector>

#include "fplap/nonlocal.hpp"

namespace fplap {

/// Principal eigenpair under the p-homogeneous Rayleigh quotient
/// λ₁ = min ‖u‖^p / |u|_p^p, with φ₁ > 0 and max φ₁ = 1.
struct EigenPair {
  double lambda1 = 0.0;
  DiscreteFunction phi1;
  double residual = 0.0;  ///< max_i |(Aφ₁)_i - λ₁ φ₁_i^{p-1}|
  std::size_t iterations = 0;
  std::vector<double> quotient_trace;  ///< Rayleigh quotient after each accepted step
};

struct EigenOptions {
  std::size_t max_iter = 20000;
  std::size_t starts = 5;  ///< multi-start count for p > 2
  std::uint64_t seed = 1;
};

double rayleigh_quotient(const KernelWeights& K, const DiscreteFunction& u);

double eigen_residual(const KernelWeights& K, double lambda, const DiscreteFunction& phi);

/// Matrix of the p = 2 formula built from K's weights; equals fplap_jacobian
/// when K.p() == 2 and serves as the linear preconditioner otherwise.
Eigen::MatrixXd linear_operator_matrix(const KernelWeights& K);

/// p = 2: inverse iteration with a Cholesky factorization. p > 2: normalized
/// descent on the Rayleigh quotient (monotone), started from the p = 2
/// eigenvector of linear_operator_matrix and perturbations of it.
/// Stops when residual <= tol * λ₁. Throws NotConverged or NonPositiveEigenvector.
EigenPair principal_eigenpair(const KernelWeights& K, double tol = 1e-10, const EigenOptions& opts = {});

/// Second eigenvalue for p = 2 (deflated inverse iteration); simplicity check.
double second_eigenvalue_p2(const KernelWeights& K, const EigenPair& first, double tol = 1e-10);

struct EmbeddingConstant {
  double value = 0.0;  ///< best-found sup of |u|_β^β over ‖u‖ = 1 (a lower bound of the true sup)
  double beta = 0.0;
  DiscreteFunction maximizer;  ///< normalized to ‖u‖ = 1
  std::size_t iterations = 0;
};

/// C_β = sup{ |u|_β^β : ‖u‖ = 1 } via multi-start projected ascent.
/// Throws InvalidExponent unless 0 < β <= p*_s.
EmbeddingConstant embedding_constant(const KernelWeights& K, double beta, double tol = 1e-12, std::uint64_t seed = 1,
                                     std::size_t starts = 4);

struct SobolevConstant {
  double value = 0.0;  ///< min ‖u‖^p over |u|_{p*} = 1; mesh dependent
  DiscreteFunction minimizer;
};

SobolevConstant sobolev_constant(const KernelWeights& K, double tol = 1e-12, std::uint64_t seed = 1);

}  // namespace fplap
