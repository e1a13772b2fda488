#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fplap/eigenpair.hpp"
#include "fplap/fiber.hpp"

namespace fplap {

enum class NehariClass { Plus, Minus, None };
std::string_view to_string(NehariClass c);

struct ProjectionStep {
  std::size_t iteration = 0;
  double t = 1.0;  ///< fiber scalar applied by the projection
  double energy = 0.0;
};

struct SolveReport {
  DiscreteFunction u;
  double energy = 0.0;
  double residual = 0.0;  ///< max|g| / max|Au|
  NehariClass nehari_class = NehariClass::None;
  std::vector<ProjectionStep> t_projection_trace;
  bool lower_bound_ok = false;  ///< u >= η φ₁ - 1e-10 with η from barrier_eta
  double eta = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double seminorm = 0.0;
  std::string method;
  std::size_t start_index = 0;  ///< winning start for multi-start runs
};

struct NehariOptions {
  double energy_tol = 1e-10;    ///< relative energy change
  double residual_tol = 1e-8;   ///< normalized residual
  std::size_t max_iter = 10000;
  double delta = 0.5;           ///< under-relaxation of the barrier safeguard
  std::size_t starts = 8;       ///< minus-branch multi-start count
  std::uint64_t seed = 1;
  bool polish = true;           ///< Newton steps once the residual is small
};

/// max_i |g_i| / max_i |(Au)_i|.
double normalized_residual(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);

/// Classification from the sign of φ''_u(1), provided |φ'_u(1)| <= tol * max(1, P).
NehariClass classify(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u,
                     double tol = 1e-8);

/// Barrier level η of the lower bound u >= η φ₁. Returns
/// min((λq/α)^{1/(α+q)}, (λ/λ₁)^{1/(p-1+q)}); the second factor makes ηφ₁ a
/// sub-solution, which the comparison argument needs. Pure-singular mode
/// uses only the second factor.
double barrier_eta(const ProblemParams& params, double lambda1);

/// The literal level (λq/α)^{1/(α+q)}.
double barrier_eta_literal(const ProblemParams& params);

/// t₁ u and t₂ u. Throw NoTwoRoots if λ >= λ̄(u).
DiscreteFunction project_plus(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);
DiscreteFunction project_minus(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);

/// Descent on the reduced functional u -> I(t₁(u) u). Throws InvalidMode in
/// pure-singular mode, NoTwoRoots if u0 admits no projection.
SolveReport minimize_plus(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                          const DiscreteFunction& u0, const NehariOptions& opts = {});

/// Same on 𝒩⁻ with multi-start from u0 and smooth perturbations of it; the
/// result is the best found (lowest energy, then lowest start index).
/// Throws SupercriticalAlpha unless α < p*_s - 1.
SolveReport minimize_minus(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                           const DiscreteFunction& u0, const NehariOptions& opts = {});

struct PolishResult {
  DiscreteFunction u;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Damped Newton on the nodal equations with the full Hessian; keeps u > 0
/// and never increases the normalized residual.
PolishResult newton_polish(const KernelWeights& K, const ProblemParams& params, DiscreteFunction u,
                           double tol = 1e-12, std::size_t max_iter = 50);

struct VerifyReport {
  double residual = 0.0;
  bool residual_ok = false;
  double energy = 0.0;
  double seminorm = 0.0;
  NehariClass nehari_class = NehariClass::None;
  double eta = 0.0;          ///< barrier_eta
  double eta_literal = 0.0;  ///< barrier_eta_literal
  double barrier_margin = 0.0;          ///< min_i (u_i - η φ₁_i)
  double barrier_margin_literal = 0.0;  ///< min_i (u_i - η_literal φ₁_i)
  bool barrier_ok = false;
  bool barrier_ok_literal = false;
  bool refined = false;
  double sup_norm = 0.0;
  double refined_sup_norm = 0.0;  ///< after interpolation to 2N+1 nodes and Newton polish
  bool refinement_ok = true;
  bool ok() const noexcept { return residual_ok && barrier_ok && refinement_ok; }
};

/// Weak-solution check. Throws NonPositiveValue unless u > 0.
VerifyReport verify_solution(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                             const DiscreteFunction& u, double tol = 1e-6, bool refine = false);

}  // namespace fplap
