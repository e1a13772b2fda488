#pragma once

#include <cstdint>
#include <optional>

#include "fplap/nonlocal.hpp"

namespace fplap {

/// Reduced description of the fibering map t -> I_λ(t u):
/// P = ‖u‖^p, A = ∫|u|^{1-q} (support measure when q = 1), B = ∫|u|^{α+1}.
struct FiberCoefficients {
  double P = 0.0;
  double A = 0.0;
  double B = 0.0;
  double p = 2.0;
  double q = 0.5;
  double alpha = 3.0;
  /// ∫ ln|u| over the support; only meaningful (and only used) for q = 1.
  double log_const = 0.0;
  /// Whether the α-term is part of the energy (false in pure-singular mode).
  bool power_term = true;

  /// Exponents of m_u(t) = t^{p-1+q} P - t^{α+q} B.
  double rise_exponent() const noexcept { return p - 1.0 + q; }
  double fall_exponent() const noexcept { return alpha + q; }
};

struct FiberValue {
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// 0 < t1 < tmax < t2 with φ'(t1) = φ'(t2) = 0, φ''(t1) > 0 > φ''(t2).
struct CriticalPoints {
  double t1 = 0.0;
  double tmax = 0.0;
  double t2 = 0.0;
};

/// Throws ZeroFunction for u ≡ 0.
FiberCoefficients fiber_coeffs(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);

/// Exact φ_u(t), φ'_u(t), φ''_u(t). Throws NonPositiveT for t <= 0.
FiberValue evaluate_fiber(const FiberCoefficients& c, double lambda, double t);

/// m_u(t) = t^{p-1+q} P - t^{α+q} B, so that φ'_u(t) = t^{-q} (m_u(t) - λ A).
double m_fiber(const FiberCoefficients& c, double t);

/// Argmax of m_u: [(p-1+q) P / ((α+q) B)]^{1/(α+1-p)}. Throws DegenerateB if B = 0.
double t_max(const FiberCoefficients& c);

/// m_u(t_max) from the closed form as printed in the source analysis, whose
/// leading factor is (α+2-p)/(p-1+q).
double m_tmax_printed(const FiberCoefficients& c);

/// m_u(t_max) from direct maximization; leading factor (α+1-p)/(p-1+q).
double m_tmax_exact(const FiberCoefficients& c);

/// λ̄(u) = m_u(t_max)/A: φ_u has two critical points iff λ < λ̄(u).
/// Returns +infinity when A = 0. Uses the exact m_u(t_max).
double lambda_bar(const FiberCoefficients& c);

/// Roots of φ' on either side of t_max by bracketing and bisection.
/// Returns nullopt when λ >= λ̄. For λ = 0 the origin is the only
/// minimum and t1 is reported as 0. Throws BracketFail if bracketing needs more
/// than 200 doublings.
std::optional<CriticalPoints> critical_points(const FiberCoefficients& c, double lambda);

/// Uniform threshold λ_* = κ (C_{α+1})^{-(p-1+q)/(α+1-p)} / C_{1-q}, with κ
/// the leading constant of m_u(t_max) / ‖u‖^{...}.
struct LambdaStar {
  double printed = 0.0;    ///< κ with the printed (α+2-p) factor
  double corrected = 0.0;  ///< κ with the (α+1-p) factor from direct maximization
  bool prefactor_mismatch() const noexcept { return printed != corrected; }
};

/// Throws InvalidConstants unless both constants are positive and finite.
LambdaStar lambda_star(const ProblemParams& params, double c_one_minus_q, double c_alpha_plus_1);

/// Deterministic random nonnegative direction |sum_k c_k sin(kπ(x-a)/L)|.
DiscreteFunction random_direction(const Mesh& mesh, std::uint64_t seed, std::size_t index);

struct Lambda1Estimate {
  double value = 0.0;       ///< min(sample_min, refined)
  double sample_min = 0.0;  ///< min over sampled directions of λ̄(u)
  double refined = 0.0;     ///< λ̄ after descent from a fixed sample-independent start
  std::size_t best_sample = 0;
  std::size_t refine_iterations = 0;
  DiscreteFunction direction;  ///< direction attaining value
};

/// Estimate of Λ₁ = inf_u λ̄(u) over nonnegative directions.
Lambda1Estimate estimate_Lambda1(const KernelWeights& K, const ProblemParams& params, std::size_t samples,
                                 std::uint64_t seed);

}  // namespace fplap
