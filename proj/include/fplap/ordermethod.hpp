#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fplap/nehari.hpp"

namespace fplap {

/// Ordered pair lower <= upper of sub/super-solutions. An absent upper bound
/// means the iteration runs unbounded and blow-up signals non-existence.
struct OrderInterval {
  DiscreteFunction lower;
  std::optional<DiscreteFunction> upper;
};

struct IntervalCheck {
  double sub_residual = 0.0;    ///< max_i g_i(lower) / max|A lower|; <= tol for a sub-solution
  double super_residual = 0.0;  ///< min_i g_i(upper) / max|A upper|; >= -tol for a super-solution
  bool ordered = true;
  bool valid = false;
};

/// Throws EmptyInterval if lower is not positive or exceeds upper somewhere.
IntervalCheck check_interval(const KernelWeights& K, const ProblemParams& params, const OrderInterval& interval,
                             double tol = 1e-10);

struct SubSolution {
  DiscreteFunction u;
  double t = 0.0;
  double residual = 0.0;  ///< max_i g_i(u) / max|Au|
  bool verified = false;  ///< residual <= 1e-10
};

/// t φ₁ with t = 0.99 min((λ/λ₁)^{1/(p-1+q)}, min_i upper_i/φ₁_i).
/// Throws EmptyInterval if t <= 0.
SubSolution build_subsolution(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                              const std::optional<DiscreteFunction>& upper = std::nullopt);

/// Minimizer of (1/p)‖u‖^p - h Σ f_i u_i, i.e. Au = f. One Cholesky solve for
/// p = 2, damped Newton with energy decrease for p > 2.
DiscreteFunction inner_solve(const KernelWeights& K, const DiscreteFunction& f, double tol = 1e-12);

/// Positive solution of Au - λu^{-q} = f (f >= 0), the minimizer of a
/// strictly convex functional on u > 0, by damped Newton started from guess.
/// Iterates are kept above floor when given.
DiscreteFunction inner_solve_singular(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& f,
                                      DiscreteFunction guess, const DiscreteFunction* floor = nullptr,
                                      double tol = 1e-13, std::size_t* iterations = nullptr);

struct MonotoneOptions {
  double tol = 1e-12;  ///< on ‖u_{n+1} - u_n‖_∞ / max(1, ‖u_n‖_∞)
  std::size_t max_iter = 20000;
  double blowup = 1e6;
  double order_tol = 1e-12;
  double residual_tol = 1e-6;
};

struct MonotoneReport {
  SolveReport solve;
  double max_order_violation = 0.0;  ///< max over steps and nodes of u_n - u_{n+1}, clipped at 0
  double max_upper_excess = 0.0;     ///< max of u_n - upper, clipped at 0
  std::vector<double> sup_trace;
};

/// Semi-implicit monotone iteration A u_{n+1} - λu_{n+1}^{-q} = u_n^α from
/// u₀ = lower. Throws MonotonicityViolation if the sequence decreases or
/// leaves the interval by more than order_tol, NotConverged on blow-up or
/// iteration cap.
MonotoneReport monotone_iterate(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                                const OrderInterval& interval, const MonotoneOptions& opts = {});

struct BoxOptions {
  double tol = 1e-10;  ///< normalized projected gradient
  std::size_t max_iter = 5000;
};

/// Projected Newton minimization of I_λ over lower <= u <= upper, started from
/// the lower-energy endpoint. Requires interval.upper.
SolveReport box_minimize(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                         const OrderInterval& interval, const BoxOptions& opts = {});

/// Minimizer of (1/p)‖u‖^p - λ∫G_q(u) for the pure-singular problem, with the
/// safeguard u >= δ t φ₁. Throws InvalidMode unless params.mode is PureSingular.
SolveReport minimize_pure_singular(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                                   double delta = 0.5);

struct SweepEntry {
  double lambda = 0.0;
  bool succeeded = false;
  std::size_t iterations = 0;
  double energy = std::numeric_limits<double>::quiet_NaN();
  double sup_norm = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::string upper_source;  ///< "previous", "minimize_plus" or "none"
  std::string failure;
};

struct SweepOptions {
  std::size_t bisection_steps = 20;
  MonotoneOptions monotone{1e-11, 20000, 1e6, 1e-12, 1e-6};
  std::size_t plus_max_iter = 500;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  ///< in grid order
  std::vector<SweepEntry> bisection;
  bool down_set = false;
  bool has_transition = false;
  double lambda_hat = std::numeric_limits<double>::quiet_NaN();  ///< midpoint of the final bracket
  double bracket_lo = std::numeric_limits<double>::quiet_NaN();
  double bracket_hi = std::numeric_limits<double>::quiet_NaN();
};

/// Existence sweep over an increasing λ grid, processed from the largest λ down
/// so that each super-solution is the solution at the nearest larger
/// successful λ; then bisection between the largest success and the smallest
/// failure. Failures are data, not errors.
SweepResult lambda_sweep(const KernelWeights& K, const ProblemParams& base, const EigenPair& eig,
                         const std::vector<double>& grid, const SweepOptions& opts = {});

}  // namespace fplap
