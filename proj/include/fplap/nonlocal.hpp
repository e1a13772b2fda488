#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fplap/domain.hpp"

namespace fplap {

enum class Mode { Full, PureSingular };

std::string_view to_string(Mode mode);

/// Parameters of (-Δ_p)^s u = λ u^{-q} + u^α on an interval (n = 1).
struct ProblemParams {
  double s = 0.4;
  double p = 2.0;
  double q = 0.5;
  double alpha = 3.0;
  double lambda = 0.1;
  Mode mode = Mode::Full;

  /// Critical exponent p*_s = n p / (n - s p).
  double p_star() const noexcept { return p / (1.0 - s * p); }

  bool has_power_term() const noexcept { return mode == Mode::Full; }

  ProblemParams with_lambda(double l) const {
    ProblemParams c = *this;
    c.lambda = l;
    return c;
  }

  /// Throws InvalidParams naming the violated standing assumption.
  void validate() const;
};

/// Dense pairwise weights w_ij = h^2 / |x_i - x_j|^{1+sp} (zero diagonal) and
/// exact complement interactions ζ_i = ((x_i - a)^{-sp} + (b - x_i)^{-sp}) / (sp).
class KernelWeights {
 public:
  KernelWeights(const Mesh& mesh, double s, double p, std::vector<double> weights, std::vector<double> zeta);

  const Mesh& mesh() const noexcept { return mesh_; }
  std::size_t size() const noexcept { return mesh_.size(); }
  double s() const noexcept { return s_; }
  double p() const noexcept { return p_; }
  double h() const noexcept { return mesh_.h(); }

  std::span<const double> row(std::size_t i) const noexcept { return {w_.data() + i * size(), size()}; }
  double weight(std::size_t i, std::size_t j) const noexcept { return w_[i * size() + j]; }
  std::span<const double> zeta() const noexcept { return zeta_; }
  std::span<const double> weights() const noexcept { return w_; }

 private:
  Mesh mesh_;
  double s_;
  double p_;
  std::vector<double> w_;
  std::vector<double> zeta_;
};

/// Throws InvalidParams unless s ∈ (0,1), p >= 2 and s p < 1.
KernelWeights build_kernel(const Mesh& mesh, double s, double p);

/// ∫_Q |u(x)-u(y)|^p / |x-y|^{1+sp}, i.e. ‖u‖^p:
/// sum_{i<j} 2 w_ij |u_i-u_j|^p + 2h sum_i ζ_i |u_i|^p.
double seminorm_p(const KernelWeights& K, const DiscreteFunction& u);

/// ‖u‖ = seminorm_p^{1/p}.
double seminorm(const KernelWeights& K, const DiscreteFunction& u);

/// Discrete (-Δ_p)^s: (Au)_i = (2/h)[sum_j w_ij φ(u_i-u_j) + h ζ_i φ(u_i)], φ(t) = |t|^{p-2} t.
/// Satisfies h <Au, v> = (1/p) d/dε seminorm_p(u + εv) at ε = 0.
DiscreteFunction apply_fplap(const KernelWeights& K, const DiscreteFunction& u);

/// Jacobian of u -> Au (dense, N x N). Constant for p = 2.
Eigen::MatrixXd fplap_jacobian(const KernelWeights& K, const DiscreteFunction& u);

/// I_λ(u) = (1/p)‖u‖^p - λ ∫G_q(u) - (1/(α+1)) ∫|u|^{α+1}; the last term is
/// dropped in pure-singular mode. G_q = |t|^{1-q}/(1-q) for q < 1 and ln|t|
/// for q = 1 (throws SingularLog if some u_i = 0).
double energy(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);

/// Nodal residual of the weak form, g_i = (Au)_i - λ u_i^{-q} - u_i^α, so that
/// h <g, v> is the directional derivative of I_λ. Throws NonPositiveValue
/// unless u > 0 at every node.
DiscreteFunction energy_gradient(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u);

enum class HessianPart {
  Full,    ///< J_A + diag(λ q u^{-q-1} - α u^{α-1})
  Convex,  ///< J_A + diag(λ q u^{-q-1}); always positive definite on u > 0
};

/// Derivative of energy_gradient with respect to the nodal values.
Eigen::MatrixXd energy_hessian(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u,
                               HessianPart part = HessianPart::Full);

/// Throws InvalidParams if K was built for a different (s, p) than params.
void require_compatible(const KernelWeights& K, const ProblemParams& params);

/// Binary kernel cache: "FPLAPKW\0", u32 version, f64 a, f64 b, u64 N, f64 s,
/// f64 p, then N*N row-major weights and N ζ values; all little-endian.
inline constexpr std::uint32_t kKernelCacheVersion = 1;

void save_kernel_cache(const KernelWeights& K, const std::filesystem::path& path);

/// Throws CacheFormat on malformed files or a key different from (mesh, s, p).
KernelWeights load_kernel_cache(const std::filesystem::path& path, const Mesh& mesh, double s, double p);
KernelWeights load_kernel_cache(const std::filesystem::path& path);

/// Loads the cache entry for (mesh, s, p) from dir, building and storing it on a miss.
KernelWeights cached_kernel(const std::filesystem::path& dir, const Mesh& mesh, double s, double p);

}  // namespace fplap
