#include "fplap/fiber.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fplap/linalg.hpp"

namespace fplap {

FiberCoefficients fiber_coeffs(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  require_compatible(K, params);
  if (u.is_zero()) throw Error(ErrorCode::ZeroFunction, "fiber map undefined for u = 0");
  FiberCoefficients c;
  c.p = params.p;
  c.q = params.q;
  c.alpha = params.alpha;
  c.power_term = params.has_power_term();
  c.P = seminorm_p(K, u);
  if (params.q == 1.0) {
    c.A = integrate(u, [](double v) { return v != 0.0 ? 1.0 : 0.0; });
    c.log_const = integrate(u, [](double v) { return v != 0.0 ? std::log(std::abs(v)) : 0.0; });
  } else {
    c.A = integral_abs_pow(u, 1.0 - params.q);
  }
  c.B = c.power_term ? integral_abs_pow(u, params.alpha + 1.0) : 0.0;
  return c;
}

FiberValue evaluate_fiber(const FiberCoefficients& c, double lambda, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::NonPositiveT, "fiber map requires t > 0");
  const double p = c.p;
  const double q = c.q;
  const double al = c.alpha;
  const double B = c.power_term ? c.B : 0.0;
  FiberValue v;
  const double singular = q == 1.0 ? c.A * std::log(t) + c.log_const : std::pow(t, 1.0 - q) * c.A / (1.0 - q);
  v.phi = std::pow(t, p) * c.P / p - lambda * singular;
  v.d1 = std::pow(t, p - 1.0) * c.P - lambda * std::pow(t, -q) * c.A;
  v.d2 = (p - 1.0) * std::pow(t, p - 2.0) * c.P + q * lambda * std::pow(t, -q - 1.0) * c.A;
  if (B != 0.0) {
    v.phi -= std::pow(t, al + 1.0) * B / (al + 1.0);
    v.d1 -= std::pow(t, al) * B;
    v.d2 -= al * std::pow(t, al - 1.0) * B;
  }
  return v;
}

double m_fiber(const FiberCoefficients& c, double t) {
  const double B = c.power_term ? c.B : 0.0;
  return std::pow(t, c.rise_exponent()) * c.P - (B != 0.0 ? std::pow(t, c.fall_exponent()) * B : 0.0);
}

double t_max(const FiberCoefficients& c) {
  if (!c.power_term || !(c.B > 0.0)) throw Error(ErrorCode::DegenerateB, "B(u) = 0: φ' has at most one root");
  if (!(c.alpha + 1.0 > c.p)) throw Error(ErrorCode::InvalidParams, "requires alpha + 1 > p");
  const double a = c.rise_exponent();
  const double b = c.fall_exponent();
  return std::pow(a * c.P / (b * c.B), 1.0 / (b - a));
}

namespace {

// Common factor P^{b/(b-a)} B^{-a/(b-a)} of the closed forms.
double tmax_scale(const FiberCoefficients& c) {
  const double a = c.rise_exponent();
  const double b = c.fall_exponent();
  return std::pow(c.P, b / (b - a)) * std::pow(c.B, -a / (b - a));
}

double ratio_power(double a, double b) { return std::pow(a / b, b / (b - a)); }

}  // namespace

double m_tmax_printed(const FiberCoefficients& c) {
  t_max(c);  // same preconditions
  const double a = c.rise_exponent();
  const double b = c.fall_exponent();
  return (c.alpha + 2.0 - c.p) / a * ratio_power(a, b) * tmax_scale(c);
}

double m_tmax_exact(const FiberCoefficients& c) { return m_fiber(c, t_max(c)); }

double lambda_bar(const FiberCoefficients& c) {
  const double m = m_tmax_exact(c);
  if (!(c.A > 0.0)) return std::numeric_limits<double>::infinity();
  return m / c.A;
}

std::optional<CriticalPoints> critical_points(const FiberCoefficients& c, double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidParams, "requires lambda >= 0");
  const double tm = t_max(c);
  if (lambda > 0.0 && !(lambda < lambda_bar(c))) return std::nullopt;
  const double target = lambda * c.A;
  auto excess = [&](double t) { return m_fiber(c, t) - target; };

  constexpr int kMaxDoublings = 200;
  auto bisect = [&](double lo, double hi) {
    // excess(lo) and excess(hi) have opposite signs.
    const bool lo_negative = excess(lo) < 0.0;
    for (int it = 0; it < 2000; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if ((excess(mid) < 0.0) == lo_negative) lo = mid;
      else hi = mid;
    }
    return std::abs(excess(lo)) < std::abs(excess(hi)) ? lo : hi;
  };

  CriticalPoints cp;
  cp.tmax = tm;
  if (lambda == 0.0) {
    cp.t1 = 0.0;
  } else {
    double lo = 0.5 * tm;
    int k = 0;
    while (excess(lo) >= 0.0) {
      if (++k > kMaxDoublings) throw Error(ErrorCode::BracketFail, "cannot bracket t1");
      lo *= 0.5;
    }
    cp.t1 = bisect(lo, tm);
  }
  double hi = 2.0 * tm;
  int k = 0;
  while (excess(hi) >= 0.0) {
    if (++k > kMaxDoublings) throw Error(ErrorCode::BracketFail, "cannot bracket t2");
    hi *= 2.0;
  }
  cp.t2 = bisect(tm, hi);

  const double tol = 1e-10 * std::max(1.0, c.P);
  const auto f2 = evaluate_fiber(c, lambda, cp.t2);
  if (std::abs(f2.d1) > tol || !(f2.d2 < 0.0))
    throw Error(ErrorCode::BracketFail, "t2 fails the critical-point checks");
  if (lambda > 0.0) {
    const auto f1 = evaluate_fiber(c, lambda, cp.t1);
    if (std::abs(f1.d1) > tol || !(f1.d2 > 0.0))
      throw Error(ErrorCode::BracketFail, "t1 fails the critical-point checks");
  }
  return cp;
}

LambdaStar lambda_star(const ProblemParams& params, double c_one_minus_q, double c_alpha_plus_1) {
  if (!(c_one_minus_q > 0.0) || !(c_alpha_plus_1 > 0.0) || !std::isfinite(c_one_minus_q) ||
      !std::isfinite(c_alpha_plus_1))
    throw Error(ErrorCode::InvalidConstants, "embedding constants must be positive and finite");
  const double p = params.p;
  const double q = params.q;
  const double al = params.alpha;
  if (!(al + 1.0 > p)) throw Error(ErrorCode::InvalidParams, "requires alpha + 1 > p");
  const double a = p - 1.0 + q;
  const double b = al + q;
  const double tail = ratio_power(a, b) * std::pow(c_alpha_plus_1, (-p + 1.0 - q) / (al + 1.0 - p)) / c_one_minus_q;
  LambdaStar ls;
  ls.printed = (al + 2.0 - p) / a * tail;
  ls.corrected = (al + 1.0 - p) / a * tail;
  return ls;
}

DiscreteFunction random_direction(const Mesh& mesh, std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kModes = 6;
  for (;;) {
    double coef[kModes];
    for (int k = 0; k < kModes; ++k) coef[k] = normal(rng) / (k + 1);
    auto u = DiscreteFunction::from_function(mesh, [&](double x) {
      const double y = (x - mesh.a()) / mesh.length();
      double v = 0.0;
      for (int k = 0; k < kModes; ++k) v += coef[k] * std::sin((k + 1) * M_PI * y);
      return std::abs(v);
    });
    if (u.sup_norm() > 0.0) return u;
  }
}

namespace {

// log λ̄(u) up to its additive constant, with nodal gradient and a positive
// definite approximation of its Hessian for the descent metric.
struct LogThreshold {
  const KernelWeights& K;
  const ProblemParams& params;

  double value(const DiscreteFunction& u) const { return std::log(lambda_bar(fiber_coeffs(K, params, u))); }

  void derivatives(const DiscreteFunction& u, Eigen::VectorXd& g, Eigen::MatrixXd& M) const {
    const auto c = fiber_coeffs(K, params, u);
    const double a = c.rise_exponent();
    const double b = c.fall_exponent();
    const double kb = b / (b - a);
    const double ka = a / (b - a);
    const double q = params.q;
    const auto Au = apply_fplap(K, u);
    const Eigen::Index n = static_cast<Eigen::Index>(u.size());
    g.resize(n);
    M = fplap_jacobian(K, u) * (kb * params.p / c.P);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ui = u[static_cast<std::size_t>(i)];
      g(i) = kb * params.p * Au[static_cast<std::size_t>(i)] / c.P - ka * (params.alpha + 1.0) * std::pow(ui, params.alpha) / c.B;
      if (q < 1.0) {
        g(i) -= (1.0 - q) * std::pow(ui, -q) / c.A;
        M(i, i) += (1.0 - q) * q * std::pow(ui, -q - 1.0) / c.A;
      }
    }
  }
};

}  // namespace

Lambda1Estimate estimate_Lambda1(const KernelWeights& K, const ProblemParams& params, std::size_t samples,
                                 std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::InvalidParams, "requires samples >= 1");
  require_compatible(K, params);
  const Mesh& mesh = K.mesh();
  Lambda1Estimate est;
  est.sample_min = std::numeric_limits<double>::infinity();
  DiscreteFunction best_sample;
  for (std::size_t i = 0; i < samples; ++i) {
    auto u = random_direction(mesh, seed, i);
    const double lb = lambda_bar(fiber_coeffs(K, params, u));
    if (lb < est.sample_min) {
      est.sample_min = lb;
      est.best_sample = i;
      best_sample = std::move(u);
    }
  }

  // Descent on log λ̄ from a fixed bump, so the refined value does not depend on the sample set.
  const LogThreshold f{K, params};
  auto u = DiscreteFunction::from_function(
      mesh, [&](double x) { return std::pow((x - mesh.a()) * (mesh.b() - x) / (0.25 * mesh.length() * mesh.length()), params.s); });
  double fu = f.value(u);
  const double h = mesh.h();
  Eigen::VectorXd g;
  Eigen::MatrixXd M;
  constexpr std::size_t kMaxRefine = 2000;
  std::size_t it = 0;
  for (bool done = false; !done && it < kMaxRefine; ++it) {
    f.derivatives(u, g, M);
    const Eigen::VectorXd d = solve_spd(M, g);
    const double slope = h * g.dot(d);
    if (!(slope > 1e-15 * (1.0 + std::abs(fu)))) break;
    done = true;
    double tau = 1.0;
    for (int ls = 0; ls < 60; ++ls, tau *= 0.5) {
      DiscreteFunction cand = u;
      bool positive = true;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand[i] -= tau * d(static_cast<Eigen::Index>(i));
        positive = positive && cand[i] > 0.0;
      }
      if (!positive) continue;
      const double fc = f.value(cand);
      if (fc <= fu - 1e-4 * tau * slope) {
        done = fu - fc <= 1e-15 * std::abs(fu);
        cand *= 1.0 / cand.sup_norm();
        u = std::move(cand);
        fu = fc;
        break;
      }
    }
  }
  est.refine_iterations = it;
  est.refined = std::exp(fu);
  if (est.refined < est.sample_min) {
    est.value = est.refined;
    est.direction = std::move(u);
  } else {
    est.value = est.sample_min;
    est.direction = std::move(best_sample);
  }
  return est;
}

}  // namespace fplap
