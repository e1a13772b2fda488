#include "fplap/eigenpair.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "fplap/fiber.hpp"
#include "fplap/linalg.hpp"

namespace fplap {

double rayleigh_quotient(const KernelWeights& K, const DiscreteFunction& u) {
  return seminorm_p(K, u) / integral_abs_pow(u, K.p());
}

double eigen_residual(const KernelWeights& K, double lambda, const DiscreteFunction& phi) {
  const auto Au = apply_fplap(K, phi);
  double r = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    r = std::max(r, std::abs(Au[i] - lambda * std::pow(std::abs(phi[i]), K.p() - 2.0) * phi[i]));
  return r;
}

Eigen::MatrixXd linear_operator_matrix(const KernelWeights& K) {
  const auto n = static_cast<Eigen::Index>(K.size());
  const double h = K.h();
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = K.row(static_cast<std::size_t>(i));
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      M(i, j) = -(2.0 / h) * row[static_cast<std::size_t>(j)];
      diag += row[static_cast<std::size_t>(j)];
    }
    M(i, i) = (2.0 / h) * (diag + h * K.zeta()[static_cast<std::size_t>(i)]);
  }
  return M;
}

namespace {

void normalize_positive_sup(DiscreteFunction& u) {
  double sum = 0.0;
  for (double v : u.values()) sum += v;
  const double sign = sum < 0.0 ? -1.0 : 1.0;
  u *= sign / u.sup_norm();
}

void require_positive(const DiscreteFunction& u) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0))
      throw Error(ErrorCode::NonPositiveEigenvector, "eigenvector not positive at node " + std::to_string(i));
}

// Smallest eigenvector of the symmetric positive definite matrix M by inverse
// iteration; x0 must have a component along it.
Eigen::VectorXd inverse_iteration(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& M, Eigen::VectorXd x,
                                  double tol, std::size_t max_iter, std::size_t& iterations,
                                  std::vector<double>* trace, const Eigen::VectorXd* deflate = nullptr) {
  auto project = [&](Eigen::VectorXd& v) {
    if (deflate) v -= deflate->dot(v) / deflate->squaredNorm() * *deflate;
  };
  project(x);
  x.normalize();
  for (iterations = 0; iterations < max_iter; ++iterations) {
    const Eigen::VectorXd Mx = M * x;
    const double rq = x.dot(Mx);
    if (trace) trace->push_back(rq);
    if ((Mx - rq * x).cwiseAbs().maxCoeff() <= tol * rq * x.cwiseAbs().maxCoeff()) return x;
    x = llt.solve(x);
    project(x);
    x.normalize();
  }
  throw Error(ErrorCode::NotConverged, "inverse iteration did not converge");
}

EigenPair eigenpair_p2(const KernelWeights& K, double tol, const EigenOptions& opts) {
  const Eigen::MatrixXd M = linear_operator_matrix(K);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::NotConverged, "operator matrix not positive definite");
  EigenPair ep;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(M.rows());
  Eigen::VectorXd x = inverse_iteration(llt, M, x0, tol, opts.max_iter, ep.iterations, &ep.quotient_trace);
  ep.phi1 = from_eigen(K.mesh(), x);
  normalize_positive_sup(ep.phi1);
  require_positive(ep.phi1);
  ep.lambda1 = rayleigh_quotient(K, ep.phi1);
  ep.residual = eigen_residual(K, ep.lambda1, ep.phi1);
  return ep;
}

// Monotone descent of R(u) = ‖u‖^p / |u|_p^p on |u|_p = 1 with the operator
// Jacobian as metric.
EigenPair rayleigh_descent(const KernelWeights& K, DiscreteFunction u, double tol, std::size_t max_iter) {
  const double p = K.p();
  const double h = K.h();
  auto normalize = [&](DiscreteFunction& v) {
    for (double& x : v.values()) x = std::abs(x);
    v *= 1.0 / norm_lp(v, p);
  };
  normalize(u);
  EigenPair ep;
  double R = seminorm_p(K, u);
  ep.quotient_trace.push_back(R);
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const auto Au = apply_fplap(K, u);
    Eigen::VectorXd r(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = Au[i] - R * std::pow(u[i], p - 1.0);
    const double rmax = r.cwiseAbs().maxCoeff();
    if (rmax <= tol * R) break;
    if (rmax <= 1e-3 * R) {
      // Bordered Newton on Au - R u^{p-1} = 0, h sum u^p = 1.
      const Eigen::Index n = static_cast<Eigen::Index>(u.size());
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + 1, n + 1);
      B.topLeftCorner(n, n) = fplap_jacobian(K, u);
      Eigen::VectorXd rhs(n + 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double ui = u[static_cast<std::size_t>(i)];
        B(i, i) -= R * (p - 1.0) * std::pow(ui, p - 2.0);
        B(i, n) = -std::pow(ui, p - 1.0);
        B(n, i) = p * h * std::pow(ui, p - 1.0);
        rhs(i) = r(i);
      }
      rhs(n) = 0.0;
      const Eigen::VectorXd step = solve_general(B, rhs);
      DiscreteFunction cand = u;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= step(static_cast<Eigen::Index>(i));
      if (step.allFinite() && !cand.is_zero()) {
        normalize(cand);
        const double Rc = seminorm_p(K, cand);
        const auto Ac = apply_fplap(K, cand);
        double rc = 0.0;
        for (std::size_t i = 0; i < cand.size(); ++i) rc = std::max(rc, std::abs(Ac[i] - Rc * std::pow(cand[i], p - 1.0)));
        if (rc < rmax && Rc <= R * (1.0 + 1e-14)) {
          u = std::move(cand);
          R = Rc;
          ep.quotient_trace.push_back(Rc);
          continue;
        }
      }
    }
    const Eigen::VectorXd d = solve_spd(fplap_jacobian(K, u), r);
    const double slope = p * h * r.dot(d);
    if (!(slope > 0.0)) break;
    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
      DiscreteFunction cand = u;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= tau * d(static_cast<Eigen::Index>(i));
      if (cand.is_zero()) continue;
      normalize(cand);
      const double Rc = seminorm_p(K, cand);
      if (Rc < R && Rc <= R - 1e-4 * tau * slope) {
        u = std::move(cand);
        R = Rc;
        ep.quotient_trace.push_back(R);
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  ep.iterations = it;
  ep.phi1 = std::move(u);
  normalize_positive_sup(ep.phi1);
  ep.lambda1 = rayleigh_quotient(K, ep.phi1);
  ep.residual = eigen_residual(K, ep.lambda1, ep.phi1);
  return ep;
}

}  // namespace

EigenPair principal_eigenpair(const KernelWeights& K, double tol, const EigenOptions& opts) {
  if (!(K.p() >= 2.0)) throw Error(ErrorCode::InvalidParams, "requires p >= 2");
  if (K.p() == 2.0) return eigenpair_p2(K, tol, opts);

  // Start from the linear eigenvector (looser tolerance is enough for a start).
  const Eigen::MatrixXd M = linear_operator_matrix(K);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  std::size_t its = 0;
  const Eigen::VectorXd x =
      inverse_iteration(llt, M, Eigen::VectorXd::Ones(M.rows()), 1e-8, opts.max_iter, its, nullptr);
  DiscreteFunction start = from_eigen(K.mesh(), x);
  normalize_positive_sup(start);

  const std::size_t starts = std::max<std::size_t>(opts.starts, 1);
  std::vector<std::future<EigenPair>> runs;
  for (std::size_t k = 0; k < starts; ++k) {
    DiscreteFunction u0 = start;
    if (k > 0) {
      const auto r = random_direction(K.mesh(), opts.seed, k);
      const double rs = r.sup_norm();
      for (std::size_t i = 0; i < u0.size(); ++i) u0[i] *= 1.0 + 0.3 * r[i] / rs;
    }
    runs.push_back(std::async(std::launch::async, [&K, u0 = std::move(u0), tol, &opts]() {
      return rayleigh_descent(K, u0, tol, opts.max_iter);
    }));
  }
  EigenPair best;
  best.lambda1 = std::numeric_limits<double>::infinity();
  for (auto& f : runs) {
    EigenPair ep = f.get();
    if (ep.lambda1 < best.lambda1) best = std::move(ep);
  }
  if (!(best.residual <= tol * best.lambda1))
    throw Error(ErrorCode::NotConverged, "Rayleigh descent stalled at residual " + std::to_string(best.residual));
  require_positive(best.phi1);
  return best;
}

double second_eigenvalue_p2(const KernelWeights& K, const EigenPair& first, double tol) {
  if (K.p() != 2.0) throw Error(ErrorCode::InvalidParams, "second eigenvalue only for p = 2");
  const Eigen::MatrixXd M = linear_operator_matrix(K);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  const Eigen::VectorXd phi = to_eigen(first.phi1);
  Eigen::VectorXd x0(M.rows());
  for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = std::cos(M_PI * (static_cast<double>(i) + 0.5) / x0.size());
  std::size_t its = 0;
  const Eigen::VectorXd x = inverse_iteration(llt, M, x0, tol, 100000, its, nullptr, &phi);
  return x.dot(M * x) / x.squaredNorm();
}

namespace {

struct AscentResult {
  double log_value = -std::numeric_limits<double>::infinity();
  DiscreteFunction u;
  std::size_t iterations = 0;
};

// Maximizes F(u) = log(h sum u^β) - (β/p) log ‖u‖^p over u > 0, keeping ‖u‖ = 1.
AscentResult ascend_embedding(const KernelWeights& K, double beta, DiscreteFunction u, double tol,
                              std::size_t max_iter) {
  const double p = K.p();
  const double h = K.h();
  auto normalize = [&](DiscreteFunction& v) { v *= 1.0 / seminorm(K, v); };
  auto value = [&](const DiscreteFunction& v) {
    return std::log(integral_abs_pow(v, beta)) - beta / p * std::log(seminorm_p(K, v));
  };
  normalize(u);
  AscentResult res;
  double F = value(u);
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const double Bb = integral_abs_pow(u, beta);
    const auto Au = apply_fplap(K, u);
    Eigen::MatrixXd M = fplap_jacobian(K, u) / (p - 1.0);
    Eigen::VectorXd r(static_cast<Eigen::Index>(u.size()));
    double scale = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      r(ii) = std::pow(u[i], beta - 1.0) / Bb - Au[i];
      scale = std::max(scale, std::abs(Au[i]));
      if (beta < 1.0) M(ii, ii) += (1.0 - beta) * std::pow(u[i], beta - 2.0) / Bb;
    }
    if (r.cwiseAbs().maxCoeff() <= tol * scale) break;
    const Eigen::VectorXd d = solve_spd(M, r);
    const double slope = beta * h * r.dot(d);
    if (!(slope > 0.0)) break;
    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
      DiscreteFunction cand = u;
      bool positive = true;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand[i] += tau * d(static_cast<Eigen::Index>(i));
        positive = positive && cand[i] > 0.0;
      }
      if (!positive) continue;
      normalize(cand);
      const double Fc = value(cand);
      if (Fc > F && Fc >= F + 1e-4 * tau * slope) {
        u = std::move(cand);
        F = Fc;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  res.log_value = F;
  res.u = std::move(u);
  res.iterations = it;
  return res;
}

AscentResult best_ascent(const KernelWeights& K, double beta, double tol, std::uint64_t seed, std::size_t starts) {
  const Mesh& mesh = K.mesh();
  const auto bump = DiscreteFunction::from_function(mesh, [&](double x) {
    return std::pow((x - mesh.a()) * (mesh.b() - x) / (0.25 * mesh.length() * mesh.length()), K.s());
  });
  std::vector<std::future<AscentResult>> runs;
  for (std::size_t k = 0; k < std::max<std::size_t>(starts, 1); ++k) {
    DiscreteFunction u0 = bump;
    if (k > 0) {
      const auto r = random_direction(mesh, seed, k);
      u0 = r * (1.0 / r.sup_norm()) + 0.05 * bump;
    }
    runs.push_back(std::async(std::launch::async, [&K, beta, tol, u0 = std::move(u0)]() {
      return ascend_embedding(K, beta, u0, tol, 5000);
    }));
  }
  AscentResult best;
  for (auto& f : runs) {
    AscentResult r = f.get();
    if (r.log_value > best.log_value) best = std::move(r);
  }
  return best;
}

}  // namespace

EmbeddingConstant embedding_constant(const KernelWeights& K, double beta, double tol, std::uint64_t seed,
                                     std::size_t starts) {
  const double p_star = K.p() / (1.0 - K.s() * K.p());
  if (!(beta > 0.0) || !(beta <= p_star)) throw Error(ErrorCode::InvalidExponent, "requires 0 < beta <= p*_s");
  AscentResult r = best_ascent(K, beta, tol, seed, starts);
  EmbeddingConstant c;
  c.beta = beta;
  c.value = std::exp(r.log_value);
  c.maximizer = std::move(r.u);
  c.iterations = r.iterations;
  return c;
}

SobolevConstant sobolev_constant(const KernelWeights& K, double tol, std::uint64_t seed) {
  const double p_star = K.p() / (1.0 - K.s() * K.p());
  AscentResult r = best_ascent(K, p_star, tol, seed, 4);
  SobolevConstant S;
  S.value = std::exp(-K.p() / p_star * r.log_value);
  S.minimizer = r.u * (1.0 / norm_lp(r.u, p_star));
  return S;
}

}  // namespace fplap
