#include "fplap/nehari.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "fplap/linalg.hpp"

namespace fplap {

std::string_view to_string(NehariClass c) {
  switch (c) {
    case NehariClass::Plus: return "plus";
    case NehariClass::Minus: return "minus";
    case NehariClass::None: return "none";
  }
  return "none";
}

double normalized_residual(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  const auto g = energy_gradient(K, params, u);
  const auto Au = apply_fplap(K, u);
  double gmax = 0.0;
  double amax = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    gmax = std::max(gmax, std::abs(g[i]));
    amax = std::max(amax, std::abs(Au[i]));
  }
  return amax > 0.0 ? gmax / amax : std::numeric_limits<double>::infinity();
}

NehariClass classify(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u, double tol) {
  const auto c = fiber_coeffs(K, params, u);
  const auto f = evaluate_fiber(c, params.lambda, 1.0);
  if (std::abs(f.d1) > tol * std::max(1.0, c.P)) return NehariClass::None;
  if (f.d2 > 0.0) return NehariClass::Plus;
  if (f.d2 < 0.0) return NehariClass::Minus;
  return NehariClass::None;
}

double barrier_eta_literal(const ProblemParams& params) {
  return std::pow(params.lambda * params.q / params.alpha, 1.0 / (params.alpha + params.q));
}

double barrier_eta(const ProblemParams& params, double lambda1) {
  const double sub = std::pow(params.lambda / lambda1, 1.0 / (params.p - 1.0 + params.q));
  if (!params.has_power_term()) return sub;
  return std::min(barrier_eta_literal(params), sub);
}

namespace {

enum class Branch { Plus, Minus };

DiscreteFunction project(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u, Branch b,
                         double* t_out = nullptr) {
  const auto c = fiber_coeffs(K, params, u);
  const auto cp = critical_points(c, params.lambda);
  if (!cp) throw Error(ErrorCode::NoTwoRoots, "lambda >= lambda_bar(u): no Nehari projection");
  const double t = b == Branch::Plus ? cp->t1 : cp->t2;
  if (t_out) *t_out = t;
  return t * u;
}

bool all_positive(const DiscreteFunction& u) {
  for (double v : u.values())
    if (!(v > 0.0)) return false;
  return true;
}

void finish_report(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig, SolveReport& rep) {
  rep.energy = energy(K, params, rep.u);
  rep.residual = normalized_residual(K, params, rep.u);
  rep.seminorm = seminorm(K, rep.u);
  rep.nehari_class = classify(K, params, rep.u);
  rep.eta = barrier_eta(params, eig.lambda1);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.u.size(); ++i) margin = std::min(margin, rep.u[i] - rep.eta * eig.phi1[i]);
  rep.lower_bound_ok = margin >= -1e-10;
}

SolveReport run_branch(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                       const DiscreteFunction& u0, Branch branch, const NehariOptions& opts) {
  require_same_mesh(K.mesh(), u0.mesh());
  const double h = K.h();
  const double eta = barrier_eta(params, eig.lambda1);
  const DiscreteFunction floor = (opts.delta * eta) * eig.phi1;

  SolveReport rep;
  rep.method = branch == Branch::Plus ? "nehari-plus" : "nehari-minus";
  double t = 1.0;
  DiscreteFunction w = project(K, params, u0, branch, &t);
  double E = energy(K, params, w);
  rep.t_projection_trace.push_back({0, t, E});
  double dE = std::numeric_limits<double>::infinity();

  auto try_project = [&](const DiscreteFunction& v, DiscreteFunction& out, double& tv) {
    try {
      out = project(K, params, v, branch, &tv);
      return true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoTwoRoots || e.code() == ErrorCode::BracketFail) return false;
      throw;
    }
  };

  std::size_t it = 1;
  for (; it <= opts.max_iter; ++it) {
    const double res = normalized_residual(K, params, w);
    if (res <= opts.residual_tol && dE <= opts.energy_tol * std::max(1.0, std::abs(E))) {
      rep.converged = true;
      break;
    }
    const auto g = energy_gradient(K, params, w);
    const Eigen::VectorXd gv = to_eigen(g);

    if (opts.polish && res < 1e-3) {
      const Eigen::VectorXd d = solve_general(energy_hessian(K, params, w, HessianPart::Full), gv);
      DiscreteFunction cand = w;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= d(static_cast<Eigen::Index>(i));
      DiscreteFunction proj;
      double tc = 1.0;
      if (d.allFinite() && all_positive(cand) && try_project(cand, proj, tc) && all_positive(proj)) {
        const double Ec = energy(K, params, proj);
        if (Ec <= E + 1e-12 && normalized_residual(K, params, proj) < res) {
          dE = E - Ec;
          w = std::move(proj);
          E = Ec;
          rep.t_projection_trace.push_back({it, tc, E});
          continue;
        }
      }
    }

    const Eigen::VectorXd d = solve_spd(energy_hessian(K, params, w, HessianPart::Convex), gv);
    const double slope = h * gv.dot(d);
    bool accepted = false;
    if (slope > 0.0) {
      double tau = 1.0;
      for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
        DiscreteFunction cand = w;
        for (std::size_t i = 0; i < cand.size(); ++i)
          cand[i] = std::max(w[i] - tau * d(static_cast<Eigen::Index>(i)), floor[i]);
        DiscreteFunction proj;
        double tc = 1.0;
        if (!try_project(cand, proj, tc)) continue;
        const double Ec = energy(K, params, proj);
        if (Ec <= E - 1e-4 * tau * slope) {
          dE = E - Ec;
          w = std::move(proj);
          E = Ec;
          rep.t_projection_trace.push_back({it, tc, E});
          accepted = true;
        }
      }
    }
    if (!accepted) {
      rep.converged = normalized_residual(K, params, w) <= opts.residual_tol;
      break;
    }
  }
  rep.iterations = std::min(it, opts.max_iter);
  rep.u = std::move(w);
  finish_report(K, params, eig, rep);
  return rep;
}

void require_full_mode(const ProblemParams& params) {
  params.validate();
  if (!params.has_power_term()) throw Error(ErrorCode::InvalidMode, "Nehari branches need the power term");
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "requires lambda > 0");
}

void require_converged(const SolveReport& rep) {
  if (!rep.converged)
    throw Error(ErrorCode::NotConverged, rep.method + " stopped at residual " + std::to_string(rep.residual) +
                                             " after " + std::to_string(rep.iterations) + " iterations");
}

}  // namespace

DiscreteFunction project_plus(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  return project(K, params, u, Branch::Plus);
}

DiscreteFunction project_minus(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& u) {
  return project(K, params, u, Branch::Minus);
}

SolveReport minimize_plus(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                          const DiscreteFunction& u0, const NehariOptions& opts) {
  require_full_mode(params);
  SolveReport rep = run_branch(K, params, eig, u0, Branch::Plus, opts);
  require_converged(rep);
  return rep;
}

SolveReport minimize_minus(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                           const DiscreteFunction& u0, const NehariOptions& opts) {
  require_full_mode(params);
  if (!(params.alpha < params.p_star() - 1.0))
    throw Error(ErrorCode::SupercriticalAlpha, "minus branch requires alpha < p*_s - 1");

  const std::size_t starts = std::max<std::size_t>(opts.starts, 1);
  std::vector<std::future<SolveReport>> runs;
  for (std::size_t k = 0; k < starts; ++k) {
    DiscreteFunction start = u0;
    if (k > 0) {
      const auto r = random_direction(K.mesh(), opts.seed, k);
      const double rs = r.sup_norm();
      for (std::size_t i = 0; i < start.size(); ++i) start[i] *= 1.0 + 0.5 * r[i] / rs;
    }
    runs.push_back(std::async(std::launch::async, [&, start = std::move(start)]() {
      return run_branch(K, params, eig, start, Branch::Minus, opts);
    }));
  }
  SolveReport best;
  bool have = false;
  std::string last_error;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    try {
      SolveReport r = runs[k].get();
      r.start_index = k;
      const bool better = !have || (r.converged && !best.converged) ||
                          (r.converged == best.converged && r.energy < best.energy);
      if (better) {
        best = std::move(r);
        have = true;
      }
    } catch (const Error& e) {
      last_error = e.what();
    }
  }
  if (!have) throw Error(ErrorCode::NotConverged, "all minus-branch starts failed: " + last_error);
  require_converged(best);
  return best;
}

PolishResult newton_polish(const KernelWeights& K, const ProblemParams& params, DiscreteFunction u, double tol,
                           std::size_t max_iter) {
  PolishResult pr;
  double res = normalized_residual(K, params, u);
  std::size_t it = 0;
  for (; it < max_iter && res > tol; ++it) {
    const Eigen::VectorXd g = to_eigen(energy_gradient(K, params, u));
    const Eigen::VectorXd d = solve_general(energy_hessian(K, params, u, HessianPart::Full), g);
    if (!d.allFinite()) break;
    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 40 && !accepted; ++ls, tau *= 0.5) {
      DiscreteFunction cand = u;
      for (std::size_t i = 0; i < cand.size(); ++i) cand[i] -= tau * d(static_cast<Eigen::Index>(i));
      if (!all_positive(cand)) continue;
      const double rc = normalized_residual(K, params, cand);
      if (rc < res) {
        u = std::move(cand);
        res = rc;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  pr.u = std::move(u);
  pr.residual = res;
  pr.iterations = it;
  pr.converged = res <= tol;
  return pr;
}

VerifyReport verify_solution(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                             const DiscreteFunction& u, double tol, bool refine) {
  require_same_mesh(K.mesh(), u.mesh());
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveValue, "solution not positive at node " + std::to_string(i));
  VerifyReport vr;
  vr.residual = normalized_residual(K, params, u);
  vr.residual_ok = vr.residual <= tol;
  vr.energy = energy(K, params, u);
  vr.seminorm = seminorm(K, u);
  vr.nehari_class = classify(K, params, u, std::max(tol, 1e-8));
  vr.eta = barrier_eta(params, eig.lambda1);
  vr.eta_literal = params.has_power_term() ? barrier_eta_literal(params) : vr.eta;
  vr.barrier_margin = std::numeric_limits<double>::infinity();
  vr.barrier_margin_literal = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < u.size(); ++i) {
    vr.barrier_margin = std::min(vr.barrier_margin, u[i] - vr.eta * eig.phi1[i]);
    vr.barrier_margin_literal = std::min(vr.barrier_margin_literal, u[i] - vr.eta_literal * eig.phi1[i]);
  }
  vr.barrier_ok = vr.barrier_margin >= -tol;
  vr.barrier_ok_literal = vr.barrier_margin_literal >= -tol;
  vr.sup_norm = u.sup_norm();
  if (refine) {
    const Mesh fine = build_mesh(K.mesh().a(), K.mesh().b(), 2 * K.size() + 1);
    const KernelWeights Kf = build_kernel(fine, K.s(), K.p());
    const auto pr = newton_polish(Kf, params, interpolate(u, fine), 1e-10, 50);
    vr.refined = true;
    vr.refined_sup_norm = pr.u.sup_norm();
    vr.refinement_ok = pr.converged && std::isfinite(vr.refined_sup_norm) && vr.refined_sup_norm <= 10.0 * vr.sup_norm;
  }
  return vr;
}

}  // namespace fplap
