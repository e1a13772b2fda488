#include "fplap/ordermethod.hpp"

#include <algorithm>
#include <cmath>

#include "fplap/linalg.hpp"

namespace fplap {

namespace {

double max_abs(const DiscreteFunction& u) { return u.sup_norm(); }

DiscreteFunction rhs_power(const ProblemParams& params, const DiscreteFunction& u) {
  DiscreteFunction f(u.mesh());
  if (params.has_power_term())
    for (std::size_t i = 0; i < u.size(); ++i) f[i] = std::pow(u[i], params.alpha);
  return f;
}

// Nodal g(u) = Au - λu^{-q} - u^α scaled by max|Au|, as (max, min).
std::pair<double, double> scaled_residual_range(const KernelWeights& K, const ProblemParams& params,
                                                const DiscreteFunction& u) {
  const auto g = energy_gradient(K, params, u);
  const double scale = max_abs(apply_fplap(K, u));
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.size(); ++i) {
    hi = std::max(hi, g[i] / scale);
    lo = std::min(lo, g[i] / scale);
  }
  return {hi, lo};
}

void fill_report(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig, SolveReport& rep,
                 double residual_tol) {
  rep.energy = energy(K, params, rep.u);
  rep.residual = normalized_residual(K, params, rep.u);
  rep.seminorm = seminorm(K, rep.u);
  rep.nehari_class = classify(K, params, rep.u);
  rep.eta = barrier_eta(params, eig.lambda1);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rep.u.size(); ++i) margin = std::min(margin, rep.u[i] - rep.eta * eig.phi1[i]);
  rep.lower_bound_ok = margin >= -1e-10;
  rep.converged = rep.residual <= residual_tol;
}

}  // namespace

IntervalCheck check_interval(const KernelWeights& K, const ProblemParams& params, const OrderInterval& interval,
                             double tol) {
  require_same_mesh(K.mesh(), interval.lower.mesh());
  IntervalCheck ic;
  for (std::size_t i = 0; i < interval.lower.size(); ++i)
    if (!(interval.lower[i] > 0.0))
      throw Error(ErrorCode::EmptyInterval, "lower bound not positive at node " + std::to_string(i));
  ic.sub_residual = scaled_residual_range(K, params, interval.lower).first;
  if (interval.upper) {
    const auto& up = *interval.upper;
    require_same_mesh(K.mesh(), up.mesh());
    for (std::size_t i = 0; i < up.size(); ++i)
      if (interval.lower[i] > up[i])
        throw Error(ErrorCode::EmptyInterval, "lower exceeds upper at node " + std::to_string(i));
    ic.super_residual = scaled_residual_range(K, params, up).second;
  }
  ic.valid = ic.sub_residual <= tol && (!interval.upper || ic.super_residual >= -tol);
  return ic;
}

SubSolution build_subsolution(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                              const std::optional<DiscreteFunction>& upper) {
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "requires lambda > 0");
  double t = std::pow(params.lambda / eig.lambda1, 1.0 / (params.p - 1.0 + params.q));
  if (upper) {
    require_same_mesh(eig.phi1.mesh(), upper->mesh());
    for (std::size_t i = 0; i < upper->size(); ++i) t = std::min(t, (*upper)[i] / eig.phi1[i]);
  }
  t *= 0.99;
  if (!(t > 0.0)) throw Error(ErrorCode::EmptyInterval, "sub-solution scale t <= 0");
  SubSolution sub;
  sub.t = t;
  sub.u = t * eig.phi1;
  sub.residual = scaled_residual_range(K, params, sub.u).first;
  sub.verified = sub.residual <= 1e-10;
  return sub;
}

DiscreteFunction inner_solve(const KernelWeights& K, const DiscreteFunction& f, double tol) {
  require_same_mesh(K.mesh(), f.mesh());
  for (double v : f.values())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "inner_solve right-hand side not finite");
  const double fmax = max_abs(f);
  if (fmax == 0.0) return DiscreteFunction(K.mesh());
  const Eigen::VectorXd fv = to_eigen(f);
  const Eigen::VectorXd v = solve_spd(linear_operator_matrix(K), fv);
  if (K.p() == 2.0) return from_eigen(K.mesh(), v);

  const double p = K.p();
  const double h = K.h();
  auto J = [&](const DiscreteFunction& u) { return seminorm_p(K, u) / p - h * to_eigen(u).dot(fv); };
  DiscreteFunction u = from_eigen(K.mesh(), v);
  // Best multiple of the linear solution: J(cv) is minimized at c^{p-1} = h f.v / ‖v‖^p.
  u *= std::pow(h * fv.dot(v) / seminorm_p(K, u), 1.0 / (p - 1.0));
  double Ju = J(u);
  auto residual = [&](const DiscreteFunction& w) { return (to_eigen(apply_fplap(K, w)) - fv).eval(); };
  Eigen::VectorXd r = residual(u);
  for (int it = 0; it < 200 && r.cwiseAbs().maxCoeff() > tol * fmax; ++it) {
    const Eigen::VectorXd d = solve_spd(fplap_jacobian(K, u), r);
    const double slope = h * r.dot(d);
    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
      const DiscreteFunction cand = u - from_eigen(K.mesh(), tau * d);
      const double Jc = J(cand);
      const Eigen::VectorXd rc = residual(cand);
      if (Jc <= Ju - 1e-4 * tau * slope ||
          (Jc <= Ju + 1e-14 * std::abs(Ju) && rc.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff())) {
        u = cand;
        Ju = Jc;
        r = rc;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  if (r.cwiseAbs().maxCoeff() > 100.0 * tol * fmax)
    throw Error(ErrorCode::NotConverged, "inner_solve residual " + std::to_string(r.cwiseAbs().maxCoeff() / fmax));
  return u;
}

DiscreteFunction inner_solve_singular(const KernelWeights& K, const ProblemParams& params, const DiscreteFunction& f,
                                      DiscreteFunction u, const DiscreteFunction* floor, double tol,
                                      std::size_t* iterations) {
  require_compatible(K, params);
  require_same_mesh(K.mesh(), f.mesh());
  require_same_mesh(K.mesh(), u.mesh());
  const double p = params.p;
  const double q = params.q;
  const double lam = params.lambda;
  const double h = K.h();
  if (floor)
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::max(u[i], (*floor)[i]);
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) throw Error(ErrorCode::NonPositiveValue, "initial guess not positive");

  const Eigen::VectorXd fv = to_eigen(f);
  auto J = [&](const DiscreteFunction& w) {
    const double G = q == 1.0 ? integrate(w, [](double x) { return std::log(x); })
                              : integrate(w, [q](double x) { return std::pow(x, 1.0 - q) / (1.0 - q); });
    return seminorm_p(K, w) / p - lam * G - h * to_eigen(w).dot(fv);
  };
  auto residual = [&](const DiscreteFunction& w, double& scale) {
    const auto Aw = apply_fplap(K, w);
    scale = max_abs(Aw);
    Eigen::VectorXd r(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i)
      r(static_cast<Eigen::Index>(i)) = Aw[i] - lam * std::pow(w[i], -q) - f[i];
    return r;
  };

  double scale = 0.0;
  Eigen::VectorXd r = residual(u, scale);
  double Ju = J(u);
  std::size_t it = 0;
  for (; it < 200 && r.cwiseAbs().maxCoeff() > tol * scale; ++it) {
    Eigen::MatrixXd H = fplap_jacobian(K, u);
    for (std::size_t i = 0; i < u.size(); ++i)
      H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lam * q * std::pow(u[i], -q - 1.0);
    const Eigen::VectorXd d = solve_spd(H, r);
    const double slope = h * r.dot(d);
    const double rmax = r.cwiseAbs().maxCoeff();
    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
      DiscreteFunction cand = u;
      bool positive = true;
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand[i] -= tau * d(static_cast<Eigen::Index>(i));
        if (floor) cand[i] = std::max(cand[i], (*floor)[i]);
        positive = positive && cand[i] > 0.0;
      }
      if (!positive) continue;
      const double Jc = J(cand);
      double sc = 0.0;
      const Eigen::VectorXd rc = residual(cand, sc);
      if (Jc <= Ju - 1e-4 * tau * slope || (Jc <= Ju + 1e-14 * std::abs(Ju) && rc.cwiseAbs().maxCoeff() < rmax)) {
        u = std::move(cand);
        Ju = Jc;
        r = rc;
        scale = sc;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  if (iterations) *iterations = it;
  if (!(r.cwiseAbs().maxCoeff() <= std::max(tol, 1e-10) * scale))
    throw Error(ErrorCode::NotConverged,
                "singular inner solve stalled at residual " + std::to_string(r.cwiseAbs().maxCoeff() / scale));
  return u;
}

MonotoneReport monotone_iterate(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                                const OrderInterval& interval, const MonotoneOptions& opts) {
  params.validate();
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "requires lambda > 0");
  check_interval(K, params, interval);

  MonotoneReport mr;
  SolveReport& rep = mr.solve;
  rep.method = "monotone";
  DiscreteFunction u = interval.lower;
  mr.sup_trace.push_back(u.sup_norm());
  bool settled = false;
  std::size_t n = 1;
  for (; n <= opts.max_iter; ++n) {
    DiscreteFunction next = inner_solve_singular(K, params, rhs_power(params, u), u);
    double change = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double drop = u[i] - next[i];
      mr.max_order_violation = std::max(mr.max_order_violation, drop);
      change = std::max(change, std::abs(drop));
      if (drop > opts.order_tol)
        throw Error(ErrorCode::MonotonicityViolation, "iterate " + std::to_string(n) + " decreases by " +
                                                          std::to_string(drop) + " at node " + std::to_string(i));
      if (interval.upper) {
        const double excess = next[i] - (*interval.upper)[i];
        mr.max_upper_excess = std::max(mr.max_upper_excess, excess);
        if (excess > opts.order_tol)
          throw Error(ErrorCode::MonotonicityViolation, "iterate " + std::to_string(n) + " exceeds the super-solution by " +
                                                            std::to_string(excess) + " at node " + std::to_string(i));
      }
    }
    const double sup = next.sup_norm();
    if (!std::isfinite(sup) || sup > opts.blowup)
      throw Error(ErrorCode::NotConverged, "monotone iterates unbounded after " + std::to_string(n) + " steps");
    u = std::move(next);
    mr.sup_trace.push_back(sup);
    rep.t_projection_trace.push_back({n, 1.0, energy(K, params, u)});
    if (change <= opts.tol * std::max(1.0, sup)) {
      settled = true;
      break;
    }
  }
  if (!settled)
    throw Error(ErrorCode::NotConverged, "monotone iteration hit the cap of " + std::to_string(opts.max_iter));
  rep.iterations = n;
  rep.u = std::move(u);
  fill_report(K, params, eig, rep, opts.residual_tol);
  return mr;
}

SolveReport box_minimize(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                         const OrderInterval& interval, const BoxOptions& opts) {
  params.validate();
  if (!interval.upper) throw Error(ErrorCode::EmptyInterval, "box minimization needs an upper bound");
  check_interval(K, params, interval);
  const auto& lo = interval.lower;
  const auto& hi = *interval.upper;
  const std::size_t n = lo.size();
  const double h = K.h();
  auto clamp = [&](DiscreteFunction& v) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
  };

  SolveReport rep;
  rep.method = "box";
  const double El = energy(K, params, lo);
  const double Eu = energy(K, params, hi);
  DiscreteFunction x = El <= Eu ? lo : hi;
  double E = std::min(El, Eu);
  rep.t_projection_trace.push_back({0, 1.0, E});

  double kkt = std::numeric_limits<double>::infinity();
  std::size_t it = 1;
  for (; it <= opts.max_iter; ++it) {
    const auto g = energy_gradient(K, params, x);
    const double scale = max_abs(apply_fplap(K, x));
    const Eigen::MatrixXd Hfull = energy_hessian(K, params, x, HessianPart::Full);

    // Distance to the projected Newton-scaled gradient step sets the activity margin.
    double width = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double hii = Hfull(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
      const double step = std::clamp(x[i] - g[i] / std::max(hii, 1e-300), lo[i], hi[i]);
      width = std::max(width, std::abs(x[i] - step));
    }
    const double eps = std::min(1e-3, width);
    std::vector<int> free_idx;
    std::vector<char> active(n, 0);
    kkt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= lo[i] + eps && g[i] > 0.0;
      const bool at_hi = x[i] >= hi[i] - eps && g[i] < 0.0;
      active[i] = at_lo || at_hi;
      if (!active[i]) free_idx.push_back(static_cast<int>(i));
      const bool blocked = (x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0);
      if (!blocked) kkt = std::max(kkt, std::abs(g[i]) / scale);
    }
    if (kkt <= opts.tol) {
      rep.converged = true;
      break;
    }

    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    double model = 0.0;  // h g_F . d_F
    if (!free_idx.empty()) {
      Eigen::VectorXd gF(static_cast<Eigen::Index>(free_idx.size()));
      for (std::size_t k = 0; k < free_idx.size(); ++k) gF(static_cast<Eigen::Index>(k)) = g[static_cast<std::size_t>(free_idx[k])];
      Eigen::MatrixXd HF = Hfull(free_idx, free_idx);
      Eigen::LLT<Eigen::MatrixXd> llt(HF);
      Eigen::VectorXd dF;
      if (llt.info() == Eigen::Success) dF = llt.solve(gF);
      else dF = solve_spd(energy_hessian(K, params, x, HessianPart::Convex)(free_idx, free_idx), gF);
      for (std::size_t k = 0; k < free_idx.size(); ++k) d(free_idx[k]) = dF(static_cast<Eigen::Index>(k));
      model = h * gF.dot(dF);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (active[i]) d(static_cast<Eigen::Index>(i)) = g[i] / Hfull(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));

    bool accepted = false;
    double tau = 1.0;
    for (int ls = 0; ls < 60 && !accepted; ++ls, tau *= 0.5) {
      DiscreteFunction cand = x;
      for (std::size_t i = 0; i < n; ++i) cand[i] -= tau * d(static_cast<Eigen::Index>(i));
      clamp(cand);
      double decrease = tau * model;
      for (std::size_t i = 0; i < n; ++i)
        if (active[i]) decrease += h * g[i] * (x[i] - cand[i]);
      const double Ec = energy(K, params, cand);
      if (Ec <= E - 1e-4 * decrease && Ec <= E) {
        x = std::move(cand);
        E = Ec;
        rep.t_projection_trace.push_back({it, 1.0, E});
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  rep.iterations = std::min(it, opts.max_iter);
  rep.u = std::move(x);
  const bool kkt_ok = rep.converged;
  fill_report(K, params, eig, rep, std::numeric_limits<double>::infinity());
  rep.converged = kkt_ok;
  if (!rep.converged)
    throw Error(ErrorCode::NotConverged, "box minimization stopped at KKT residual " + std::to_string(kkt));
  return rep;
}

SolveReport minimize_pure_singular(const KernelWeights& K, const ProblemParams& params, const EigenPair& eig,
                                   double delta) {
  if (params.mode != Mode::PureSingular) throw Error(ErrorCode::InvalidMode, "requires pure-singular mode");
  params.validate();
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "requires lambda > 0");
  const double t = std::pow(params.lambda / eig.lambda1, 1.0 / (params.p - 1.0 + params.q));
  const DiscreteFunction floor = (delta * t) * eig.phi1;
  SolveReport rep;
  rep.method = "pure-singular";
  rep.u = inner_solve_singular(K, params, DiscreteFunction(K.mesh()), t * eig.phi1, &floor, 1e-14, &rep.iterations);
  fill_report(K, params, eig, rep, 1e-8);
  rep.t_projection_trace.push_back({rep.iterations, 1.0, rep.energy});
  if (!rep.converged)
    throw Error(ErrorCode::NotConverged, "pure-singular solve residual " + std::to_string(rep.residual));
  return rep;
}

namespace {

struct Attempt {
  SweepEntry entry;
  std::optional<DiscreteFunction> solution;
};

Attempt attempt(const KernelWeights& K, const ProblemParams& P, const EigenPair& eig,
                const std::optional<DiscreteFunction>& lower, const std::optional<DiscreteFunction>& upper,
                std::string source, const MonotoneOptions& mopts) {
  Attempt a;
  a.entry.lambda = P.lambda;
  a.entry.upper_source = std::move(source);
  try {
    OrderInterval iv;
    iv.lower = lower ? *lower : build_subsolution(K, P, eig, upper).u;
    iv.upper = upper;
    const auto mr = monotone_iterate(K, P, eig, iv, mopts);
    a.entry.iterations = mr.solve.iterations;
    a.entry.energy = mr.solve.energy;
    a.entry.sup_norm = mr.solve.u.sup_norm();
    a.entry.residual = mr.solve.residual;
    a.entry.succeeded = mr.solve.converged;
    if (a.entry.succeeded) a.solution = mr.solve.u;
    else a.entry.failure = "residual above tolerance";
  } catch (const Error& e) {
    a.entry.failure = e.what();
  }
  return a;
}

}  // namespace

SweepResult lambda_sweep(const KernelWeights& K, const ProblemParams& base, const EigenPair& eig,
                         const std::vector<double>& grid, const SweepOptions& opts) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw Error(ErrorCode::InvalidParams, "lambda grid must be positive");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw Error(ErrorCode::InvalidParams, "lambda grid must be increasing");
  }
  SweepResult res;
  res.entries.resize(grid.size());
  std::vector<std::optional<DiscreteFunction>> solutions(grid.size());
  std::optional<DiscreteFunction> upper;
  for (std::size_t k = grid.size(); k-- > 0;) {
    const ProblemParams P = base.with_lambda(grid[k]);
    std::string source = upper ? "previous" : "none";
    std::optional<DiscreteFunction> bound = upper;
    if (!bound && P.has_power_term()) {
      try {
        NehariOptions no;
        no.max_iter = opts.plus_max_iter;
        bound = minimize_plus(K, P, eig, eig.phi1, no).u;
        source = "minimize_plus";
      } catch (const Error&) {
        bound.reset();
      }
    }
    Attempt a = attempt(K, P, eig, std::nullopt, bound, source, opts.monotone);
    if (a.solution) upper = a.solution;
    solutions[k] = std::move(a.solution);
    res.entries[k] = std::move(a.entry);
  }

  res.down_set = true;
  bool seen_failure = false;
  for (const auto& e : res.entries) {
    if (!e.succeeded) seen_failure = true;
    else if (seen_failure) res.down_set = false;
  }
  // Bracket: largest success below the smallest failure above it.
  std::optional<std::size_t> last_success;
  for (std::size_t k = 0; k < res.entries.size(); ++k) {
    if (res.entries[k].succeeded) last_success = k;
    else if (last_success) break;
  }
  const bool any_failure_above =
      last_success && *last_success + 1 < res.entries.size() && !res.entries[*last_success + 1].succeeded;
  res.has_transition = any_failure_above;
  if (!res.has_transition) {
    if (!last_success) res.lambda_hat = 0.0;
    else res.lambda_hat = std::numeric_limits<double>::infinity();
    return res;
  }

  double lo = grid[*last_success];
  double hi = grid[*last_success + 1];
  // The solution at a smaller λ is a sub-solution at every larger λ.
  std::optional<DiscreteFunction> lower = solutions[*last_success];
  for (std::size_t step = 0; step < opts.bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    Attempt a = attempt(K, base.with_lambda(mid), eig, lower, std::nullopt, "none", opts.monotone);
    if (a.solution) {
      lo = mid;
      lower = a.solution;
    } else {
      hi = mid;
    }
    res.bisection.push_back(std::move(a.entry));
  }
  res.bracket_lo = lo;
  res.bracket_hi = hi;
  res.lambda_hat = 0.5 * (lo + hi);
  return res;
}

}  // namespace fplap
